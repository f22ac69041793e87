#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "ksym/expr.hpp"
#include "ksym/var_table.hpp"

namespace {

const ksym::VarTable kVars(2, 2);
constexpr const char* kSource =
    "(v1_1^2 - v1_2^2 + v2_1^2 - v2_2^2)/2 - (q1^2 + q2^2)^2/4 + sin(q1)*exp(q2)*v1_1 + log(2 + cos(q1*q2))";

void parse_lagrangian(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ksym::parse(kSource, kVars));
}
BENCHMARK(parse_lagrangian);

void eval_tree(benchmark::State& state) {
  const ksym::Expr e = ksym::parse(kSource, kVars);
  const ksym::Bindings b{{"q1", 0.3}, {"q2", -0.4}, {"v1_1", 1.1}, {"v1_2", 0.2}, {"v2_1", -0.7}, {"v2_2", 0.9}};
  for (auto _ : state) benchmark::DoNotOptimize(ksym::eval(e, b));
}
BENCHMARK(eval_tree);

void eval_compiled(benchmark::State& state) {
  const ksym::Expr e = ksym::parse(kSource, kVars);
  const std::vector<std::string> chart = kVars.velocity_chart();
  const ksym::CompiledExpr compiled(e, chart);
  const std::vector<double> x{0.3, -0.4, 1.1, 0.2, -0.7, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(compiled(x));
}
BENCHMARK(eval_compiled);

void second_derivatives(benchmark::State& state) {
  const ksym::Expr e = ksym::parse(kSource, kVars);
  const std::vector<std::string> chart = kVars.velocity_chart();
  for (auto _ : state) {
    for (const auto& a : chart)
      for (const auto& b : chart) benchmark::DoNotOptimize(ksym::diff(ksym::diff(e, a), b));
  }
}
BENCHMARK(second_derivatives);

}  // namespace

BENCHMARK_MAIN();
