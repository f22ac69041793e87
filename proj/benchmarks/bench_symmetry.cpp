#include <benchmark/benchmark.h>

#include "ksym/gauge.hpp"
#include "ksym/symmetry.hpp"

namespace {

ksym::LagrangianModel model(const ksym::VarTable& vars, const char* source) {
  return ksym::LagrangianModel(vars, ksym::parse(source, vars));
}

const ksym::VarTable kVars(2, 2);
constexpr const char* kRotational = "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2 - (q1^2 + q2^2)^2/4";

void noether_current_rotation(benchmark::State& state) {
  const auto m = model(kVars, kRotational);
  const ksym::VectorFieldQ z({ksym::parse("q2", kVars), ksym::parse("-q1", kVars)}, kVars);
  const ksym::SampleSpec samples{ksym::SampleBox{}, 100, 1};
  for (auto _ : state) benchmark::DoNotOptimize(ksym::noether_current_lagrangian(m, z, {}, samples));
}
BENCHMARK(noether_current_rotation);

void cartan_check_lagrangian(benchmark::State& state) {
  const auto m = model(kVars, kRotational);
  const ksym::VectorFieldQ z({ksym::parse("q2", kVars), ksym::parse("-q1", kVars)}, kVars);
  const ksym::VectorField y = ksym::complete_lift(kVars, z);
  const ksym::SampleSpec samples{ksym::SampleBox{}, 100, 1};
  for (auto _ : state) benchmark::DoNotOptimize(ksym::check_cartan_lagrangian(y, m, samples));
}
BENCHMARK(cartan_check_lagrangian);

void gauge_compare_shifted(benchmark::State& state) {
  const auto base = model(kVars, kRotational);
  const auto shifted = model(kVars,
                             "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2 - (q1^2 + q2^2)^2/4"
                             " + 2*q1*q2*v1_1 + (q1^2 + 1)*v2_1 + exp(q1)*v1_2 - 7");
  const ksym::SampleSpec samples{ksym::SampleBox{}, 100, 2};
  for (auto _ : state) benchmark::DoNotOptimize(ksym::gauge_compare(shifted, base, samples));
}
BENCHMARK(gauge_compare_shifted);

}  // namespace

BENCHMARK_MAIN();
