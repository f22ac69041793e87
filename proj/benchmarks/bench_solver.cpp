#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "ksym/lagrangian.hpp"
#include "ksym/solver.hpp"

namespace {

ksym::LagrangianModel model(int n, int k, const char* source) {
  ksym::VarTable vars(n, k);
  ksym::Expr l = ksym::parse(source, vars);
  return ksym::LagrangianModel(std::move(vars), std::move(l));
}

void sopde_solve_rotational(benchmark::State& state) {
  const auto m = model(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2 - (q1^2 + q2^2)^2/4");
  Eigen::VectorXd x(6);
  x << 0.3, -0.4, 1.1, 0.2, -0.7, 0.9;
  const ksym::JetPoint w = ksym::JetPoint::from_flat(m.vars(), x);
  for (auto _ : state) benchmark::DoNotOptimize(ksym::sopde_solve(m, w));
}
BENCHMARK(sopde_solve_rotational);

void rk4_pendulum(benchmark::State& state) {
  const auto m = model(1, 1, "v1_1^2/2 + cos(q1)");
  const ksym::GridSpec grid({ksym::GridAxis{0.0, 10.0, 10.0 / static_cast<double>(state.range(0)), false}});
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ksym::integrate_k1(m, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1), grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(rk4_pendulum)->Arg(1000)->Arg(10000);

void leapfrog_wave(benchmark::State& state) {
  const auto m = model(1, 2, "(v1_1^2 - v1_2^2)/2");
  const int nodes = static_cast<int>(state.range(0));
  const double h = 2.0 * std::numbers::pi / nodes;
  const ksym::GridSpec grid(
      {ksym::GridAxis{0.0, 1.0, 1.0 / std::ceil(1.0 / h), false}, ksym::GridAxis{0.0, 2.0 * std::numbers::pi, h, true}});
  const std::vector<ksym::Expr> phi0{ksym::parse("sin(t2)", m.vars())};
  const std::vector<ksym::Expr> phidot0{ksym::parse("-cos(t2)", m.vars())};
  for (auto _ : state) benchmark::DoNotOptimize(ksym::integrate_k2_hyperbolic(m, phi0, phidot0, grid));
  state.SetItemsProcessed(state.iterations() * grid.node_count());
}
BENCHMARK(leapfrog_wave)->Arg(157)->Arg(314);

}  // namespace

BENCHMARK_MAIN();
