#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "ksym/errors.hpp"
#include "ksym/solver.hpp"
#include "test_support.hpp"

using namespace ksym;
using ksym::testing::exprs;
using ksym::testing::lagrangian;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

GridSpec line(double t_max, double h) { return GridSpec({GridAxis{0.0, t_max, h, false}}); }

GridSpec strip(double t_max, double h1, int periodic_nodes) {
  return GridSpec({GridAxis{0.0, t_max, h1, false}, GridAxis{0.0, kTwoPi, kTwoPi / periodic_nodes, true}});
}

double energy_drift(const LagrangianModel& model, const SolutionGrid& sol) {
  const Expr e = energy(model);
  const int last = sol.grid.node_count() - 1;
  auto at = [&](int node) {
    const JetPoint w{Eigen::VectorXd::Constant(1, sol.value(node, 0)),
                     Eigen::MatrixXd::Constant(1, 1, sol.state_velocity[static_cast<std::size_t>(node)])};
    return model.eval_at(e, w);
  };
  return std::abs(at(last) - at(0));
}

Eigen::VectorXd scalar(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("grid validation") {
  CHECK(line(1.0, 0.1).axis(0).nodes() == 11);
  CHECK(strip(1.0, 0.1, 10).axis(1).nodes() == 10);
  CHECK(strip(1.0, 0.1, 10).node_count() == 110);
  CHECK_THROWS_AS(line(1.0, 0.3), SolverError);
  CHECK_THROWS_AS(line(1.0, -0.1), SolverError);
  CHECK_THROWS_AS(GridSpec({GridAxis{0.0, 1.0, 0.1, true}}), SolverError);
  CHECK_THROWS_AS(GridSpec({GridAxis{0.0, 1.0, 0.1, false}, GridAxis{0.0, 1.0, 0.1, false}}), SolverError);

  const GridSpec g = strip(1.0, 0.1, 10);
  for (int node = 0; node < g.node_count(); ++node) {
    const auto idx = g.multi_index(node);
    CHECK(g.node(idx[0], idx[1]) == node);
  }
  CHECK(g.refined(2).node_count() == 21 * 20);
}

TEST_CASE("RK4 on the harmonic oscillator closes the orbit") {
  const auto ho = lagrangian(1, 1, "v1_1^2/2 - q1^2/2");
  const SolutionGrid sol = integrate_k1(ho, scalar(1.0), scalar(0.0), line(kTwoPi, kTwoPi / 6284));
  CHECK(std::abs(sol.value(sol.grid.node_count() - 1, 0) - 1.0) <= 1e-8);
  CHECK(solution_error(ho.vars(), sol, exprs(ho.vars(), {"cos(t1)"})) <= 1e-8);
}

TEST_CASE("RK4 reproduces free motion to rounding") {
  const auto free = lagrangian(1, 1, "v1_1^2/2");
  const SolutionGrid sol = integrate_k1(free, scalar(0.5), scalar(-2.0), line(3.0, 0.01));
  CHECK(solution_error(free.vars(), sol, exprs(free.vars(), {"0.5 - 2*t1"})) <= 1e-12);
}

TEST_CASE("RK4 convergence orders") {
  const auto ho = lagrangian(1, 1, "v1_1^2/2 - q1^2/2");
  const auto exact = exprs(ho.vars(), {"cos(t1)"});
  const double e1 = solution_error(ho.vars(), integrate_k1(ho, scalar(1.0), scalar(0.0), line(1.0, 0.05)), exact);
  const double e2 = solution_error(ho.vars(), integrate_k1(ho, scalar(1.0), scalar(0.0), line(1.0, 0.025)), exact);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));

  // Energy drift of a nonlinear pendulum decays at fourth order.
  const auto pendulum = lagrangian(1, 1, "v1_1^2/2 + cos(q1)");
  const double d1 = energy_drift(pendulum, integrate_k1(pendulum, scalar(1.0), scalar(0.0), line(1.0, 0.025)));
  const double d2 = energy_drift(pendulum, integrate_k1(pendulum, scalar(1.0), scalar(0.0), line(1.0, 0.0125)));
  CHECK(d1 / d2 == doctest::Approx(16.0).epsilon(0.2));

  // For the linear oscillator the h^4 drift term cancels: |R(iy)|^2 = 1 - y^6/72 per step.
  const double o1 = energy_drift(ho, integrate_k1(ho, scalar(1.0), scalar(0.0), line(1.0, 0.025)));
  const double o2 = energy_drift(ho, integrate_k1(ho, scalar(1.0), scalar(0.0), line(1.0, 0.0125)));
  CHECK(o1 / o2 == doctest::Approx(32.0).epsilon(0.2));
}

TEST_CASE("integrate_k1 preconditions") {
  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  CHECK_THROWS_AS(integrate_k1(wave, scalar(0), scalar(0), line(1.0, 0.1)), SolverError);
  const auto singular = lagrangian(1, 1, "v1_1^3");
  CHECK_THROWS_AS(integrate_k1(singular, scalar(0), scalar(0), line(1.0, 0.1)), SingularHessian);
  const auto blowup = lagrangian(1, 1, "v1_1^2/2 + exp(q1^2)");
  CHECK_THROWS(integrate_k1(blowup, scalar(5.0), scalar(5.0), line(10.0, 0.1)));
}

TEST_CASE("leapfrog on the wave equation is second order") {
  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  const VarTable& vars = wave.vars();
  const auto phi0 = exprs(vars, {"sin(t2)"});
  const auto phidot0 = exprs(vars, {"-cos(t2)"});
  const auto exact = exprs(vars, {"sin(t2 - t1)"});
  const SolutionGrid coarse = integrate_k2_hyperbolic(wave, phi0, phidot0, strip(1.0, 0.01, 314));
  const SolutionGrid fine = integrate_k2_hyperbolic(wave, phi0, phidot0, strip(1.0, 0.005, 628));
  const double e1 = solution_error(vars, coarse, exact);
  const double e2 = solution_error(vars, fine, exact);
  CHECK(e1 <= 1e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  CHECK(coarse.warnings.empty());

  // Stored jets are exactly the grid stencil.
  CHECK(finite_difference_jets(coarse.grid, 1, coarse.values) == coarse.jets);

  const auto zero = exprs(vars, {"0"});
  const SolutionGrid rest = integrate_k2_hyperbolic(wave, zero, zero, strip(1.0, 0.05, 40));
  for (double v : rest.values) CHECK(v == 0.0);
}

TEST_CASE("leapfrog reproduces the Klein-Gordon dispersion relation") {
  const auto kg = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2 - m^2*q1^2/2", {{"m", 1.0}});
  const VarTable& vars = kg.vars();
  const SolutionGrid sol =
      integrate_k2_hyperbolic(kg, exprs(vars, {"cos(t2)"}), exprs(vars, {"0"}), strip(10.0, 0.01, 314));
  // phi(t, 0) = cos(omega t); locate the first two zero crossings.
  std::vector<double> crossings;
  const int nt = sol.grid.axis(0).nodes();
  for (int it = 0; it + 1 < nt && crossings.size() < 2; ++it) {
    const double a = sol.value(sol.grid.node(it, 0), 0);
    const double b = sol.value(sol.grid.node(it + 1, 0), 0);
    if ((a > 0) != (b > 0)) crossings.push_back(sol.grid.axis(0).coord(it) + 0.01 * a / (a - b));
  }
  REQUIRE(crossings.size() == 2);
  const double omega = std::numbers::pi / (crossings[1] - crossings[0]);
  CHECK(std::abs(omega * omega - 2.0) <= 1e-2);
}

TEST_CASE("hyperbolicity checks") {
  CHECK_THROWS_AS(hyperbolic_system(lagrangian(1, 2, "(v1_1^2 + v1_2^2)/2")), SolverError);
  CHECK_THROWS_AS(hyperbolic_system(lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2 + q1^4")), SolverError);
  CHECK_THROWS_AS(hyperbolic_system(lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2 + v1_1*v1_2")), SolverError);
  CHECK_THROWS_AS(hyperbolic_system(lagrangian(2, 2, "(v1_1^2 - v1_2^2 + v2_1^2 - v2_2^2)/2 + q1*v2_1")),
                  SolverError);
  CHECK_THROWS_AS(hyperbolic_system(lagrangian(1, 2, "-(v1_1^2 - v1_2^2)/2")), SolverError);
  CHECK_THROWS_AS(hyperbolic_system(lagrangian(1, 1, "v1_1^2/2")), SolverError);

  // Gauge terms in q-v_1 and q-v_2 are admissible.
  const HyperbolicSystem sys =
      hyperbolic_system(lagrangian(1, 2, "(v1_1^2 - 4*v1_2^2)/2 + 3*q1*v1_1 + q1*v1_2 - q1^2/2"));
  CHECK(sys.wave_speed == doctest::Approx(2.0));
  CHECK(sys.k(0, 0) == -1.0);

  const auto fast = lagrangian(1, 2, "(v1_1^2 - 9*v1_2^2)/2");
  const auto zero = exprs(fast.vars(), {"0"});
  const SolutionGrid sol = integrate_k2_hyperbolic(fast, zero, zero, strip(0.1, 0.01, 314));
  REQUIRE(sol.warnings.size() == 1);
  CHECK(sol.warnings.front().find("CFL") != std::string::npos);
}

TEST_CASE("current traces") {
  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  const VarTable& vars = wave.vars();
  const double h = 0.01;
  const SolutionGrid sol =
      integrate_k2_hyperbolic(wave, exprs(vars, {"sin(t2)"}), exprs(vars, {"-cos(t2)"}), strip(1.0, h, 314));
  const double h2 = sol.grid.axis(1).step;
  const CurrentTrace momentum = evaluate_current(vars, exprs(vars, {"v1_1", "-v1_2"}), sol, Side::Lagrangian);
  CHECK(momentum.max_divergence <= 5.0 * h2 * h2);

  const CurrentTrace constant = evaluate_current(vars, exprs(vars, {"2", "-3"}), sol, Side::Lagrangian);
  CHECK(constant.max_divergence == 0.0);

  const CurrentTrace position = evaluate_current(vars, exprs(vars, {"q1", "0"}), sol, Side::Lagrangian);
  CHECK(position.max_divergence >= 0.5);
  CHECK(std::isnan(position.divergence.front()));
  CHECK(position.interior.front() == 0);

  const CurrentTrace ham = evaluate_current(vars, exprs(vars, {"p1_1", "p2_1"}), sol, Side::Hamiltonian, &wave);
  CHECK(ham.max_divergence == doctest::Approx(momentum.max_divergence));
  CHECK_THROWS_AS(evaluate_current(vars, exprs(vars, {"p1_1", "p2_1"}), sol, Side::Hamiltonian), Error);

  std::ostringstream csv;
  write_csv(csv, vars, sol, &momentum);
  std::string header;
  std::getline(std::istringstream(csv.str()), header);
  CHECK(header == "t1,t2,q1,v1_1,v1_2,F1,F2,divergence,interior");
}
