#include <cmath>

#include "doctest.h"
#include "ksym/errors.hpp"
#include "ksym/lagrangian.hpp"
#include "ksym/sampling.hpp"
#include "test_support.hpp"

using namespace ksym;
using ksym::testing::exprs;
using ksym::testing::lagrangian;
using ksym::testing::max_abs;

namespace {

std::vector<JetPoint> jets(const VarTable& vars, int count, std::uint64_t seed) {
  std::vector<JetPoint> out;
  for (const auto& x : sample_points(SampleBox{}, vars.velocity_chart(), count, seed))
    out.push_back(JetPoint::from_flat(vars, x));
  return out;
}

}  // namespace

TEST_CASE("model construction rejects foreign coordinates") {
  const VarTable vars(1, 2);
  CHECK_THROWS_AS(LagrangianModel(vars, parse("p1_1*v1_1", vars)), DimensionMismatch);
  CHECK_THROWS_AS(LagrangianModel(vars, parse("t1*v1_1", vars)), DimensionMismatch);
}

TEST_CASE("Cartan one-forms") {
  const auto free = lagrangian(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2");
  for (const auto& w : jets(free.vars(), 5, 0)) {
    for (int a = 0; a < 2; ++a) {
      const Eigen::VectorXd th = theta_L(free, a).at(w.flat());
      CHECK(th[0] == w.v(0, a));
      CHECK(th[1] == w.v(1, a));
      CHECK(th.tail(4).isZero());
    }
  }
  const auto vfree = lagrangian(1, 2, "sin(q1)");
  for (const auto& c : theta_L(vfree, 1).coefficients) CHECK(c.is_zero());

  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  const Bindings b{{"v1_1", 0.7}, {"v1_2", -1.3}};
  CHECK(eval(theta_L(wave, 0).coefficients[0], b) == doctest::Approx(0.7));
  CHECK(eval(theta_L(wave, 1).coefficients[0], b) == doctest::Approx(1.3));
}

TEST_CASE("Cartan two-forms") {
  const auto free = lagrangian(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2");
  const VarTable& vars = free.vars();
  for (const auto& w : jets(vars, 10, 1)) {
    for (int a = 0; a < 2; ++a) {
      const Eigen::MatrixXd m = omega_L(free, a, w);
      for (int i = 0; i < 2; ++i) {
        CHECK(m(i, vars.velocity_index(i, a)) == 1.0);
        CHECK(m(vars.velocity_index(i, a), i) == -1.0);
      }
      CHECK(max_abs(m.topLeftCorner(2, 2)) == 0.0);
      CHECK(max_abs(m.cwiseAbs()) == 1.0);
      CHECK(max_abs(m + m.transpose()) == 0.0);
    }
  }

  // L = q v: d(dL/dv) = dq, so omega_L = dq ^ dq = 0.
  const auto qv = lagrangian(1, 1, "q1*v1_1");
  const JetPoint w{Eigen::VectorXd::Constant(1, 0.4), Eigen::MatrixXd::Constant(1, 1, -2.0)};
  CHECK(max_abs(omega_L(qv, 0, w)) == 0.0);

  for (const auto& f : ksym::testing::regular_lagrangians()) {
    const auto model = ksym::testing::build(f);
    for (const auto& p : jets(model.vars(), 20, 2)) {
      for (int a = 0; a < f.k; ++a) {
        const Eigen::MatrixXd local = omega_L(model, a, p);
        CHECK(max_abs(local + local.transpose()) == 0.0);
        CHECK(max_abs(omega_L_form(model, a).at(p.flat()) - local) <= 1e-12);
      }
    }
  }
}

TEST_CASE("energy") {
  const auto free = lagrangian(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2");
  const auto field = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2 - cos(q1)");
  const auto affine = lagrangian(2, 2, "q2*v1_1 + q1*v2_2 + exp(q1)*v2_1 + q1^2*q2");
  for (const auto& w : jets(free.vars(), 20, 3)) {
    CHECK(free.eval_at(energy(free), w) == doctest::Approx(free.eval_at(free.lagrangian(), w)));
    const double f = w.q[0] * w.q[0] * w.q[1];
    CHECK(std::abs(affine.eval_at(energy(affine), w) + f) <= 1e-12);
  }
  for (const auto& w : jets(field.vars(), 20, 4)) {
    const double expected = 0.5 * (w.v(0, 0) * w.v(0, 0) - w.v(0, 1) * w.v(0, 1)) + std::cos(w.q[0]);
    CHECK(field.eval_at(energy(field), w) == doctest::Approx(expected));
  }
}

TEST_CASE("velocity Hessian and regularity") {
  const auto free = lagrangian(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2");
  const JetPoint w0 = jets(free.vars(), 1, 5).front();
  const Hessian h = hessian(free, w0);
  CHECK(h.matrix.isIdentity());
  CHECK(h.regular);

  const auto cross = lagrangian(1, 2, "v1_1*v1_2");
  const JetPoint w1 = jets(cross.vars(), 1, 6).front();
  const Hessian hc = hessian(cross, w1);
  CHECK(hc.matrix(0, 1) == 1.0);
  CHECK(hc.matrix(1, 0) == 1.0);
  CHECK(hc.determinant == doctest::Approx(-1.0));
  CHECK(hc.regular);

  const auto linear = lagrangian(1, 2, "v1_1");
  const Hessian hl = hessian(linear, w1);
  CHECK(hl.matrix.isZero());
  CHECK_FALSE(hl.regular);
  CHECK_THROWS_AS(sopde_solve(linear, w1), SingularHessian);
}

TEST_CASE("regularity matches invertibility of the Legendre map") {
  const std::vector<ksym::testing::NamedLagrangian> models{
      {"quartic", 1, 2, "v1_1^4/12 + v1_2^2/2"},
      {"mixed", 2, 1, "v1_1*v2_1 + q1*v1_1^2"},
      {"degenerate", 2, 1, "(v1_1 + v2_1)^2/2"},
  };
  for (const auto& f : models) {
    const auto model = ksym::testing::build(f);
    for (const auto& w : jets(model.vars(), 30, 7)) {
      const Hessian h = hessian(model, w);
      const Eigen::MatrixXd j = legendre_jacobian(model, w);
      const bool invertible = std::abs(j.determinant()) > 1e-8;
      CHECK(h.regular == invertible);
    }
  }
}

TEST_CASE("Legendre map") {
  const auto free = lagrangian(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2");
  for (const auto& w : jets(free.vars(), 10, 8)) {
    const CoJetPoint c = legendre(free, w);
    CHECK(c.q == w.q);
    CHECK(max_abs(c.p - w.v.transpose()) == 0.0);
  }
  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  for (const auto& w : jets(wave.vars(), 10, 9)) {
    const CoJetPoint c = legendre(wave, w);
    CHECK(c.p(0, 0) == w.v(0, 0));
    CHECK(c.p(1, 0) == -w.v(0, 1));
  }
}

TEST_CASE("Legendre pullback of the canonical forms") {
  for (const auto& f : ksym::testing::regular_lagrangians()) {
    const auto model = ksym::testing::build(f);
    for (const auto& w : jets(model.vars(), 100, 10)) {
      for (int a = 0; a < f.k; ++a) {
        CHECK(max_abs(legendre_pullback_omega(model, a, w) - omega_L(model, a, w)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("Euler-Lagrange residuals") {
  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  const auto free = lagrangian(1, 2, "(v1_1^2 + v1_2^2)/2");
  const VarTable& vars = wave.vars();
  for (const auto& t : sample_points(SampleBox{{-3.0, 3.0}, {}}, vars.parameter_chart(), 20, 11)) {
    const double tt[] = {t[0], t[1]};
    CHECK(max_abs(el_residual(wave, exprs(vars, {"sin(t1 - t2)"}), tt)) <= 1e-12);
    CHECK(max_abs(el_residual(free, exprs(vars, {"t1 + t2"}), tt)) <= 1e-12);
    CHECK(el_residual(free, exprs(vars, {"t1^2"}), tt)[0] == doctest::Approx(2.0));
  }
}

TEST_CASE("solutions satisfy the second-order system") {
  const auto wave = lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  const VarTable& vars = wave.vars();
  const auto phi = exprs(vars, {"sin(t1 - t2)"});
  for (const auto& t : sample_points(SampleBox{}, vars.parameter_chart(), 20, 12)) {
    const double tt[] = {t[0], t[1]};
    const JetPoint w = first_prolongation(vars, phi, tt);
    SecondJet second{Eigen::MatrixXd(2, 2)};
    const double s = -std::sin(t[0] - t[1]);
    second[0] << s, -s, -s, s;
    CHECK(max_abs(el_system_residual(wave, w, second)) <= 1e-9);
  }
}

TEST_CASE("SOPDE solutions") {
  const auto free = lagrangian(2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2");
  for (const auto& w : jets(free.vars(), 20, 13)) {
    const SopdeSolution s = sopde_solve(free, w);
    for (const auto& m : s.vertical) CHECK(max_abs(m) <= 1e-14);
    CHECK(s.residual <= 1e-12);
  }

  const auto pendulum = lagrangian(1, 1, "v1_1^2/2 + cos(q1)");
  for (const auto& w : jets(pendulum.vars(), 20, 14)) {
    const SopdeSolution s = sopde_solve(pendulum, w);
    CHECK(s.vertical[0](0, 0) == doctest::Approx(-std::sin(w.q[0])));
    CHECK(s.legs[0][0] == w.v(0, 0));
  }

  for (const auto& f : ksym::testing::regular_lagrangians()) {
    const auto model = ksym::testing::build(f);
    const auto samples = jets(model.vars(), 100, 15);
    for (const auto& w : samples) {
      const SopdeSolution s = sopde_solve(model, w);
      CHECK(s.residual <= 1e-9);
      for (const auto& m : s.vertical) CHECK(max_abs(m - m.transpose()) == 0.0);
    }
    const auto check = sopde_check(
        model.vars(), [&](const JetPoint& w) { return sopde_solve(model, w).legs; }, samples);
    CHECK(check.is_sopde);
    CHECK(check.max_residual <= 1e-10);
  }
}

TEST_CASE("SOPDE solution is minimum-norm among symmetric solutions") {
  const auto model = lagrangian(2, 2, "(v1_1^2 - v1_2^2 + 2*v2_1^2 + v2_2^2)/2 + q1*q2*v1_1 - q2^3/3");
  const VarTable& vars = model.vars();
  // Symmetric unknowns per component j: (1,1), (1,2) = (2,1), (2,2).
  auto unpack = [](const Eigen::VectorXd& u) {
    SecondJet d(2, Eigen::MatrixXd(2, 2));
    for (int j = 0; j < 2; ++j) d[static_cast<std::size_t>(j)] << u[3 * j], u[3 * j + 1], u[3 * j + 1], u[3 * j + 2];
    return d;
  };
  auto norm2 = [](const SecondJet& d) {
    double s = 0.0;
    for (const auto& m : d) s += m.squaredNorm();
    return s;
  };
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (const auto& w : jets(vars, 10, 16)) {
    const SopdeSolution s = sopde_solve(model, w);
    const Eigen::VectorXd r0 = el_system_residual(model, w, s.vertical);
    Eigen::MatrixXd system(2, 6);
    for (int c = 0; c < 6; ++c) {
      SecondJet moved = s.vertical;
      const SecondJet e = unpack(Eigen::VectorXd::Unit(6, c));
      for (std::size_t j = 0; j < 2; ++j) moved[j] += e[j];
      system.col(c) = el_system_residual(model, w, moved) - r0;
    }
    const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(system).kernel();
    REQUIRE(kernel.cols() == 4);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd coeffs(kernel.cols());
      for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs[i] = g(rng);
      SecondJet other = s.vertical;
      const SecondJet d = unpack(kernel * coeffs);
      for (std::size_t j = 0; j < 2; ++j) other[j] += d[j];
      CHECK(max_abs(el_system_residual(model, w, other)) <= 1e-9);
      CHECK(norm2(other) > norm2(s.vertical));
    }
  }
}
