#include "doctest.h"
#include "ksym/errors.hpp"
#include "ksym/hamiltonian.hpp"
#include "ksym/lagrangian.hpp"
#include "ksym/sampling.hpp"
#include "test_support.hpp"

using namespace ksym;
using ksym::testing::exprs;
using ksym::testing::hamiltonian;
using ksym::testing::max_abs;

namespace {

std::vector<CoJetPoint> cojets(const VarTable& vars, int count, std::uint64_t seed) {
  std::vector<CoJetPoint> out;
  for (const auto& x : sample_points(SampleBox{}, vars.momentum_chart(), count, seed))
    out.push_back(CoJetPoint::from_flat(vars, x));
  return out;
}

std::vector<std::array<double, 2>> times(int count, std::uint64_t seed) {
  std::vector<std::array<double, 2>> out;
  for (const auto& t : sample_points(SampleBox{{-3.0, 3.0}, {}}, std::vector<std::string>{"t1", "t2"}, count, seed))
    out.push_back({t[0], t[1]});
  return out;
}

}  // namespace

TEST_CASE("model construction rejects velocities and parameters") {
  const VarTable vars(1, 2);
  CHECK_THROWS_AS(HamiltonianModel(vars, parse("v1_1*p1_1", vars)), DimensionMismatch);
  CHECK_THROWS_AS(HamiltonianModel(vars, parse("t2", vars)), DimensionMismatch);
}

TEST_CASE("canonical forms") {
  const VarTable vars(1, 2);
  CoJetPoint w{Eigen::VectorXd::Constant(1, 0.2), Eigen::MatrixXd(2, 1)};
  w.p << 3.0, -1.0;
  const CanonicalFormsAt f = canonical_forms(vars, 0, w);
  CHECK(f.theta[0] == 3.0);
  CHECK(f.theta.tail(2).isZero());
  CHECK(f.omega(0, vars.momentum_index(0, 0)) == 1.0);
  CHECK(f.omega(vars.momentum_index(0, 0), 0) == -1.0);

  const VarTable big(2, 3);
  for (const auto& c : cojets(big, 10, 1)) {
    for (int a = 0; a < 3; ++a) {
      const Eigen::MatrixXd omega = canonical_forms(big, a, c).omega;
      CHECK(omega == canonical_forms(big, a, cojets(big, 1, 2).front()).omega);
      const Eigen::MatrixXd dtheta = exterior_derivative(canonical_theta(big, a)).at(c.flat());
      CHECK(max_abs(dtheta + omega) == 0.0);
      CHECK(max_abs(canonical_omega(big, a).at(c.flat()) - omega) == 0.0);
    }
  }
}

TEST_CASE("Hamilton-de Donder-Weyl residuals") {
  const auto free = hamiltonian(1, 2, "(p1_1^2 + p2_1^2)/2");
  const VarTable& vars = free.vars();
  const CoJetMap harmonic{exprs(vars, {"t1*t2"}), exprs(vars, {"t2", "t1"})};
  const CoJetMap constant{exprs(vars, {"1.5"}), exprs(vars, {"0", "0"})};
  const CoJetMap curved{exprs(vars, {"t1^2"}), exprs(vars, {"2*t1", "0"})};
  for (const auto& t : times(20, 3)) {
    CHECK(max_abs(hdw_residual(free, harmonic, t)) <= 1e-12);
    CHECK(max_abs(hdw_residual(free, constant, t)) == 0.0);
    const Eigen::VectorXd r = hdw_residual(free, curved, t);
    CHECK(r[0] == doctest::Approx(2.0));
    CHECK(r[1] == 0.0);
  }
}

TEST_CASE("Hamiltonian residual vanishes on Legendre images of solutions") {
  const auto wave_l = ksym::testing::lagrangian(1, 2, "(v1_1^2 - v1_2^2)/2");
  const auto wave_h = hamiltonian(1, 2, "(p1_1^2 - p2_1^2)/2");
  const VarTable& vars = wave_h.vars();
  const auto phi = exprs(vars, {"sin(t1 - t2)"});
  // p^A = dL/dv_A along phi
  const CoJetMap psi{phi, exprs(vars, {"cos(t1 - t2)", "cos(t1 - t2)"})};
  for (const auto& t : times(30, 4)) {
    CHECK(max_abs(el_residual(wave_l, phi, t)) <= 1e-12);
    CHECK(max_abs(hdw_residual(wave_h, psi, t)) <= 1e-10);
  }
}

TEST_CASE("canonical Hamiltonian k-vector field") {
  const auto free = hamiltonian(1, 2, "(p1_1^2 + p2_1^2)/2");
  CoJetPoint w{Eigen::VectorXd::Constant(1, 0.3), Eigen::MatrixXd(2, 1)};
  w.p << 1.0, 0.0;
  const KVectorAt x = ham_kvector(free, w);
  REQUIRE(x.size() == 2);
  CHECK(x[0][0] == 1.0);
  CHECK(x[1][0] == 0.0);
  CHECK(x[0].tail(2).isZero());
  CHECK(x[1].tail(2).isZero());

  const auto h = hamiltonian(2, 3, "p1_1^2*cos(q2) + p3_2*q1^3 + p2_1*p2_2 + exp(q1*q2)/2");
  const KVectorField field = ham_kvector_field(h);
  for (const auto& c : cojets(h.vars(), 100, 5)) {
    const KVectorAt legs = ham_kvector(h, c);
    CHECK(max_abs(generic_residual(h, c, legs)) <= 1e-12);
    for (int a = 0; a < 3; ++a) CHECK(max_abs(field.legs[static_cast<std::size_t>(a)].at(c.flat()) - legs[static_cast<std::size_t>(a)]) <= 1e-15);
  }
}

TEST_CASE("k = 1 reduces to the classical Hamiltonian vector field") {
  const auto h = hamiltonian(2, 1, "(p1_1^2 + p1_2^2)/2 + q1^2*q2 - q2^3/3");
  const VarTable& vars = h.vars();
  const Eigen::MatrixXd omega = canonical_omega_matrix(vars, 0);
  for (const auto& c : cojets(vars, 50, 6)) {
    const Eigen::VectorXd dh = h.gradient(c.flat());
    // Direct 2n x 2n solve of omega^T X = dH.
    const Eigen::VectorXd direct = omega.transpose().fullPivLu().solve(dh);
    const Eigen::VectorXd x = ham_kvector(h, c).front();
    CHECK(max_abs(x - direct) <= 1e-12);
    CHECK(x[0] == doctest::Approx(dh[2]));
    CHECK(x[2] == doctest::Approx(-dh[0]));
  }
}
