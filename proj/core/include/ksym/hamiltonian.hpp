#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ksym/bundles.hpp"
#include "ksym/expr.hpp"
#include "ksym/forms.hpp"
#include "ksym/var_table.hpp"

namespace ksym {

/// Hamiltonian H(q^i, p^A_i) on (T^1_k)^*Q.
class HamiltonianModel {
 public:
  HamiltonianModel(VarTable vars, Expr hamiltonian);

  const VarTable& vars() const noexcept { return vars_; }
  const Expr& hamiltonian() const noexcept { return hamiltonian_; }
  const Chart& chart() const noexcept { return chart_; }

  /// dH in momentum-chart order.
  const OneForm& dH() const noexcept { return dh_; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return dh_compiled_(x); }

 private:
  VarTable vars_;
  Expr hamiltonian_;
  Chart chart_;
  OneForm dh_;
  CompiledExprs dh_compiled_;
};

/// theta^A = p^A_i dq^i
OneForm canonical_theta(const VarTable& vars, int a);
/// omega^A = -d theta^A = dq^i ^ dp^A_i
TwoForm canonical_omega(const VarTable& vars, int a);

struct CanonicalFormsAt {
  Eigen::VectorXd theta;  // coefficients in momentum-chart order
  Eigen::MatrixXd omega;
};

CanonicalFormsAt canonical_forms(const VarTable& vars, int a, const CoJetPoint& w);

/// Map t -> (psi^i(t), psi^A_i(t)); `momenta` is A-major (index A*n + i).
struct CoJetMap {
  std::vector<Expr> base;
  std::vector<Expr> momenta;
};

/// Hamilton-de Donder-Weyl residual: the first n entries are
/// dH/dq^i(psi) + sum_A dpsi^A_i/dt^A, the next n are max_A |dH/dp^A_i(psi) - dpsi^i/dt^A|.
Eigen::VectorXd hdw_residual(const HamiltonianModel& model, const CoJetMap& psi,
                             std::span<const double> t);

/// Canonical solution of sum_A i(X_A) omega^A = dH at w:
/// (X_A)^i = dH/dp^A_i and (X_A)^B_i = -delta^B_A dH/dq^i / k.
KVectorAt ham_kvector(const HamiltonianModel& model, const CoJetPoint& w);
KVectorField ham_kvector_field(const HamiltonianModel& model);

/// sum_A i(X_A) omega^A - dH at w as a covector in momentum-chart order.
Eigen::VectorXd generic_residual(const HamiltonianModel& model, const CoJetPoint& w,
                                 const KVectorAt& x);

}  // namespace ksym
