#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ksym/bundles.hpp"
#include "ksym/expr.hpp"
#include "ksym/forms.hpp"
#include "ksym/var_table.hpp"

namespace ksym {

/// First-order Lagrangian L(q^i, v^i_A) on T^1_k Q.
///
/// Construction rejects Lagrangians that depend on momenta or on the
/// parameters t^A, and precomputes the first and second partial derivatives
/// that the field equations need.
class LagrangianModel {
 public:
  LagrangianModel(VarTable vars, Expr lagrangian);

  const VarTable& vars() const noexcept { return vars_; }
  const Expr& lagrangian() const noexcept { return lagrangian_; }
  const Chart& chart() const noexcept { return chart_; }

  /// dL/dq^i
  const Expr& dq(int i) const { return derivs_->dq[static_cast<std::size_t>(i)]; }
  /// dL/dv^i_A
  const Expr& dv(int i, int a) const { return derivs_->dv[flat_v(i, a)]; }
  /// d^2 L / dv^i_A dv^j_B
  const Expr& dvdv(int i, int a, int j, int b) const {
    return derivs_->dvdv[flat_v(i, a) * nk() + flat_v(j, b)];
  }
  /// d^2 L / dq^j dv^i_A
  const Expr& dqdv(int j, int i, int a) const {
    return derivs_->dqdv[static_cast<std::size_t>(j) * nk() + flat_v(i, a)];
  }

  double eval_at(const Expr& e, const JetPoint& w) const;

  // Numeric derivative blocks at a flat velocity-chart point.
  Eigen::VectorXd grad_q(const Eigen::VectorXd& x) const;   // n
  Eigen::VectorXd grad_v(const Eigen::VectorXd& x) const;   // nk, index i*k + A
  Eigen::MatrixXd hess_vv(const Eigen::VectorXd& x) const;  // nk x nk
  Eigen::MatrixXd hess_qv(const Eigen::VectorXd& x) const;  // n x nk, (j, i*k + A)

 private:
  std::size_t nk() const noexcept { return static_cast<std::size_t>(vars_.n() * vars_.k()); }
  std::size_t flat_v(int i, int a) const noexcept { return static_cast<std::size_t>(i * vars_.k() + a); }

  struct Derivatives {
    std::vector<Expr> dq, dv, dvdv, dqdv;
    CompiledExprs dq_c, dv_c, dvdv_c, dqdv_c;
  };

  VarTable vars_;
  Expr lagrangian_;
  Chart chart_;
  std::shared_ptr<const Derivatives> derivs_;
};

/// theta_L^A = dL/dv^i_A dq^i
OneForm theta_L(const LagrangianModel& model, int a);
/// omega_L^A = -d theta_L^A as a symbolic two-form.
TwoForm omega_L_form(const LagrangianModel& model, int a);
/// omega_L^A = dq^i ^ d(dL/dv^i_A) evaluated at w from second derivatives of L.
Eigen::MatrixXd omega_L(const LagrangianModel& model, int a, const JetPoint& w);

/// E_L = v^i_A dL/dv^i_A - L
Expr energy(const LagrangianModel& model);

struct Hessian {
  Eigen::MatrixXd matrix;  // rows/cols indexed by i*k + A
  double determinant = 0.0;
  bool regular = false;
};

/// Velocity Hessian at w. Regular iff |det| > 1e-10 * max(1, |M|_inf^(nk)).
Hessian hessian(const LagrangianModel& model, const JetPoint& w);

/// FL(q, v) = (q, dL/dv^i_A).
CoJetPoint legendre(const LagrangianModel& model, const JetPoint& w);
ChartMap legendre_map(const LagrangianModel& model);
Eigen::MatrixXd legendre_jacobian(const LagrangianModel& model, const JetPoint& w);

/// Canonical omega^A = dq^i ^ dp^A_i on (T^1_k)^*Q as a constant matrix.
Eigen::MatrixXd canonical_omega_matrix(const VarTable& vars, int a);
/// (FL)^* omega^A at w.
Eigen::MatrixXd legendre_pullback_omega(const LagrangianModel& model, int a, const JetPoint& w);

/// Second parameter derivatives: second[j](A, B) = d^2 phi^j / dt^A dt^B.
using SecondJet = std::vector<Eigen::MatrixXd>;

/// Residual of the local SOPDE equations (dL/dq^j dv^i_A) v^j_A + H (Gamma_A)^j_B - dL/dq^i
/// with (Gamma_A)^j_B = second[j](A, B).
Eigen::VectorXd el_system_residual(const LagrangianModel& model, const JetPoint& w,
                                   const SecondJet& second);

/// Euler-Lagrange residual of phi at t, expanded by the chain rule.
Eigen::VectorXd el_residual(const LagrangianModel& model, std::span<const Expr> phi,
                            std::span<const double> t);

struct SopdeSolution {
  KVectorAt legs;      // Gamma_A in velocity-chart order
  SecondJet vertical;  // vertical[j](A, B) = (Gamma_A)^j_B, symmetric in (A, B)
  double residual = 0.0;
};

/// SOPDE solution of the Lagrangian field equations at w.  The vertical
/// coefficients are the minimum-norm solution within the symmetric subspace.
/// Throws SingularHessian if L is not regular at w.
SopdeSolution sopde_solve(const LagrangianModel& model, const JetPoint& w);

}  // namespace ksym
