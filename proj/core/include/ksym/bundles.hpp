#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ksym/expr.hpp"
#include "ksym/forms.hpp"
#include "ksym/var_table.hpp"

namespace ksym {

/// Point of T^1_k Q: base point q and velocities v(i, A) = v^i_A.
struct JetPoint {
  Eigen::VectorXd q;
  Eigen::MatrixXd v;  // n x k

  static JetPoint from_flat(const VarTable& vars, const Eigen::VectorXd& x);
  Eigen::VectorXd flat() const;
};

/// Point of (T^1_k)^*Q: base point q and momenta p(A, i) = p^A_i.
struct CoJetPoint {
  Eigen::VectorXd q;
  Eigen::MatrixXd p;  // k x n

  static CoJetPoint from_flat(const VarTable& vars, const Eigen::VectorXd& x);
  Eigen::VectorXd flat() const;
};

enum class Space { Velocity, Momentum };

/// Tangent vector at a point of T^1_k Q or (T^1_k)^*Q, in the chart order of VarTable.
struct TangentVector {
  Space space = Space::Velocity;
  Eigen::VectorXd base;
  Eigen::VectorXd components;
};

/// Vector field on Q; components depend on the base coordinates only.
class VectorFieldQ {
 public:
  VectorFieldQ(std::vector<Expr> components, const VarTable& vars);

  const std::vector<Expr>& components() const noexcept { return components_; }
  const Expr& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
  int size() const noexcept { return static_cast<int>(components_.size()); }

 private:
  std::vector<Expr> components_;
};

/// k-vector field (X_1, ..., X_k) with symbolic legs on a common chart.
struct KVectorField {
  std::vector<VectorField> legs;
};

/// k-vector field evaluated at one point: legs[A] is X_A in chart order.
using KVectorAt = std::vector<Eigen::VectorXd>;

/// Map between charts given by symbolic components over the source chart.
struct ChartMap {
  Chart source;
  std::vector<Expr> components;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  std::vector<Expr> jacobian_exprs() const;  // row-major
};

/// Diffeomorphism of Q with a user-declared inverse (never inverted symbolically).
struct QDiffeomorphism {
  std::vector<Expr> map;
  std::vector<Expr> inverse;

  /// max |phi(phi^-1(q)) - q| and |phi^-1(phi(q)) - q| over the sample points.
  double inverse_residual(const VarTable& vars, std::span<const Eigen::VectorXd> base_points) const;
};

/// (phi^i(t), d phi^i / d t^A (t)) by symbolic differentiation then evaluation.
JetPoint first_prolongation(const VarTable& vars, std::span<const Expr> phi,
                            std::span<const double> t);

/// Symbolic first jet of phi: result(i, A) = d phi^i / d t^A.
std::vector<std::vector<Expr>> jet_exprs(const VarTable& vars, std::span<const Expr> phi);

TangentVector vertical_lift(const VarTable& vars, const VectorFieldQ& z, int a, const JetPoint& w);
VectorField vertical_lift_field(const VarTable& vars, const VectorFieldQ& z, int a);

/// Canonical k-tangent structure S^A = d/dv^i_A (x) dq^i acting on a tangent vector of T^1_k Q.
TangentVector apply_S(const VarTable& vars, int a, const TangentVector& x);

VectorField complete_lift(const VarTable& vars, const VectorFieldQ& z);
VectorField cotangent_lift(const VarTable& vars, const VectorFieldQ& z);

TangentVector liouville(const VarTable& vars, int a, const JetPoint& w);
VectorField liouville_field(const VarTable& vars, int a);

/// d_T g = v^i_A dg^A/dq^i for g: Q -> R^k.
Expr tulczyjew(const VarTable& vars, std::span<const Expr> g);

struct SopdeCheck {
  bool is_sopde = false;
  double max_residual = 0.0;
};

/// max over samples and A of |S^A(Gamma_A(w)) - Delta_A(w)|_inf; passes at 1e-10.
SopdeCheck sopde_check(const VarTable& vars, const std::function<KVectorAt(const JetPoint&)>& field,
                       std::span<const JetPoint> samples, double tol = 1e-10);
SopdeCheck sopde_check(const VarTable& vars, const KVectorField& field,
                       std::span<const JetPoint> samples, double tol = 1e-10);

/// T^1_k phi: (q, v) -> (phi(q), D phi(q) v).
ChartMap tangent_prolongation(const VarTable& vars, const QDiffeomorphism& phi);
/// (T^1_k)^* phi: (q, p^A) -> (phi(q), p^A o D(phi^-1)(phi(q))).
ChartMap cotangent_prolongation(const VarTable& vars, const QDiffeomorphism& phi);

TangentVector pushforward(const ChartMap& map, const TangentVector& x);

}  // namespace ksym
