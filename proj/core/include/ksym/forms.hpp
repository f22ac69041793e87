#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ksym/expr.hpp"

namespace ksym {

/// Ordered coordinate names of a global chart; points are Eigen vectors in this order.
using Chart = std::vector<std::string>;

Bindings chart_bindings(const Chart& chart, const Eigen::VectorXd& x);

/// Several expressions compiled against one chart and evaluated together.
class CompiledExprs {
 public:
  CompiledExprs() = default;
  CompiledExprs(std::span<const Expr> exprs, const Chart& chart);

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  double operator()(std::size_t i, const Eigen::VectorXd& x) const;
  std::size_t size() const noexcept { return compiled_.size(); }

 private:
  std::vector<CompiledExpr> compiled_;
};

/// Vector field with symbolic components over a chart.
struct VectorField {
  Chart chart;
  std::vector<Expr> components;

  /// Directional derivative Y(f) = Y^a df/dx^a.
  Expr apply(const Expr& f) const;
  Eigen::VectorXd at(const Eigen::VectorXd& x) const;
};

VectorField lie_bracket(const VectorField& x, const VectorField& y);
VectorField linear_combination(double a, const VectorField& x, double b, const VectorField& y);

struct OneForm {
  Chart chart;
  std::vector<Expr> coefficients;

  Eigen::VectorXd at(const Eigen::VectorXd& x) const;
};

/// Two-form stored as a full antisymmetric coefficient matrix, with
/// w(X, Y) = w_ab X^a Y^b, so that (a wedge b)_ab = a_a b_b - a_b b_a.
struct TwoForm {
  Chart chart;
  std::vector<Expr> entries;  // row-major dim x dim

  std::size_t dim() const noexcept { return chart.size(); }
  const Expr& entry(std::size_t a, std::size_t b) const { return entries[a * dim() + b]; }
  Eigen::MatrixXd at(const Eigen::VectorXd& x) const;
};

TwoForm zero_two_form(const Chart& chart);
OneForm exterior_derivative(const Expr& f, const Chart& chart);
TwoForm exterior_derivative(const OneForm& alpha);
TwoForm wedge(const OneForm& a, const OneForm& b);

/// i(Y) alpha
Expr interior(const VectorField& y, const OneForm& alpha);
/// i(Y) w, the one-form w(Y, .)
OneForm interior(const VectorField& y, const TwoForm& w);
/// i(Y) dw, without materialising the three-form dw.
TwoForm interior_of_derivative(const VectorField& y, const TwoForm& w);

/// Lie derivatives via Cartan's formula L(Y) = d i(Y) + i(Y) d.
OneForm lie_derivative(const VectorField& y, const OneForm& alpha);
TwoForm lie_derivative(const VectorField& y, const TwoForm& w);

/// Numeric contraction helpers at a point.
inline Eigen::VectorXd contract(const Eigen::MatrixXd& w, const Eigen::VectorXd& y) {
  return w.transpose() * y;
}

}  // namespace ksym
