#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ksym/expr.hpp"
#include "ksym/hamiltonian.hpp"
#include "ksym/lagrangian.hpp"
#include "ksym/var_table.hpp"

namespace ksym::testing {

inline LagrangianModel lagrangian(int n, int k, std::string_view src, std::map<std::string, double> constants = {}) {
  VarTable vars(n, k, std::move(constants));
  Expr l = parse(src, vars);
  return LagrangianModel(std::move(vars), std::move(l));
}

inline HamiltonianModel hamiltonian(int n, int k, std::string_view src) {
  VarTable vars(n, k);
  Expr h = parse(src, vars);
  return HamiltonianModel(std::move(vars), std::move(h));
}

inline std::vector<Expr> exprs(const VarTable& vars, std::initializer_list<std::string_view> sources) {
  std::vector<Expr> out;
  for (auto s : sources) out.push_back(parse(s, vars));
  return out;
}

struct NamedLagrangian {
  std::string name;
  int n;
  int k;
  std::string source;
};

/// Regular Lagrangians shared by the unit and acceptance suites.
inline std::vector<NamedLagrangian> regular_lagrangians() {
  return {
      {"free", 2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2"},
      {"wave", 1, 2, "(v1_1^2 - v1_2^2)/2"},
      {"klein-gordon", 1, 2, "(v1_1^2 - v1_2^2)/2 - q1^2/2"},
      {"rotational", 2, 2, "(v1_1^2 + v1_2^2 + v2_1^2 + v2_2^2)/2 - (q1^2 + q2^2)^2/4"},
      {"gauge-shifted", 1, 2, "(v1_1^2 - v1_2^2)/2 + cos(q1)*v1_1 + 2*v1_2 + 3"},
  };
}

inline LagrangianModel build(const NamedLagrangian& f) { return lagrangian(f.n, f.k, f.source); }

/// Random expression over `names` whose evaluation stays finite on [-2, 2]^d.
class ExprGenerator {
 public:
  ExprGenerator(std::vector<std::string> names, std::uint64_t seed) : names_(std::move(names)), rng_(seed) {}

  Expr polynomial(int depth) { return build(depth, false); }
  Expr smooth(int depth) { return build(depth, true); }

  /// Any AST shape, including ones that may be undefined somewhere.
  Expr wild(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    switch (pick(12)) {
      case 0: return wild(depth - 1) + wild(depth - 1);
      case 1: return wild(depth - 1) - wild(depth - 1);
      case 2: return wild(depth - 1) * wild(depth - 1);
      case 3: return wild(depth - 1) / wild(depth - 1);
      case 4: return -wild(depth - 1);
      case 5: return pow(wild(depth - 1), pick(7) - 3);
      case 6: return sin(wild(depth - 1));
      case 7: return cos(wild(depth - 1));
      case 8: return exp(wild(depth - 1));
      case 9: return log(wild(depth - 1));
      case 10: return sqrt(wild(depth - 1));
      default: return Expr(uniform(-1e3, 1e3));
    }
  }

  /// Sum of `terms` monomials of total degree <= `degree` with coefficients in [-2, 2].
  Expr polynomial_of_degree(int degree, int terms = 4) {
    Expr sum;
    for (int t = 0; t < terms; ++t) {
      Expr term(uniform(-2.0, 2.0));
      const int d = pick(degree + 1);
      for (int j = 0; j < d; ++j) term = term * Expr::variable(name(pick(static_cast<int>(names_.size()))));
      sum += term;
    }
    return sum;
  }

  Eigen::VectorXd point(double lo = -2.0, double hi = 2.0) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(names_.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = uniform(lo, hi);
    return x;
  }

  Bindings bindings(const Eigen::VectorXd& x) const {
    Bindings b;
    for (std::size_t i = 0; i < names_.size(); ++i) b[names_[i]] = x[static_cast<Eigen::Index>(i)];
    return b;
  }

  const std::string& name(int i) { return names_[static_cast<std::size_t>(i)]; }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  Expr leaf() {
    if (pick(3) == 0) return Expr(std::round(uniform(-3.0, 3.0) * 4.0) / 4.0);
    return Expr::variable(names_[static_cast<std::size_t>(pick(static_cast<int>(names_.size())))]);
  }

  Expr build(int depth, bool transcendental) {
    if (depth == 0 || pick(4) == 0) return leaf();
    const int choices = transcendental ? 10 : 5;
    switch (pick(choices)) {
      case 0: return build(depth - 1, transcendental) + build(depth - 1, transcendental);
      case 1: return build(depth - 1, transcendental) - build(depth - 1, transcendental);
      case 2:
      case 3: return build(depth - 1, transcendental) * build(depth - 1, transcendental);
      case 4: return pow(build(depth - 1, transcendental), 1 + pick(3));
      case 5: return sin(build(depth - 1, transcendental));
      case 6: return cos(build(depth - 1, transcendental));
      case 7: return exp(sin(build(depth - 1, transcendental)));
      case 8: return log(Expr(2.0) + cos(build(depth - 1, transcendental)));
      default: return build(depth - 1, transcendental) / (Expr(2.0) + sin(build(depth - 1, transcendental)));
    }
  }

  std::vector<std::string> names_;
  std::mt19937_64 rng_;
};

/// Fourth-order centered difference of e along `name`.
inline double centered_difference(const Expr& e, Bindings b, const std::string& name, double h = 1e-3) {
  const double x = b.at(name);
  auto at = [&](double s) {
    b[name] = x + s * h;
    return eval(e, b);
  };
  return (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
}

/// Second-order centered difference of e along `name`.
inline double simple_difference(const Expr& e, Bindings b, const std::string& name, double h = 1e-5) {
  const double x = b.at(name);
  b[name] = x + h;
  const double up = eval(e, b);
  b[name] = x - h;
  return (up - eval(e, b)) / (2.0 * h);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace ksym::testing
