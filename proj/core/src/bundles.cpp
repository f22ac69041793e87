#include "ksym/bundles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

using Index = Eigen::Index;

void check_leg(const VarTable& vars, int a) {
  if (a < 0 || a >= vars.k()) {
    throw DimensionMismatch("leg index " + std::to_string(a + 1) + " outside 1.." +
                            std::to_string(vars.k()));
  }
}

Index idx(int i) { return static_cast<Index>(i); }

}  // namespace

JetPoint JetPoint::from_flat(const VarTable& vars, const Eigen::VectorXd& x) {
  if (x.size() != vars.total_dim()) throw DimensionMismatch("JetPoint: wrong flat size");
  JetPoint w{x.head(vars.n()), Eigen::MatrixXd(vars.n(), vars.k())};
  for (int i = 0; i < vars.n(); ++i)
    for (int a = 0; a < vars.k(); ++a) w.v(i, a) = x[idx(vars.velocity_index(i, a))];
  return w;
}

Eigen::VectorXd JetPoint::flat() const {
  const auto n = q.size();
  const auto k = v.cols();
  Eigen::VectorXd x(n + n * k);
  x.head(n) = q;
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < k; ++a) x[n + i * k + a] = v(i, a);
  return x;
}

CoJetPoint CoJetPoint::from_flat(const VarTable& vars, const Eigen::VectorXd& x) {
  if (x.size() != vars.total_dim()) throw DimensionMismatch("CoJetPoint: wrong flat size");
  CoJetPoint w{x.head(vars.n()), Eigen::MatrixXd(vars.k(), vars.n())};
  for (int a = 0; a < vars.k(); ++a)
    for (int i = 0; i < vars.n(); ++i) w.p(a, i) = x[idx(vars.momentum_index(a, i))];
  return w;
}

Eigen::VectorXd CoJetPoint::flat() const {
  const auto n = q.size();
  const auto k = p.rows();
  Eigen::VectorXd x(n + n * k);
  x.head(n) = q;
  for (Index a = 0; a < k; ++a)
    for (Index i = 0; i < n; ++i) x[n + a * n + i] = p(a, i);
  return x;
}

VectorFieldQ::VectorFieldQ(std::vector<Expr> components, const VarTable& vars)
    : components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != vars.n()) {
    throw DimensionMismatch("vector field on Q needs " + std::to_string(vars.n()) + " components");
  }
  for (const auto& c : components_) {
    for (const auto& name : free_variables(c)) {
      if (vars.role(name) != Role::Base) {
        throw DimensionMismatch("vector field on Q depends on '" + name + "'");
      }
    }
  }
}

Eigen::VectorXd ChartMap::operator()(const Eigen::VectorXd& x) const {
  return CompiledExprs(components, source)(x);
}

std::vector<Expr> ChartMap::jacobian_exprs() const {
  std::vector<Expr> out;
  out.reserve(components.size() * source.size());
  for (const auto& c : components)
    for (const auto& s : source) out.push_back(diff(c, s));
  return out;
}

Eigen::MatrixXd ChartMap::jacobian(const Eigen::VectorXd& x) const {
  const auto rows = static_cast<Index>(components.size());
  const auto cols = static_cast<Index>(source.size());
  const auto exprs = jacobian_exprs();
  Eigen::VectorXd flat = CompiledExprs(exprs, source)(x);
  Eigen::MatrixXd j(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) j(r, c) = flat[r * cols + c];
  return j;
}

double QDiffeomorphism::inverse_residual(const VarTable& vars,
                                         std::span<const Eigen::VectorXd> base_points) const {
  const Chart chart = vars.base_chart();
  ChartMap forward{chart, map};
  ChartMap backward{chart, inverse};
  double worst = 0.0;
  for (const auto& q : base_points) {
    worst = std::max(worst, (backward(forward(q)) - q).cwiseAbs().maxCoeff());
    worst = std::max(worst, (forward(backward(q)) - q).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<std::vector<Expr>> jet_exprs(const VarTable& vars, std::span<const Expr> phi) {
  if (static_cast<int>(phi.size()) != vars.n()) throw DimensionMismatch("map needs n components");
  std::vector<std::vector<Expr>> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (int a = 0; a < vars.k(); ++a) out[i].push_back(diff(phi[i], vars.t(a)));
  return out;
}

JetPoint first_prolongation(const VarTable& vars, std::span<const Expr> phi,
                            std::span<const double> t) {
  if (static_cast<int>(t.size()) != vars.k()) throw DimensionMismatch("t needs k entries");
  Bindings b;
  for (int a = 0; a < vars.k(); ++a) b.emplace(vars.t(a), t[static_cast<std::size_t>(a)]);
  const auto jets = jet_exprs(vars, phi);
  JetPoint w{Eigen::VectorXd(vars.n()), Eigen::MatrixXd(vars.n(), vars.k())};
  for (int i = 0; i < vars.n(); ++i) {
    w.q[i] = eval(phi[static_cast<std::size_t>(i)], b);
    for (int a = 0; a < vars.k(); ++a) w.v(i, a) = eval(jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)], b);
  }
  return w;
}

TangentVector vertical_lift(const VarTable& vars, const VectorFieldQ& z, int a, const JetPoint& w) {
  check_leg(vars, a);
  TangentVector out{Space::Velocity, w.flat(), Eigen::VectorXd::Zero(vars.total_dim())};
  Bindings b = chart_bindings(vars.base_chart(), w.q);
  for (int i = 0; i < vars.n(); ++i) out.components[vars.velocity_index(i, a)] = eval(z[i], b);
  return out;
}

VectorField vertical_lift_field(const VarTable& vars, const VectorFieldQ& z, int a) {
  check_leg(vars, a);
  VectorField out{vars.velocity_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.components[static_cast<std::size_t>(vars.velocity_index(i, a))] = z[i];
  return out;
}

TangentVector apply_S(const VarTable& vars, int a, const TangentVector& x) {
  check_leg(vars, a);
  if (x.space != Space::Velocity || x.components.size() != vars.total_dim()) {
    throw DimensionMismatch("S^A acts on tangent vectors of T^1_k Q");
  }
  TangentVector out{Space::Velocity, x.base, Eigen::VectorXd::Zero(vars.total_dim())};
  for (int i = 0; i < vars.n(); ++i) out.components[vars.velocity_index(i, a)] = x.components[i];
  return out;
}

VectorField complete_lift(const VarTable& vars, const VectorFieldQ& z) {
  VectorField out{vars.velocity_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.components[static_cast<std::size_t>(i)] = z[i];
  // v^j_A dZ^i/dq^j on d/dv^i_A
  for (int i = 0; i < vars.n(); ++i) {
    for (int a = 0; a < vars.k(); ++a) {
      Expr acc;
      for (int j = 0; j < vars.n(); ++j) {
        Expr dz = diff(z[i], vars.q(j));
        if (dz.is_zero()) continue;
        acc += Expr::variable(vars.v(j, a)) * dz;
      }
      out.components[static_cast<std::size_t>(vars.velocity_index(i, a))] = acc;
    }
  }
  return out;
}

VectorField cotangent_lift(const VarTable& vars, const VectorFieldQ& z) {
  VectorField out{vars.momentum_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.components[static_cast<std::size_t>(i)] = z[i];
  // -p^A_j dZ^j/dq^i on d/dp^A_i
  for (int a = 0; a < vars.k(); ++a) {
    for (int i = 0; i < vars.n(); ++i) {
      Expr acc;
      for (int j = 0; j < vars.n(); ++j) {
        Expr dz = diff(z[j], vars.q(i));
        if (dz.is_zero()) continue;
        acc += Expr::variable(vars.p(a, j)) * dz;
      }
      out.components[static_cast<std::size_t>(vars.momentum_index(a, i))] = -acc;
    }
  }
  return out;
}

TangentVector liouville(const VarTable& vars, int a, const JetPoint& w) {
  check_leg(vars, a);
  TangentVector out{Space::Velocity, w.flat(), Eigen::VectorXd::Zero(vars.total_dim())};
  for (int i = 0; i < vars.n(); ++i) out.components[vars.velocity_index(i, a)] = w.v(i, a);
  return out;
}

VectorField liouville_field(const VarTable& vars, int a) {
  check_leg(vars, a);
  VectorField out{vars.velocity_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) {
    out.components[static_cast<std::size_t>(vars.velocity_index(i, a))] = Expr::variable(vars.v(i, a));
  }
  return out;
}

Expr tulczyjew(const VarTable& vars, std::span<const Expr> g) {
  if (static_cast<int>(g.size()) != vars.k()) throw DimensionMismatch("d_T needs k components");
  Expr out;
  for (int a = 0; a < vars.k(); ++a) {
    const Expr& ga = g[static_cast<std::size_t>(a)];
    for (const auto& name : free_variables(ga)) {
      if (vars.role(name) != Role::Base) {
        throw DimensionMismatch("d_T: component depends on non-base coordinate '" + name + "'");
      }
    }
    for (int i = 0; i < vars.n(); ++i) {
      Expr dg = diff(ga, vars.q(i));
      if (dg.is_zero()) continue;
      out += Expr::variable(vars.v(i, a)) * dg;
    }
  }
  return out;
}

SopdeCheck sopde_check(const VarTable& vars, const std::function<KVectorAt(const JetPoint&)>& field,
                       std::span<const JetPoint> samples, double tol) {
  SopdeCheck out;
  for (const auto& w : samples) {
    const KVectorAt legs = field(w);
    if (static_cast<int>(legs.size()) != vars.k()) throw DimensionMismatch("k-vector field needs k legs");
    for (int a = 0; a < vars.k(); ++a) {
      TangentVector gamma{Space::Velocity, w.flat(), legs[static_cast<std::size_t>(a)]};
      const auto lhs = apply_S(vars, a, gamma);
      const auto rhs = liouville(vars, a, w);
      out.max_residual = std::max(out.max_residual, (lhs.components - rhs.components).cwiseAbs().maxCoeff());
    }
  }
  out.is_sopde = out.max_residual <= tol;
  return out;
}

SopdeCheck sopde_check(const VarTable& vars, const KVectorField& field,
                       std::span<const JetPoint> samples, double tol) {
  std::vector<CompiledExprs> legs;
  for (const auto& leg : field.legs) legs.emplace_back(leg.components, leg.chart);
  return sopde_check(
      vars,
      [&](const JetPoint& w) {
        KVectorAt out;
        const Eigen::VectorXd x = w.flat();
        for (const auto& leg : legs) out.push_back(leg(x));
        return out;
      },
      samples, tol);
}

ChartMap tangent_prolongation(const VarTable& vars, const QDiffeomorphism& phi) {
  if (static_cast<int>(phi.map.size()) != vars.n()) throw DimensionMismatch("diffeomorphism needs n components");
  ChartMap out{vars.velocity_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.components[static_cast<std::size_t>(i)] = phi.map[static_cast<std::size_t>(i)];
  for (int i = 0; i < vars.n(); ++i) {
    for (int a = 0; a < vars.k(); ++a) {
      Expr acc;
      for (int j = 0; j < vars.n(); ++j) {
        Expr d = diff(phi.map[static_cast<std::size_t>(i)], vars.q(j));
        if (d.is_zero()) continue;
        acc += d * Expr::variable(vars.v(j, a));
      }
      out.components[static_cast<std::size_t>(vars.velocity_index(i, a))] = acc;
    }
  }
  return out;
}

ChartMap cotangent_prolongation(const VarTable& vars, const QDiffeomorphism& phi) {
  if (static_cast<int>(phi.map.size()) != vars.n() || static_cast<int>(phi.inverse.size()) != vars.n()) {
    throw DimensionMismatch("diffeomorphism and inverse need n components");
  }
  std::map<std::string, Expr> at_image;
  for (int i = 0; i < vars.n(); ++i) at_image.emplace(vars.q(i), phi.map[static_cast<std::size_t>(i)]);

  ChartMap out{vars.momentum_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.components[static_cast<std::size_t>(i)] = phi.map[static_cast<std::size_t>(i)];
  for (int a = 0; a < vars.k(); ++a) {
    for (int j = 0; j < vars.n(); ++j) {
      Expr acc;
      for (int i = 0; i < vars.n(); ++i) {
        Expr d = diff(phi.inverse[static_cast<std::size_t>(i)], vars.q(j));
        if (d.is_zero()) continue;
        acc += Expr::variable(vars.p(a, i)) * substitute(d, at_image);
      }
      out.components[static_cast<std::size_t>(vars.momentum_index(a, j))] = acc;
    }
  }
  return out;
}

TangentVector pushforward(const ChartMap& map, const TangentVector& x) {
  return TangentVector{x.space, map(x.base), map.jacobian(x.base) * x.components};
}

}  // namespace ksym
