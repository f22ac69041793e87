#include "ksym/lagrangian.hpp"

#include <cmath>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

using Index = Eigen::Index;

Eigen::MatrixXd reshape(const Eigen::VectorXd& flat, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  return m;
}

}  // namespace

LagrangianModel::LagrangianModel(VarTable vars, Expr lagrangian)
    : vars_(std::move(vars)), lagrangian_(std::move(lagrangian)), chart_(vars_.velocity_chart()) {
  for (const auto& name : free_variables(lagrangian_)) {
    const auto role = vars_.role(name);
    if (role != Role::Base && role != Role::Velocity) {
      throw DimensionMismatch("Lagrangian may depend on q and v only, found '" + name + "'");
    }
  }
  const int n = vars_.n();
  const int k = vars_.k();
  auto d = std::make_shared<Derivatives>();
  for (int i = 0; i < n; ++i) d->dq.push_back(diff(lagrangian_, vars_.q(i)));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) d->dv.push_back(diff(lagrangian_, vars_.v(i, a)));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a)
      for (int j = 0; j < n; ++j)
        for (int b = 0; b < k; ++b) d->dvdv.push_back(diff(d->dv[flat_v(i, a)], vars_.v(j, b)));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < k; ++a) d->dqdv.push_back(diff(d->dv[flat_v(i, a)], vars_.q(j)));
  d->dq_c = CompiledExprs(d->dq, chart_);
  d->dv_c = CompiledExprs(d->dv, chart_);
  d->dvdv_c = CompiledExprs(d->dvdv, chart_);
  d->dqdv_c = CompiledExprs(d->dqdv, chart_);
  derivs_ = std::move(d);
}

double LagrangianModel::eval_at(const Expr& e, const JetPoint& w) const {
  return eval(e, chart_bindings(chart_, w.flat()));
}

Eigen::VectorXd LagrangianModel::grad_q(const Eigen::VectorXd& x) const { return derivs_->dq_c(x); }
Eigen::VectorXd LagrangianModel::grad_v(const Eigen::VectorXd& x) const { return derivs_->dv_c(x); }

Eigen::MatrixXd LagrangianModel::hess_vv(const Eigen::VectorXd& x) const {
  const auto m = static_cast<Index>(nk());
  return reshape(derivs_->dvdv_c(x), m, m);
}

Eigen::MatrixXd LagrangianModel::hess_qv(const Eigen::VectorXd& x) const {
  return reshape(derivs_->dqdv_c(x), vars_.n(), static_cast<Index>(nk()));
}

OneForm theta_L(const LagrangianModel& model, int a) {
  const auto& vars = model.vars();
  if (a < 0 || a >= vars.k()) throw DimensionMismatch("leg index out of range");
  OneForm out{model.chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.coefficients[static_cast<std::size_t>(i)] = model.dv(i, a);
  return out;
}

TwoForm omega_L_form(const LagrangianModel& model, int a) {
  TwoForm w = exterior_derivative(theta_L(model, a));
  for (auto& e : w.entries) e = -e;
  return w;
}

Eigen::MatrixXd omega_L(const LagrangianModel& model, int a, const JetPoint& w) {
  const auto& vars = model.vars();
  if (a < 0 || a >= vars.k()) throw DimensionMismatch("leg index out of range");
  const int n = vars.n();
  const int k = vars.k();
  const Eigen::VectorXd x = w.flat();
  const Eigen::MatrixXd qv = model.hess_qv(x);
  const Eigen::MatrixXd vv = model.hess_vv(x);
  if (!qv.allFinite() || !vv.allFinite()) throw DomainError("non-finite second derivative of L");

  // dq^i ^ d(dL/dv^i_A): the coefficient of dq^i ^ dx^c is d/dx^c (dL/dv^i_A).
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(vars.total_dim(), vars.total_dim());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = qv(j, i * k + a);
      out(i, j) += c;
      out(j, i) -= c;
    }
    for (int j = 0; j < n; ++j) {
      for (int b = 0; b < k; ++b) {
        const double c = vv(i * k + a, j * k + b);
        const Index col = vars.velocity_index(j, b);
        out(i, col) += c;
        out(col, i) -= c;
      }
    }
  }
  return out;
}

Expr energy(const LagrangianModel& model) {
  const auto& vars = model.vars();
  Expr out;
  for (int i = 0; i < vars.n(); ++i) {
    for (int a = 0; a < vars.k(); ++a) {
      const Expr& d = model.dv(i, a);
      if (d.is_zero()) continue;
      out += Expr::variable(vars.v(i, a)) * d;
    }
  }
  return out - model.lagrangian();
}

Hessian hessian(const LagrangianModel& model, const JetPoint& w) {
  Hessian h;
  h.matrix = model.hess_vv(w.flat());
  const auto dim = h.matrix.rows();
  h.determinant = h.matrix.determinant();
  const double norm = h.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  const double scale = std::max(1.0, std::pow(norm, static_cast<double>(dim)));
  h.regular = std::isfinite(h.determinant) && std::abs(h.determinant) > 1e-10 * scale;
  return h;
}

CoJetPoint legendre(const LagrangianModel& model, const JetPoint& w) {
  const auto& vars = model.vars();
  const Eigen::VectorXd g = model.grad_v(w.flat());
  CoJetPoint out{w.q, Eigen::MatrixXd(vars.k(), vars.n())};
  for (int a = 0; a < vars.k(); ++a)
    for (int i = 0; i < vars.n(); ++i) out.p(a, i) = g[i * vars.k() + a];
  return out;
}

ChartMap legendre_map(const LagrangianModel& model) {
  const auto& vars = model.vars();
  ChartMap out{model.chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.components[static_cast<std::size_t>(i)] = Expr::variable(vars.q(i));
  for (int a = 0; a < vars.k(); ++a)
    for (int i = 0; i < vars.n(); ++i)
      out.components[static_cast<std::size_t>(vars.momentum_index(a, i))] = model.dv(i, a);
  return out;
}

Eigen::MatrixXd legendre_jacobian(const LagrangianModel& model, const JetPoint& w) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  const Eigen::VectorXd x = w.flat();
  const Eigen::MatrixXd qv = model.hess_qv(x);
  const Eigen::MatrixXd vv = model.hess_vv(x);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(vars.total_dim(), vars.total_dim());
  j.topLeftCorner(n, n).setIdentity();
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) {
      const Index row = vars.momentum_index(a, i);
      for (int l = 0; l < n; ++l) j(row, l) = qv(l, i * k + a);
      for (int l = 0; l < n; ++l)
        for (int b = 0; b < k; ++b) j(row, vars.velocity_index(l, b)) = vv(i * k + a, l * k + b);
    }
  }
  return j;
}

Eigen::MatrixXd canonical_omega_matrix(const VarTable& vars, int a) {
  if (a < 0 || a >= vars.k()) throw DimensionMismatch("leg index out of range");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(vars.total_dim(), vars.total_dim());
  for (int i = 0; i < vars.n(); ++i) {
    w(i, vars.momentum_index(a, i)) = 1.0;
    w(vars.momentum_index(a, i), i) = -1.0;
  }
  return w;
}

Eigen::MatrixXd legendre_pullback_omega(const LagrangianModel& model, int a, const JetPoint& w) {
  const Eigen::MatrixXd j = legendre_jacobian(model, w);
  return j.transpose() * canonical_omega_matrix(model.vars(), a) * j;
}

Eigen::VectorXd el_system_residual(const LagrangianModel& model, const JetPoint& w,
                                   const SecondJet& second) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  if (static_cast<int>(second.size()) != n) throw DimensionMismatch("second jet needs n blocks");
  const Eigen::VectorXd x = w.flat();
  const Eigen::VectorXd gq = model.grad_q(x);
  const Eigen::MatrixXd qv = model.hess_qv(x);
  const Eigen::MatrixXd vv = model.hess_vv(x);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int a = 0; a < k; ++a) {
      for (int j = 0; j < n; ++j) {
        acc += qv(j, i * k + a) * w.v(j, a);
        for (int b = 0; b < k; ++b) acc += vv(i * k + a, j * k + b) * second[static_cast<std::size_t>(j)](a, b);
      }
    }
    r[i] = acc - gq[i];
  }
  return r;
}

Eigen::VectorXd el_residual(const LagrangianModel& model, std::span<const Expr> phi,
                            std::span<const double> t) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  const JetPoint w = first_prolongation(vars, phi, t);
  Bindings b;
  for (int a = 0; a < k; ++a) b.emplace(vars.t(a), t[static_cast<std::size_t>(a)]);
  const auto jets = jet_exprs(vars, phi);
  SecondJet second(static_cast<std::size_t>(n), Eigen::MatrixXd(k, k));
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c)
        second[static_cast<std::size_t>(j)](a, c) =
            eval(diff(jets[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)], vars.t(c)), b);
  return el_system_residual(model, w, second);
}

SopdeSolution sopde_solve(const LagrangianModel& model, const JetPoint& w) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  const Eigen::VectorXd x = w.flat();
  const Hessian h = hessian(model, w);
  if (!h.regular) {
    throw SingularHessian("Lagrangian is not regular at the given point (det = " +
                          std::to_string(h.determinant) + ")");
  }
  const Eigen::MatrixXd& vv = h.matrix;
  const Eigen::VectorXd gq = model.grad_q(x);
  const Eigen::MatrixXd qv = model.hess_qv(x);

  // Orthonormal coordinates on the symmetric subspace (Gamma_A)^j_B = (Gamma_B)^j_A.
  struct Unknown {
    int j, a, b;
  };
  std::vector<Unknown> unknowns;
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) unknowns.push_back({j, a, b});
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  Eigen::MatrixXd m(n, static_cast<Index>(unknowns.size()));
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double known = 0.0;
    for (int a = 0; a < k; ++a)
      for (int j = 0; j < n; ++j) known += qv(j, i * k + a) * w.v(j, a);
    rhs[i] = gq[i] - known;
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
      const auto [j, a, b] = unknowns[u];
      m(i, static_cast<Index>(u)) =
          a == b ? vv(i * k + a, j * k + a)
                 : (vv(i * k + a, j * k + b) + vv(i * k + b, j * k + a)) * inv_sqrt2;
    }
  }
  const Eigen::VectorXd sol = m.completeOrthogonalDecomposition().solve(rhs);

  SopdeSolution out;
  out.vertical.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(k, k));
  for (std::size_t u = 0; u < unknowns.size(); ++u) {
    const auto [j, a, b] = unknowns[u];
    const double value = a == b ? sol[static_cast<Index>(u)] : sol[static_cast<Index>(u)] * inv_sqrt2;
    out.vertical[static_cast<std::size_t>(j)](a, b) = value;
    out.vertical[static_cast<std::size_t>(j)](b, a) = value;
  }
  for (int a = 0; a < k; ++a) {
    Eigen::VectorXd leg = Eigen::VectorXd::Zero(vars.total_dim());
    for (int i = 0; i < n; ++i) leg[i] = w.v(i, a);
    for (int j = 0; j < n; ++j)
      for (int b = 0; b < k; ++b) leg[vars.velocity_index(j, b)] = out.vertical[static_cast<std::size_t>(j)](a, b);
    out.legs.push_back(std::move(leg));
  }
  out.residual = el_system_residual(model, w, out.vertical).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (!(out.residual <= 1e-9 * scale)) {
    throw VerificationFailure("SOPDE system has no solution in the symmetric subspace", out.residual);
  }
  return out;
}

}  // namespace ksym
