#include "ksym/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "ksym/errors.hpp"
#include "ksym/lagrangian.hpp"

namespace ksym {

HamiltonianModel::HamiltonianModel(VarTable vars, Expr hamiltonian)
    : vars_(std::move(vars)), hamiltonian_(std::move(hamiltonian)), chart_(vars_.momentum_chart()) {
  for (const auto& name : free_variables(hamiltonian_)) {
    const auto role = vars_.role(name);
    if (role != Role::Base && role != Role::Momentum) {
      throw DimensionMismatch("Hamiltonian may depend on q and p only, found '" + name + "'");
    }
  }
  dh_ = exterior_derivative(hamiltonian_, chart_);
  dh_compiled_ = CompiledExprs(dh_.coefficients, chart_);
}

OneForm canonical_theta(const VarTable& vars, int a) {
  if (a < 0 || a >= vars.k()) throw DimensionMismatch("leg index out of range");
  OneForm out{vars.momentum_chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
  for (int i = 0; i < vars.n(); ++i) out.coefficients[static_cast<std::size_t>(i)] = Expr::variable(vars.p(a, i));
  return out;
}

TwoForm canonical_omega(const VarTable& vars, int a) {
  TwoForm w = exterior_derivative(canonical_theta(vars, a));
  for (auto& e : w.entries) e = -e;
  return w;
}

CanonicalFormsAt canonical_forms(const VarTable& vars, int a, const CoJetPoint& w) {
  if (a < 0 || a >= vars.k()) throw DimensionMismatch("leg index out of range");
  CanonicalFormsAt out{Eigen::VectorXd::Zero(vars.total_dim()), canonical_omega_matrix(vars, a)};
  for (int i = 0; i < vars.n(); ++i) out.theta[i] = w.p(a, i);
  return out;
}

Eigen::VectorXd hdw_residual(const HamiltonianModel& model, const CoJetMap& psi,
                             std::span<const double> t) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  if (static_cast<int>(psi.base.size()) != n || static_cast<int>(psi.momenta.size()) != n * k) {
    throw DimensionMismatch("psi needs n base and k*n momentum components");
  }
  if (static_cast<int>(t.size()) != k) throw DimensionMismatch("t needs k entries");
  Bindings tb;
  for (int a = 0; a < k; ++a) tb.emplace(vars.t(a), t[static_cast<std::size_t>(a)]);

  Eigen::VectorXd x(vars.total_dim());
  for (int i = 0; i < n; ++i) x[i] = eval(psi.base[static_cast<std::size_t>(i)], tb);
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      x[vars.momentum_index(a, i)] = eval(psi.momenta[static_cast<std::size_t>(a * n + i)], tb);
  const Eigen::VectorXd dh = model.gradient(x);

  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    double div = 0.0;
    for (int a = 0; a < k; ++a) div += eval(diff(psi.momenta[static_cast<std::size_t>(a * n + i)], vars.t(a)), tb);
    r[i] = dh[i] + div;
    double worst = 0.0;
    for (int a = 0; a < k; ++a) {
      const double dpsi = eval(diff(psi.base[static_cast<std::size_t>(i)], vars.t(a)), tb);
      worst = std::max(worst, std::abs(dh[vars.momentum_index(a, i)] - dpsi));
    }
    r[n + i] = worst;
  }
  return r;
}

KVectorAt ham_kvector(const HamiltonianModel& model, const CoJetPoint& w) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  const Eigen::VectorXd dh = model.gradient(w.flat());
  KVectorAt out;
  for (int a = 0; a < k; ++a) {
    Eigen::VectorXd leg = Eigen::VectorXd::Zero(vars.total_dim());
    for (int i = 0; i < n; ++i) {
      leg[i] = dh[vars.momentum_index(a, i)];
      leg[vars.momentum_index(a, i)] = -dh[i] / static_cast<double>(k);
    }
    out.push_back(std::move(leg));
  }
  return out;
}

KVectorField ham_kvector_field(const HamiltonianModel& model) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  const auto& dh = model.dH().coefficients;
  KVectorField out;
  for (int a = 0; a < k; ++a) {
    VectorField leg{model.chart(), std::vector<Expr>(static_cast<std::size_t>(vars.total_dim()))};
    for (int i = 0; i < n; ++i) {
      leg.components[static_cast<std::size_t>(i)] = dh[static_cast<std::size_t>(vars.momentum_index(a, i))];
      leg.components[static_cast<std::size_t>(vars.momentum_index(a, i))] =
          -dh[static_cast<std::size_t>(i)] / Expr(static_cast<double>(k));
    }
    out.legs.push_back(std::move(leg));
  }
  return out;
}

Eigen::VectorXd generic_residual(const HamiltonianModel& model, const CoJetPoint& w,
                                 const KVectorAt& x) {
  const auto& vars = model.vars();
  if (static_cast<int>(x.size()) != vars.k()) throw DimensionMismatch("k-vector field needs k legs");
  Eigen::VectorXd acc = -model.gradient(w.flat());
  for (int a = 0; a < vars.k(); ++a) {
    acc += contract(canonical_omega_matrix(vars, a), x[static_cast<std::size_t>(a)]);
  }
  return acc;
}

}  // namespace ksym
