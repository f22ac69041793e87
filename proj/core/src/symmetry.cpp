#include "ksym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

std::string leg_name(const std::string& base, int a) { return base + "^" + std::to_string(a + 1); }

void require_chart(const VectorField& y, const Chart& chart, const char* what) {
  if (y.chart != chart || y.components.size() != chart.size()) {
    throw DimensionMismatch(std::string("vector field is not on the ") + what + " chart");
  }
}

std::vector<Expr> difference(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  std::vector<Expr> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::vector<Expr> leg_values(std::span<const Expr> values, int k, const char* what) {
  if (values.empty()) return std::vector<Expr>(static_cast<std::size_t>(k));
  if (static_cast<int>(values.size()) != k) throw DimensionMismatch(std::string(what) + " needs k components");
  return {values.begin(), values.end()};
}

/// Sampled check of a residual computed per point rather than from expressions.
CheckReport check_pointwise(std::string condition, std::span<const Eigen::VectorXd> points,
                            const Chart& chart, double tol,
                            const std::function<double(const Eigen::VectorXd&)>& residual) {
  CheckReport r{std::move(condition), 0.0, static_cast<int>(points.size()), true, tol, chart, {}, {}};
  const MaxAt worst = parallel_argmax(static_cast<int>(points.size()),
                                      [&](int j) { return residual(points[static_cast<std::size_t>(j)]); });
  if (worst.index >= 0) {
    r.max_residual = worst.value;
    r.witness = points[static_cast<std::size_t>(worst.index)];
  }
  r.pass = r.max_residual <= tol;
  return r;
}

std::vector<Eigen::VectorXd> parameter_points(const VarTable& vars, const SampleSpec& t_samples) {
  return t_samples.points(vars.parameter_chart());
}

std::vector<double> as_vector(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

/// Substitution that composes expressions over `chart` with a chart map.
std::map<std::string, Expr> composition(const Chart& chart, const std::vector<Expr>& components) {
  std::map<std::string, Expr> out;
  for (std::size_t i = 0; i < chart.size(); ++i) out.emplace(chart[i], components[i]);
  return out;
}

CheckReport inverse_report(const VarTable& vars, const QDiffeomorphism& phi, const SampleSpec& samples,
                           double tol) {
  const Chart base = vars.base_chart();
  if (static_cast<int>(phi.map.size()) != vars.n() || static_cast<int>(phi.inverse.size()) != vars.n()) {
    throw DimensionMismatch("diffeomorphism needs n components and n inverse components");
  }
  const auto points = samples.points(base);
  CheckReport r{"declared inverse", phi.inverse_residual(vars, points), static_cast<int>(points.size()),
                true, tol, base, {}, {}};
  r.pass = r.max_residual <= tol;
  return r;
}

}  // namespace

CheckReport check_cartan_hamiltonian(const VectorField& y, const HamiltonianModel& model,
                                     const SampleSpec& samples, double tol) {
  const auto& vars = model.vars();
  const Chart& chart = model.chart();
  require_chart(y, chart, "momentum");
  const auto points = samples.points(chart);
  std::vector<CheckReport> parts;
  for (int a = 0; a < vars.k(); ++a) {
    parts.push_back(check_vanishes(leg_name("L(Y)omega", a), lie_derivative(y, canonical_omega(vars, a)).entries,
                                   chart, points, tol));
  }
  const Expr yh = y.apply(model.hamiltonian());
  parts.push_back(check_vanishes("Y(H)", std::span(&yh, 1), chart, points, tol));
  return combine("cartan symmetry (Hamiltonian)", parts);
}

CheckReport check_cartan_lagrangian(const VectorField& y, const LagrangianModel& model,
                                    const SampleSpec& samples, double tol) {
  const auto& vars = model.vars();
  const Chart& chart = model.chart();
  require_chart(y, chart, "velocity");
  const auto points = samples.points(chart);
  std::vector<CheckReport> parts;
  for (int a = 0; a < vars.k(); ++a) {
    parts.push_back(check_vanishes(leg_name("L(Y)omega_L", a), lie_derivative(y, omega_L_form(model, a)).entries,
                                   chart, points, tol));
  }
  const Expr ye = y.apply(energy(model));
  parts.push_back(check_vanishes("Y(E_L)", std::span(&ye, 1), chart, points, tol));
  return combine("cartan symmetry (Lagrangian)", parts);
}

CheckReport check_cotangent_lift_invariance(const VarTable& vars, const VectorFieldQ& z,
                                            const SampleSpec& samples, double tol) {
  const VectorField y = cotangent_lift(vars, z);
  const Chart chart = vars.momentum_chart();
  const auto points = samples.points(chart);
  std::vector<CheckReport> parts;
  for (int a = 0; a < vars.k(); ++a) {
    parts.push_back(check_vanishes(leg_name("L(Z^C*)theta", a),
                                   lie_derivative(y, canonical_theta(vars, a)).coefficients, chart, points, tol));
    parts.push_back(check_vanishes(leg_name("L(Z^C*)omega", a), lie_derivative(y, canonical_omega(vars, a)).entries,
                                   chart, points, tol));
  }
  return combine("cotangent lift invariance", parts);
}

NoetherCurrent noether_current_lagrangian(const LagrangianModel& model, const VectorFieldQ& z,
                                          std::span<const Expr> g_in, const SampleSpec& samples,
                                          double tol) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  if (z.size() != n) throw DimensionMismatch("Z needs n components");
  const std::vector<Expr> g = leg_values(g_in, k, "gauge term g");
  for (const auto& ga : g) {
    for (const auto& name : free_variables(ga)) {
      if (vars.role(name) != Role::Base) throw DimensionMismatch("gauge term g may depend on q only");
    }
  }
  const Chart& chart = model.chart();
  const auto points = samples.points(chart);

  const VectorField zc = complete_lift(vars, z);
  const Expr quasi = zc.apply(model.lagrangian()) - tulczyjew(vars, g);
  const CheckReport pre = check_vanishes("Z^C(L) - d_T g", std::span(&quasi, 1), chart, points, tol);
  if (!pre.pass) {
    throw VerificationFailure("Z^C(L) != d_T g: not a natural symmetry with this gauge term", pre.max_residual);
  }

  NoetherCurrent current{Side::Lagrangian, Provenance::NaturalLift, chart, {}, {}};
  for (int a = 0; a < k; ++a) {
    Expr fa;
    for (int i = 0; i < n; ++i) fa += z[i] * model.dv(i, a);
    current.f.push_back(fa - g[static_cast<std::size_t>(a)]);
  }

  std::vector<CheckReport> parts;
  for (int a = 0; a < k; ++a) {
    const OneForm lhs = interior(zc, omega_L_form(model, a));
    const OneForm df = exterior_derivative(current.f[static_cast<std::size_t>(a)], chart);
    parts.push_back(check_vanishes(leg_name("i(Z^C)omega_L - df", a), difference(lhs.coefficients, df.coefficients),
                                   chart, points, tol));
  }
  current.verification = combine("Noether relation", parts);
  if (!current.verification.pass) {
    throw VerificationFailure("constructed current violates i(Z^C)omega_L = df", current.verification.max_residual);
  }
  return current;
}

NoetherCurrent noether_current_hamiltonian(const HamiltonianModel& model, const VectorField& y,
                                           std::span<const Expr> zeta_in, const SampleSpec& samples,
                                           double tol) {
  const auto& vars = model.vars();
  const int k = vars.k();
  const Chart& chart = model.chart();
  const std::vector<Expr> zeta = leg_values(zeta_in, k, "zeta");
  const CheckReport cartan = check_cartan_hamiltonian(y, model, samples, tol);
  if (!cartan.pass) throw VerificationFailure("Y is not a Cartan symmetry of H", cartan.max_residual);

  const auto points = samples.points(chart);
  NoetherCurrent current{Side::Hamiltonian, zeta_in.empty() ? Provenance::NaturalLift : Provenance::UserSupplied,
                         chart, {}, {}};
  std::vector<CheckReport> parts;
  for (int a = 0; a < k; ++a) {
    const OneForm theta = canonical_theta(vars, a);
    const OneForm lie = lie_derivative(y, theta);
    const OneForm dz = exterior_derivative(zeta[static_cast<std::size_t>(a)], chart);
    const CheckReport pre = check_vanishes(leg_name("L(Y)theta - dzeta", a),
                                           difference(lie.coefficients, dz.coefficients), chart, points, tol);
    if (!pre.pass) throw VerificationFailure("L(Y)theta^A != dzeta^A", pre.max_residual);
    current.f.push_back(interior(y, theta) - zeta[static_cast<std::size_t>(a)]);

    const OneForm lhs = interior(y, canonical_omega(vars, a));
    const OneForm df = exterior_derivative(current.f.back(), chart);
    parts.push_back(check_vanishes(leg_name("i(Y)omega - df", a), difference(lhs.coefficients, df.coefficients),
                                   chart, points, tol));
  }
  current.verification = combine("Noether relation", parts);
  if (!current.verification.pass) {
    throw VerificationFailure("constructed current violates i(Y)omega = df", current.verification.max_residual);
  }
  return current;
}

Expr total_divergence(const VarTable& vars, const NoetherCurrent& current, std::span<const Expr> phi,
                      const LagrangianModel* model) {
  const int n = vars.n();
  const int k = vars.k();
  if (static_cast<int>(phi.size()) != n) throw DimensionMismatch("phi needs n components");
  if (static_cast<int>(current.f.size()) != k) throw DimensionMismatch("current needs k components");
  const auto jets = jet_exprs(vars, phi);
  std::map<std::string, Expr> along;
  for (int i = 0; i < n; ++i) {
    along.emplace(vars.q(i), phi[static_cast<std::size_t>(i)]);
    for (int a = 0; a < k; ++a) along.emplace(vars.v(i, a), jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]);
  }
  if (current.side == Side::Hamiltonian) {
    if (model == nullptr) throw Error("Hamiltonian-side currents need a Lagrangian model for the Legendre map");
    std::map<std::string, Expr> legendre_image;
    for (int i = 0; i < n; ++i) {
      legendre_image.emplace(vars.q(i), phi[static_cast<std::size_t>(i)]);
      for (int a = 0; a < k; ++a) legendre_image.emplace(vars.p(a, i), substitute(model->dv(i, a), along));
    }
    along = std::move(legendre_image);
  }
  Expr div;
  for (int a = 0; a < k; ++a) div += diff(substitute(current.f[static_cast<std::size_t>(a)], along), vars.t(a));
  return div;
}

Expr total_divergence(const VarTable& vars, const NoetherCurrent& current, const CoJetMap& psi) {
  const int n = vars.n();
  const int k = vars.k();
  if (current.side != Side::Hamiltonian) throw DimensionMismatch("cojet maps carry Hamiltonian-side currents only");
  if (static_cast<int>(psi.base.size()) != n || static_cast<int>(psi.momenta.size()) != n * k) {
    throw DimensionMismatch("psi needs n base and k*n momentum components");
  }
  if (static_cast<int>(current.f.size()) != k) throw DimensionMismatch("current needs k components");
  std::map<std::string, Expr> along;
  for (int i = 0; i < n; ++i) {
    along.emplace(vars.q(i), psi.base[static_cast<std::size_t>(i)]);
    for (int a = 0; a < k; ++a) along.emplace(vars.p(a, i), psi.momenta[static_cast<std::size_t>(a * n + i)]);
  }
  Expr div;
  for (int a = 0; a < k; ++a) div += diff(substitute(current.f[static_cast<std::size_t>(a)], along), vars.t(a));
  return div;
}

CheckReport verify_conservation(const VarTable& vars, const NoetherCurrent& current, std::span<const Expr> phi,
                                const SampleSpec& t_samples, double tol, const LagrangianModel* model) {
  const Expr div = total_divergence(vars, current, phi, model);
  return check_vanishes("total divergence", std::span(&div, 1), vars.parameter_chart(), t_samples, tol);
}

CheckReport verify_conservation(const VarTable& vars, const NoetherCurrent& current, const CoJetMap& psi,
                                const SampleSpec& t_samples, double tol) {
  const Expr div = total_divergence(vars, current, psi);
  return check_vanishes("total divergence", std::span(&div, 1), vars.parameter_chart(), t_samples, tol);
}

GridConservationReport verify_conservation_grid(const VarTable& vars, const NoetherCurrent& current,
                                                const SolutionGrid& coarse, const SolutionGrid& fine,
                                                const LagrangianModel* model, double tol) {
  GridConservationReport r;
  r.tolerance = tol;
  r.coarse_divergence = evaluate_current(vars, current.f, coarse, current.side, model).max_divergence;
  r.fine_divergence = evaluate_current(vars, current.f, fine, current.side, model).max_divergence;
  r.ratio = r.fine_divergence > 0.0 ? r.coarse_divergence / r.fine_divergence
                                    : std::numeric_limits<double>::infinity();
  r.ratio_in_range = r.ratio >= 3.0 && r.ratio <= 5.0;
  const bool negligible = r.coarse_divergence <= 1e-12;
  r.pass = r.coarse_divergence <= tol && (r.ratio_in_range || negligible);
  return r;
}

CheckReport verify_bracket_theorem(const HamiltonianModel& model, const NoetherCurrent& current,
                                   const SampleSpec& samples, double tol) {
  const auto& vars = model.vars();
  if (current.side != Side::Hamiltonian || static_cast<int>(current.f.size()) != vars.k()) {
    throw DimensionMismatch("bracket check needs a Hamiltonian-side current with k components");
  }
  const KVectorField x = ham_kvector_field(model);
  Expr sum;
  for (int a = 0; a < vars.k(); ++a)
    sum += x.legs[static_cast<std::size_t>(a)].apply(current.f[static_cast<std::size_t>(a)]);
  return check_vanishes("sum_A X_A(f^A)", std::span(&sum, 1), model.chart(), samples, tol);
}

CheckReport verify_bracket_theorem(const LagrangianModel& model, const NoetherCurrent& current,
                                   const SampleSpec& samples, double tol) {
  const auto& vars = model.vars();
  const int k = vars.k();
  if (current.side != Side::Lagrangian || static_cast<int>(current.f.size()) != k) {
    throw DimensionMismatch("bracket check needs a Lagrangian-side current with k components");
  }
  const Chart& chart = model.chart();
  std::vector<CompiledExprs> grads;
  for (const auto& fa : current.f) grads.emplace_back(exterior_derivative(fa, chart).coefficients, chart);
  const auto points = samples.points(chart);
  return check_pointwise("sum_A Gamma_A(f^A)", points, chart, tol, [&](const Eigen::VectorXd& x) {
    const SopdeSolution s = sopde_solve(model, JetPoint::from_flat(vars, x));
    double sum = 0.0;
    for (int a = 0; a < k; ++a) sum += s.legs[static_cast<std::size_t>(a)].dot(grads[static_cast<std::size_t>(a)](x));
    return std::abs(sum);
  });
}

CheckReport check_cartan_diffeomorphism(const HamiltonianModel& model, const QDiffeomorphism& phi,
                                        const SampleSpec& samples, double tol) {
  const auto& vars = model.vars();
  const Chart& chart = model.chart();
  std::vector<CheckReport> parts;
  parts.push_back(inverse_report(vars, phi, samples, tol));
  const ChartMap lifted = cotangent_prolongation(vars, phi);
  const auto points = samples.points(chart);

  std::vector<Eigen::MatrixXd> omegas;
  for (int a = 0; a < vars.k(); ++a) omegas.push_back(canonical_omega_matrix(vars, a));
  parts.push_back(check_pointwise("Phi*omega - omega", points, chart, tol, [&](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd j = lifted.jacobian(x);
    double worst = 0.0;
    for (const auto& w : omegas) worst = std::max(worst, (j.transpose() * w * j - w).cwiseAbs().maxCoeff());
    return worst;
  }));

  const Expr shifted = substitute(model.hamiltonian(), composition(chart, lifted.components)) - model.hamiltonian();
  parts.push_back(check_vanishes("d(Phi*H - H)", exterior_derivative(shifted, chart).coefficients, chart, points, tol));
  return combine("cartan diffeomorphism (Hamiltonian)", parts);
}

CheckReport check_cartan_diffeomorphism(const LagrangianModel& model, const QDiffeomorphism& phi,
                                        const SampleSpec& samples, double tol) {
  const auto& vars = model.vars();
  const Chart& chart = model.chart();
  std::vector<CheckReport> parts;
  parts.push_back(inverse_report(vars, phi, samples, tol));
  const ChartMap lifted = tangent_prolongation(vars, phi);
  const auto points = samples.points(chart);

  parts.push_back(check_pointwise("Phi*omega_L - omega_L", points, chart, tol, [&](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd j = lifted.jacobian(x);
    const JetPoint here = JetPoint::from_flat(vars, x);
    const JetPoint there = JetPoint::from_flat(vars, lifted(x));
    double worst = 0.0;
    for (int a = 0; a < vars.k(); ++a) {
      const Eigen::MatrixXd pulled = j.transpose() * omega_L(model, a, there) * j;
      worst = std::max(worst, (pulled - omega_L(model, a, here)).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  const Expr e = energy(model);
  const Expr shifted = substitute(e, composition(chart, lifted.components)) - e;
  parts.push_back(check_vanishes("d(Phi*E_L - E_L)", exterior_derivative(shifted, chart).coefficients, chart, points, tol));
  return combine("cartan diffeomorphism (Lagrangian)", parts);
}

std::vector<Expr> transport(const QDiffeomorphism& phi, const VarTable& vars, std::span<const Expr> sol) {
  if (static_cast<int>(sol.size()) != vars.n() || static_cast<int>(phi.map.size()) != vars.n()) {
    throw DimensionMismatch("transport needs n components");
  }
  const auto along = composition(vars.base_chart(), {sol.begin(), sol.end()});
  std::vector<Expr> out;
  for (const auto& c : phi.map) out.push_back(substitute(c, along));
  return out;
}

CoJetMap transport(const QDiffeomorphism& phi, const VarTable& vars, const CoJetMap& psi) {
  const int n = vars.n();
  const int k = vars.k();
  if (static_cast<int>(psi.base.size()) != n || static_cast<int>(psi.momenta.size()) != n * k) {
    throw DimensionMismatch("psi needs n base and k*n momentum components");
  }
  const ChartMap lifted = cotangent_prolongation(vars, phi);
  std::map<std::string, Expr> along;
  for (int i = 0; i < n; ++i) {
    along.emplace(vars.q(i), psi.base[static_cast<std::size_t>(i)]);
    for (int a = 0; a < k; ++a) along.emplace(vars.p(a, i), psi.momenta[static_cast<std::size_t>(a * n + i)]);
  }
  CoJetMap out;
  for (int i = 0; i < n; ++i) out.base.push_back(substitute(lifted.components[static_cast<std::size_t>(i)], along));
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      out.momenta.push_back(
          substitute(lifted.components[static_cast<std::size_t>(vars.momentum_index(a, i))], along));
  return out;
}

TransportReport check_symmetry_by_transport(const HamiltonianModel& model, const QDiffeomorphism& phi,
                                            const CoJetMap& psi, const SampleSpec& t_samples, double base_tol) {
  const auto& vars = model.vars();
  const auto points = parameter_points(vars, t_samples);
  const Chart tchart = vars.parameter_chart();
  auto hdw = [&](const CoJetMap& map) {
    return [&model, map](const Eigen::VectorXd& t) {
      return hdw_residual(model, map, as_vector(t)).cwiseAbs().maxCoeff();
    };
  };
  TransportReport r;
  r.input = check_pointwise("HDW residual of input", points, tchart, base_tol, hdw(psi));
  r.tolerance = base_tol + 10.0 * r.input.max_residual;
  r.image = check_pointwise("HDW residual of image", points, tchart, r.tolerance, hdw(transport(phi, vars, psi)));
  r.pass = r.image.pass;
  return r;
}

TransportReport check_symmetry_by_transport(const LagrangianModel& model, const QDiffeomorphism& phi,
                                            std::span<const Expr> sol, const SampleSpec& t_samples,
                                            double base_tol) {
  const auto& vars = model.vars();
  const auto points = parameter_points(vars, t_samples);
  const Chart tchart = vars.parameter_chart();
  auto el = [&](std::vector<Expr> map) {
    return [&model, map = std::move(map)](const Eigen::VectorXd& t) {
      return el_residual(model, map, as_vector(t)).cwiseAbs().maxCoeff();
    };
  };
  TransportReport r;
  r.input = check_pointwise("EL residual of input", points, tchart, base_tol, el({sol.begin(), sol.end()}));
  r.tolerance = base_tol + 10.0 * r.input.max_residual;
  r.image = check_pointwise("EL residual of image", points, tchart, r.tolerance, el(transport(phi, vars, sol)));
  r.pass = r.image.pass;
  return r;
}

NoetherCurrent pullback(const NoetherCurrent& current, const VarTable& vars, const QDiffeomorphism& phi) {
  const ChartMap lifted =
      current.side == Side::Lagrangian ? tangent_prolongation(vars, phi) : cotangent_prolongation(vars, phi);
  if (lifted.source != current.chart) throw DimensionMismatch("current chart does not match the model");
  const auto along = composition(current.chart, lifted.components);
  NoetherCurrent out{current.side, Provenance::UserSupplied, current.chart, {}, {}};
  for (const auto& fa : current.f) out.f.push_back(substitute(fa, along));
  out.verification.condition = "pullback";
  return out;
}

}  // namespace ksym
