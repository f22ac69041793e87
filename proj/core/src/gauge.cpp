#include "ksym/gauge.hpp"

#include <algorithm>
#include <map>

#include "ksym/errors.hpp"
#include "ksym/sampling.hpp"

namespace ksym {

Expr GaugeDecomposition::reconstruct(const VarTable& vars) const {
  Expr out = f + Expr(c);
  for (std::size_t a = 0; a < alpha.size(); ++a)
    for (std::size_t i = 0; i < alpha[a].size(); ++i)
      out += alpha[a][i] * Expr::variable(vars.v(static_cast<int>(i), static_cast<int>(a)));
  return out;
}

std::string to_string(GaugeVerdict verdict) {
  switch (verdict) {
    case GaugeVerdict::Strict: return "strict";
    case GaugeVerdict::Gauge: return "gauge";
    case GaugeVerdict::Inequivalent: return "inequivalent";
  }
  return "inequivalent";
}

GaugeResult gauge_compare(const LagrangianModel& l1, const LagrangianModel& l2, const SampleSpec& samples,
                          double tol) {
  if (!l1.vars().same_shape(l2.vars())) throw DimensionMismatch("Lagrangians have different n or k");
  const auto& vars = l1.vars();
  const int n = vars.n();
  const int k = vars.k();
  const Chart& chart = l1.chart();
  const auto points = samples.points(chart);
  const Expr d = l1.lagrangian() - l2.lagrangian();

  GaugeResult result;
  auto reject = [&](std::string reason, const CheckReport& r) {
    result.verdict = GaugeVerdict::Inequivalent;
    result.reason = std::move(reason);
    result.witness = r.witness;
    result.residual = r.max_residual;
    return result;
  };

  std::vector<Expr> velocities;
  std::map<std::string, Expr> at_rest;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) {
      velocities.push_back(Expr::variable(vars.v(i, a)));
      at_rest.emplace(vars.v(i, a), Expr());
    }

  // Step 1: D must be affine in the velocities.
  std::vector<Expr> second;
  for (const auto& va : velocities) {
    const Expr dva = diff(d, va.name());
    for (const auto& vb : velocities) second.push_back(diff(dva, vb.name()));
  }
  const CheckReport affine = check_vanishes("d2D/dv dv", second, chart, points, tol);
  if (!affine.pass) return reject("difference is not affine in the velocities", affine);

  // Step 2: alpha^A_i = dD/dv^i_A, taken on the v = 0 slice and confirmed v-free.
  auto& alpha = result.decomposition.alpha;
  alpha.assign(static_cast<std::size_t>(k), std::vector<Expr>(static_cast<std::size_t>(n)));
  std::vector<Expr> drift;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) {
      const Expr raw = diff(d, vars.v(i, a));
      const Expr slice = substitute(raw, at_rest);
      alpha[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = slice;
      drift.push_back(raw - slice);
    }
  const CheckReport vfree = check_vanishes("alpha v-dependence", drift, chart, points, tol);
  if (!vfree.pass) return reject("alpha depends on the velocities", vfree);

  // Step 3: each alpha^A closed.
  std::vector<Expr> curl;
  for (const auto& leg : alpha)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        curl.push_back(diff(leg[static_cast<std::size_t>(i)], vars.q(j)) -
                       diff(leg[static_cast<std::size_t>(j)], vars.q(i)));
  const CheckReport closed = check_vanishes("d alpha", curl, chart, points, std::min(tol, 1e-10));
  if (!closed.pass) return reject("alpha is not closed", closed);

  // Step 4: f(q) = D(q, 0) must be constant for the energies to agree up to a constant.
  const Expr f = substitute(d, at_rest);
  const CheckReport flat = check_vanishes("df", exterior_derivative(f, vars.base_chart()).coefficients,
                                          vars.base_chart(), samples, tol);
  if (!flat.pass) {
    result.decomposition.f = f;
    reject("energies differ by a non-constant function of q", flat);
    result.witness = Eigen::VectorXd::Zero(vars.total_dim());
    result.witness.head(n) = flat.witness;
    return result;
  }
  result.decomposition.c = f.is_constant() ? f.value() : eval(f, chart_bindings(chart, points.front()));

  const Expr rest = d - result.decomposition.reconstruct(vars);
  const CheckReport sound = check_vanishes("D - alpha_hat - c", std::span(&rest, 1), chart, points, tol);
  if (!sound.pass) return reject("decomposition does not reconstruct the difference", sound);
  result.residual = sound.max_residual;

  std::vector<Expr> flat_alpha;
  for (const auto& leg : alpha) flat_alpha.insert(flat_alpha.end(), leg.begin(), leg.end());
  const CheckReport trivial = check_vanishes("alpha", flat_alpha, chart, points, tol);
  result.verdict = trivial.pass ? GaugeVerdict::Strict : GaugeVerdict::Gauge;
  if (trivial.pass) {
    for (auto& leg : alpha)
      for (auto& e : leg) e = Expr();
  }
  return result;
}

SameSolutionsReport verify_same_solutions(const LagrangianModel& l1, const LagrangianModel& l2,
                                          std::span<const Expr> phi, const SampleSpec& t_samples, double tol) {
  if (!l1.vars().same_shape(l2.vars())) throw DimensionMismatch("Lagrangians have different n or k");
  const auto& vars = l1.vars();
  const auto points = t_samples.points(vars.parameter_chart());
  const int count = static_cast<int>(points.size());
  std::vector<double> r1(points.size()), r2(points.size()), gap(points.size());
  parallel_max(count, [&](int j) {
    const auto& t = points[static_cast<std::size_t>(j)];
    const std::vector<double> tv(t.data(), t.data() + t.size());
    const Eigen::VectorXd a = el_residual(l1, phi, tv);
    const Eigen::VectorXd b = el_residual(l2, phi, tv);
    const auto s = static_cast<std::size_t>(j);
    r1[s] = a.cwiseAbs().maxCoeff();
    r2[s] = b.cwiseAbs().maxCoeff();
    gap[s] = (a - b).cwiseAbs().maxCoeff();
    return gap[s];
  });

  SameSolutionsReport r;
  r.sample_count = count;
  for (std::size_t s = 0; s < points.size(); ++s) {
    r.max_residual_1 = std::max(r.max_residual_1, r1[s]);
    r.max_residual_2 = std::max(r.max_residual_2, r2[s]);
    if (r.witness.size() == 0 || gap[s] > r.max_difference) {
      r.max_difference = std::max(r.max_difference, gap[s]);
      r.witness = points[s];
    }
  }
  r.pass = r.max_difference <= tol;
  return r;
}

}  // namespace ksym
