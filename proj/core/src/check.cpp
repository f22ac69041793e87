#include "ksym/check.hpp"

#include <algorithm>
#include <cmath>

namespace ksym {

CheckReport check_vanishes(std::string condition, std::span<const Expr> exprs, const Chart& chart,
                           std::span<const Eigen::VectorXd> points, double tol) {
  // Symbolic zeros need no evaluation.
  std::vector<Expr> live;
  for (const auto& e : exprs)
    if (!e.is_zero()) live.push_back(e);
  const CompiledExprs compiled(live, chart);

  CheckReport r{std::move(condition), 0.0, static_cast<int>(points.size()), true, tol, chart, {}, {}};
  const MaxAt worst = parallel_argmax(static_cast<int>(points.size()), [&](int j) {
    if (live.empty()) return 0.0;
    return compiled(points[static_cast<std::size_t>(j)]).cwiseAbs().maxCoeff();
  });
  if (worst.index >= 0) {
    r.max_residual = worst.value;
    r.witness = points[static_cast<std::size_t>(worst.index)];
  }
  r.pass = r.max_residual <= tol;
  return r;
}

CheckReport check_vanishes(std::string condition, std::span<const Expr> exprs, const Chart& chart,
                           const SampleSpec& samples, double tol) {
  const auto points = samples.points(chart);
  return check_vanishes(std::move(condition), exprs, chart, points, tol);
}

CheckReport combine(std::string condition, std::span<const CheckReport> parts) {
  CheckReport r;
  r.condition = std::move(condition);
  r.pass = true;
  r.parts.assign(parts.begin(), parts.end());
  for (const auto& p : parts) {
    r.pass = r.pass && p.pass;
    r.sample_count = std::max(r.sample_count, p.sample_count);
    r.tolerance = std::max(r.tolerance, p.tolerance);
    if (r.witness.size() == 0 || p.max_residual > r.max_residual) {
      r.max_residual = std::max(r.max_residual, p.max_residual);
      r.chart = p.chart;
      r.witness = p.witness;
    }
  }
  return r;
}

}  // namespace ksym
