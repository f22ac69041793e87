#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ksym/expr.hpp"
#include "ksym/forms.hpp"
#include "ksym/sampling.hpp"

namespace ksym {

/// Where and how densely a sampled verification probes its chart.
struct SampleSpec {
  SampleBox box;
  int count = 100;
  std::uint64_t seed = 0;

  std::vector<Eigen::VectorXd> points(const Chart& chart) const {
    return sample_points(box, chart, count, seed);
  }
};

/// Outcome of a sampled check: the worst residual and the point attaining it.
struct CheckReport {
  std::string condition;
  double max_residual = 0.0;
  int sample_count = 0;
  bool pass = false;
  double tolerance = 0.0;
  Chart chart;
  Eigen::VectorXd witness;  // empty when no sample was taken
  std::vector<CheckReport> parts;
};

/// max over points and expressions of |e(x)|.
CheckReport check_vanishes(std::string condition, std::span<const Expr> exprs, const Chart& chart,
                           std::span<const Eigen::VectorXd> points, double tol);
CheckReport check_vanishes(std::string condition, std::span<const Expr> exprs, const Chart& chart,
                           const SampleSpec& samples, double tol);

/// Worst of several reports under a single condition name; passes iff all pass.
CheckReport combine(std::string condition, std::span<const CheckReport> parts);

}  // namespace ksym
