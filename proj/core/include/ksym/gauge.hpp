#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ksym/check.hpp"
#include "ksym/lagrangian.hpp"

namespace ksym {

/// L1 - L2 = alpha_hat + f(q) + c with alpha_hat = sum_A alpha^A_i(q) v^i_A.
struct GaugeDecomposition {
  std::vector<std::vector<Expr>> alpha;  // alpha[A][i], closed one-forms on Q
  Expr f;                                // zero unless the verdict is inequivalent by energy
  double c = 0.0;

  /// alpha_hat + f + c as an expression on the velocity chart.
  Expr reconstruct(const VarTable& vars) const;
};

enum class GaugeVerdict { Strict, Gauge, Inequivalent };

struct GaugeResult {
  GaugeVerdict verdict = GaugeVerdict::Inequivalent;
  GaugeDecomposition decomposition;
  std::string reason;       // empty unless inequivalent
  Eigen::VectorXd witness;  // velocity-chart point exhibiting inequivalence
  double residual = 0.0;    // max |D - alpha_hat - f - c| at samples, or the failing step's residual
};

std::string to_string(GaugeVerdict verdict);

/// Decides whether L1 and L2 differ by alpha_hat + c with closed alpha^A.
/// Differences by a non-constant f(q) are reported inequivalent since they
/// change the energy by more than a constant.
GaugeResult gauge_compare(const LagrangianModel& l1, const LagrangianModel& l2, const SampleSpec& samples,
                          double tol = 1e-9);

struct SameSolutionsReport {
  double max_difference = 0.0;  // max |EL residual under L1 - EL residual under L2|
  double max_residual_1 = 0.0;
  double max_residual_2 = 0.0;
  int sample_count = 0;
  bool pass = false;
  Eigen::VectorXd witness;  // parameter value attaining max_difference
};

/// Compares the Euler-Lagrange residuals of an analytic field under both Lagrangians.
SameSolutionsReport verify_same_solutions(const LagrangianModel& l1, const LagrangianModel& l2,
                                          std::span<const Expr> phi, const SampleSpec& t_samples,
                                          double tol = 1e-9);

}  // namespace ksym
