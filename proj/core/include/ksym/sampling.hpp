#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ksym {

/// Axis-aligned box of sampling intervals, keyed by coordinate name.
/// Coordinates without an explicit interval use `fallback`.
struct SampleBox {
  std::pair<double, double> fallback{-1.0, 1.0};
  std::map<std::string, std::pair<double, double>> intervals;

  std::pair<double, double> interval(const std::string& coord) const;
};

/// Deterministic quasi-random points (Halton sequence with a seeded
/// Cranley-Patterson rotation) filling `box` over the given chart.
std::vector<Eigen::VectorXd> sample_points(const SampleBox& box,
                                           std::span<const std::string> chart, int count,
                                           std::uint64_t seed);

struct MaxAt {
  double value = 0.0;
  int index = -1;
};

/// Maximum of `fn(i)` and its first arg-max; NaN counts as +inf.
MaxAt parallel_argmax(int count, const std::function<double(int)>& fn);

/// Maximum of `fn(i)` over i in [0, count), evaluated on worker threads.
/// Any exception thrown by `fn` is rethrown on the calling thread.
double parallel_max(int count, const std::function<double(int)>& fn);

}  // namespace ksym
