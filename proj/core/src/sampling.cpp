#include "ksym/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

constexpr int kPrimes[] = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,
                           43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101,
                           103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
                           173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229};

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f /= base;
  }
  return result;
}

}  // namespace

std::pair<double, double> SampleBox::interval(const std::string& coord) const {
  auto it = intervals.find(coord);
  return it == intervals.end() ? fallback : it->second;
}

std::vector<Eigen::VectorXd> sample_points(const SampleBox& box,
                                           std::span<const std::string> chart, int count,
                                           std::uint64_t seed) {
  const auto dim = chart.size();
  if (dim > std::size(kPrimes)) throw DimensionMismatch("sampling dimension too large");
  std::mt19937_64 rng(seed);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;

  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
      double u = radical_inverse(static_cast<std::uint64_t>(j) + 1, kPrimes[d]) + shift[d];
      u -= std::floor(u);
      auto [lo, hi] = box.interval(chart[d]);
      x[static_cast<Eigen::Index>(d)] = lo + (hi - lo) * u;
    }
    out.push_back(std::move(x));
  }
  return out;
}

MaxAt parallel_argmax(int count, const std::function<double(int)>& raw) {
  if (count <= 0) return {};
  // NaN residuals must never compare as "small".
  auto fn = [&raw](int i) {
    const double r = raw(i);
    return std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
  };
  // Ties resolve to the smallest index so results do not depend on scheduling.
  auto better = [](const MaxAt& a, const MaxAt& b) {
    return a.value > b.value || (a.value == b.value && a.index < b.index);
  };
  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(count / 16 + 1)));
  std::vector<MaxAt> partial(static_cast<std::size_t>(workers), MaxAt{-1.0, -1});
  auto run = [&](int w) {
    auto& best = partial[static_cast<std::size_t>(w)];
    for (int i = w; i < count; i += workers) {
      const MaxAt here{fn(i), i};
      if (best.index < 0 || better(here, best)) best = here;
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    threads.clear();
    if (error) std::rethrow_exception(error);
  }
  MaxAt best = partial.front();
  for (const auto& p : partial)
    if (p.index >= 0 && better(p, best)) best = p;
  return best;
}

double parallel_max(int count, const std::function<double(int)>& fn) {
  return std::max(0.0, parallel_argmax(count, fn).value);
}

}  // namespace ksym
