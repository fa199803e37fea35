#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace dispbayes {

namespace detail {

// Neumaier compensated summation; sequential and therefore deterministic.
class StableSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

// log(sum_i exp(x_i)) with max shift; -inf input entries are permitted.
inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf (or empty)
  detail::StableSum acc;
  for (double x : xs) acc.add(std::exp(x - m));
  return m + std::log(acc.value());
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Order-statistic percentile: smallest element with at least q of the mass
// at or below it.
inline double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  auto idx = static_cast<std::size_t>(std::ceil(q * n));
  idx = idx > 0 ? idx - 1 : 0;
  idx = std::min(idx, xs.size() - 1);
  return xs[idx];
}

}  // namespace dispbayes
