#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dispbayes/errors.hpp"

namespace dispbayes {

// Admissible class of dispersion coefficients: range [kappa, k_upper] and
// derivative (slope) bound m_lip, all on [0,1].
struct ClassParams {
  double kappa = 0.5;
  double k_upper = 2.0;
  double m_lip = 1.0;

  void validate() const {
    if (!(kappa > 0.0) || !(k_upper > kappa) || !std::isfinite(k_upper)) {
      throw ConfigError("ClassParams: need 0 < kappa < k_upper < inf");
    }
    if (!(m_lip > 0.0) || !std::isfinite(m_lip)) {
      throw ConfigError("ClassParams: need 0 < m_lip < inf");
    }
  }
};

enum class Metric { kL2, kSup };

namespace detail {

// Roundoff headroom on the closed range/slope boundaries; grid-built
// functions may overshoot an attained bound by a few ulps.
inline constexpr double kBoundarySlack = 1e-12;

inline double pwl_value(std::span<const double> knots, std::span<const double> values, double t) {
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  std::size_t j = static_cast<std::size_t>(it - knots.begin());
  if (j == 0) return values.front();
  if (j >= knots.size()) return values.back();
  --j;
  if (t == knots[j]) return values[j];
  const double w = (t - knots[j]) / (knots[j + 1] - knots[j]);
  return values[j] + w * (values[j + 1] - values[j]);
}

// Exact integral of s^2 over one linear piece with endpoint values c,d.
inline double segment_integral_sq(double len, double c, double d) {
  return len * (c * c + c * d + d * d) / 3.0;
}

inline double pwl_integral_sq(std::span<const double> knots, std::span<const double> values,
                              double a, double b) {
  if (a == b) return 0.0;
  double total = 0.0;
  // First segment whose right endpoint exceeds a.
  std::size_t j = static_cast<std::size_t>(
      std::upper_bound(knots.begin(), knots.end(), a) - knots.begin());
  j = (j == 0) ? 0 : j - 1;
  for (; j + 1 < knots.size() && knots[j] < b; ++j) {
    const double x = std::max(a, knots[j]);
    const double y = std::min(b, knots[j + 1]);
    if (y <= x) continue;
    const double inv = 1.0 / (knots[j + 1] - knots[j]);
    const double dv = values[j + 1] - values[j];
    const double c = values[j] + (x - knots[j]) * inv * dv;
    const double d = values[j] + (y - knots[j]) * inv * dv;
    total += segment_integral_sq(y - x, c, d);
  }
  return total;
}

}  // namespace detail

// Piecewise-linear function on [0,1]: strictly increasing knots with first 0
// and last 1, one value per knot. Immutable after construction.
class DispersionFn {
 public:
  DispersionFn(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() < 2 || knots_.size() != values_.size()) {
      throw GridError("DispersionFn: need matching knot/value sequences of length >= 2");
    }
    if (knots_.front() != 0.0 || knots_.back() != 1.0) {
      throw GridError("DispersionFn: knots must span [0,1]");
    }
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
      if (!(knots_[j] < knots_[j + 1])) {
        throw GridError("DispersionFn: knots must be strictly increasing");
      }
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw GridError("DispersionFn: non-finite value");
    }
  }

  static DispersionFn constant(double v) { return DispersionFn({0.0, 1.0}, {v, v}); }
  static DispersionFn linear(double v0, double v1) { return DispersionFn({0.0, 1.0}, {v0, v1}); }

  // Linear interpolation; exact at knots.
  double operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("eval: t outside [0,1]");
    return detail::pwl_value(knots_, values_, t);
  }

  // Exact closed-form integral of s^2 over [a,b] (s^2 is quadratic per piece).
  double integral_sq(double a, double b) const {
    if (!(a >= 0.0 && b <= 1.0 && a <= b)) {
      throw DomainError("integral_sq: need 0 <= a <= b <= 1");
    }
    return detail::pwl_integral_sq(knots_, values_, a, b);
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const DispersionFn&, const DispersionFn&) = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

struct MembershipReport {
  bool member = true;
  std::string violation;  // first violation, empty when member
};

// Checks the class constraints (range and slope); total over any DispersionFn.
inline MembershipReport class_membership(const DispersionFn& s, const ClassParams& p) {
  const auto& knots = s.knots();
  const auto& values = s.values();
  const double range_tol = detail::kBoundarySlack * std::max(1.0, p.k_upper);
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] < p.kappa - range_tol || values[j] > p.k_upper + range_tol) {
      std::ostringstream msg;
      msg << "range: value " << values[j] << " at knot " << knots[j] << " outside ["
          << p.kappa << ", " << p.k_upper << "]";
      return {false, msg.str()};
    }
  }
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    const double slope = std::abs(values[j + 1] - values[j]) / (knots[j + 1] - knots[j]);
    if (slope > p.m_lip * (1.0 + detail::kBoundarySlack)) {
      std::ostringstream msg;
      msg << "slope: |" << values[j + 1] << " - " << values[j] << "| / " << (knots[j + 1] - knots[j])
          << " = " << slope << " exceeds " << p.m_lip;
      return {false, msg.str()};
    }
  }
  return {};
}

// Validating constructor: grid checks, then class constraints.
inline DispersionFn make_piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                          const ClassParams& params) {
  params.validate();
  DispersionFn s(std::move(knots), std::move(values));
  const MembershipReport rep = class_membership(s, params);
  if (!rep.member) {
    if (rep.violation.rfind("range", 0) == 0) throw RangeViolation(rep.violation);
    throw SlopeViolation(rep.violation);
  }
  return s;
}

namespace detail {

inline std::vector<double> merged_knots(const DispersionFn& a, const DispersionFn& b) {
  std::vector<double> m;
  m.reserve(a.knots().size() + b.knots().size());
  std::merge(a.knots().begin(), a.knots().end(), b.knots().begin(), b.knots().end(),
             std::back_inserter(m));
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

}  // namespace detail

// L2 and sup distances, exact on the merged knot grid: the difference of two
// piecewise-linear functions is linear per merged segment, so the L2 integral
// is closed-form and the sup is attained at a merged knot.
inline double distance(const DispersionFn& s1, const DispersionFn& s2, Metric metric) {
  const std::vector<double> grid = detail::merged_knots(s1, s2);
  if (metric == Metric::kSup) {
    double sup = 0.0;
    for (double t : grid) sup = std::max(sup, std::abs(s1(t) - s2(t)));
    return sup;
  }
  double sum = 0.0;
  double c = s1(grid.front()) - s2(grid.front());
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double d = s1(grid[k + 1]) - s2(grid[k + 1]);
    sum += detail::segment_integral_sq(grid[k + 1] - grid[k], c, d);
    c = d;
  }
  return std::sqrt(sum);
}

inline double distance_sq_l2(const DispersionFn& s1, const DispersionFn& s2) {
  const double d = distance(s1, s2, Metric::kL2);
  return d * d;
}

}  // namespace dispbayes
