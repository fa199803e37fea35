#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "dispbayes/numeric_util.hpp"

namespace dispbayes {

// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
// the Legendre recurrence (converges to machine precision).
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;

  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
      w[n - 1 - i] = w[i];
    }
  }

  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    detail::StableSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc.add(w[i] * f(mid + half * x[i]));
    }
    return half * acc.value();
  }
};

// Composite rule over the panels [breaks[k], breaks[k+1]].
template <typename F>
double integrate_panels(F&& f, std::span<const double> breaks, const GaussLegendre& rule) {
  detail::StableSum acc;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] > breaks[k]) acc.add(rule.integrate(f, breaks[k], breaks[k + 1]));
  }
  return acc.value();
}

}  // namespace dispbayes
