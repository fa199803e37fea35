#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/errors.hpp"
#include "dispbayes/numeric_util.hpp"
#include "dispbayes/simulate.hpp"

namespace dispbayes {

// Gaussian log-likelihood of the increments: sum over i of
// -log sqrt(2 pi v_i) - y_i^2 / (2 v_i), with v_i the exact interval
// integrals of s^2. Entirely in log space; products would underflow for
// n beyond a few thousand.
inline double log_likelihood(const DispersionFn& s, const Observations& obs) {
  const std::vector<double> vars = increment_variances(s, obs.n);
  detail::StableSum acc;
  constexpr double log_two_pi = 1.8378770664093454836;  // log(2*pi)
  for (int i = 0; i < obs.n; ++i) {
    const double v = vars[static_cast<std::size_t>(i)];
    if (!(v > 0.0)) throw DegenerateVariance("log_likelihood: nonpositive increment variance");
    const double y = obs.increments[static_cast<std::size_t>(i)];
    acc.add(-0.5 * (log_two_pi + std::log(v)) - y * y / (2.0 * v));
  }
  return acc.value();
}

// log R_n(s) = log L_n(s) - log L_n(s0).
inline double log_likelihood_ratio(const DispersionFn& s, const DispersionFn& s0,
                                   const Observations& obs) {
  return log_likelihood(s, obs) - log_likelihood(s0, obs);
}

// f values at the interval left endpoints z_i = (i-1)/n:
// f_i = (V0_i - V_i) / V_i with V_i the interval integral of s^2 and V0_i of s0^2.
inline std::vector<double> f_values(const DispersionFn& s, const DispersionFn& s0, int n) {
  std::vector<double> f(static_cast<std::size_t>(n));
  const double dn = static_cast<double>(n);
  for (int i = 1; i <= n; ++i) {
    const double a = (i - 1) / dn;
    const double b = i / dn;
    const double v = s.integral_sq(a, b);
    const double v0 = s0.integral_sq(a, b);
    f[static_cast<std::size_t>(i - 1)] = (v0 - v) / v;
  }
  return f;
}

// Centered chi-square style residuals w_i = 1 - y_i^2 / V0_i; under the true
// s0 these are i.i.d. with mean 0 and variance 2.
inline std::vector<double> w_values(const Observations& obs, const DispersionFn& s0) {
  const std::vector<double> v0 = increment_variances(s0, obs.n);
  std::vector<double> w(static_cast<std::size_t>(obs.n));
  for (int i = 0; i < obs.n; ++i) {
    const double y = obs.increments[static_cast<std::size_t>(i)];
    w[static_cast<std::size_t>(i)] = 1.0 - y * y / v0[static_cast<std::size_t>(i)];
  }
  return w;
}

// Split of S_n = n^{-1} log R_n into the martingale part (1/2n) sum w_i f_i
// and the deterministic part (1/2n) sum [log(1+f_i) - f_i] (always <= 0).
struct SnDecomposition {
  double martingale_term = 0.0;
  double deterministic_term = 0.0;
  double total = 0.0;
};

inline SnDecomposition sn_decomposition(const DispersionFn& s, const DispersionFn& s0,
                                        const Observations& obs) {
  const std::vector<double> f = f_values(s, s0, obs.n);
  const std::vector<double> w = w_values(obs, s0);
  detail::StableSum mart;
  detail::StableSum det;
  for (int i = 0; i < obs.n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    mart.add(w[k] * f[k]);
    det.add(std::log1p(f[k]) - f[k]);
  }
  const double half_inv_n = 0.5 / static_cast<double>(obs.n);
  SnDecomposition d;
  d.martingale_term = half_inv_n * mart.value();
  d.deterministic_term = half_inv_n * det.value();
  d.total = d.martingale_term + d.deterministic_term;
  return d;
}

// Expected log-ratio of increment i (index 1..n): (1/2)[log(1+f_i) - f_i].
// Equals minus the KL divergence of the two centered Gaussian increment laws,
// so it is <= 0 with equality iff f_i = 0.
inline double expected_log_ratio_increment(const DispersionFn& s, const DispersionFn& s0,
                                           int i, int n) {
  if (i < 1 || i > n) throw DomainError("expected_log_ratio_increment: index outside 1..n");
  const double dn = static_cast<double>(n);
  const double a = (i - 1) / dn;
  const double b = i / dn;
  const double v = s.integral_sq(a, b);
  const double v0 = s0.integral_sq(a, b);
  const double f = (v0 - v) / v;
  return 0.5 * (std::log1p(f) - f);
}

}  // namespace dispbayes
