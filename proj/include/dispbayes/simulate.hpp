#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/errors.hpp"
#include "dispbayes/rng.hpp"

namespace dispbayes {

// Discrete observations of dX = s(t) dW on the grid t_i = i/n, stored as the
// n Gaussian increments plus their cumulative sums (values[0] = 0).
struct Observations {
  int n = 0;
  std::vector<double> increments;  // increments[i], i = 1..n at index i-1
  std::vector<double> values;      // values[i] = X_{i/n}, size n+1
  SeedRecord seed;
};

// Per-increment variances: integral of s^2 over [(i-1)/n, i/n].
inline std::vector<double> increment_variances(const DispersionFn& s, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  const double dn = static_cast<double>(n);
  for (int i = 1; i <= n; ++i) {
    v[static_cast<std::size_t>(i - 1)] = s.integral_sq((i - 1) / dn, i / dn);
  }
  return v;
}

// Exact sampler: increments are independent N(0, v_i); no time-stepping
// scheme is involved. Deterministic given the seed record.
inline Observations sample_observations(const DispersionFn& s0, int n, SeedRecord seed) {
  if (n < 1) throw ConfigError("sample_observations: n >= 1 required");
  Observations obs;
  obs.n = n;
  obs.seed = seed;
  obs.increments.resize(static_cast<std::size_t>(n));
  obs.values.resize(static_cast<std::size_t>(n) + 1);
  obs.values[0] = 0.0;
  const std::vector<double> vars = increment_variances(s0, n);
  CounterRng rng(seed);
  for (int i = 1; i <= n; ++i) {
    const double y = std::sqrt(vars[static_cast<std::size_t>(i - 1)]) * rng.next_normal();
    obs.values[static_cast<std::size_t>(i)] = obs.values[static_cast<std::size_t>(i - 1)] + y;
    // Store the representable difference so x[i] - x[i-1] == y[i] holds exactly.
    obs.increments[static_cast<std::size_t>(i - 1)] =
        obs.values[static_cast<std::size_t>(i)] - obs.values[static_cast<std::size_t>(i - 1)];
  }
  return obs;
}

namespace detail {

inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// CSV schema: header "i,t,x,y"; rows i = 0..n; y empty at i = 0. Values are
// written with 17 significant digits, so the round trip is exact.
inline void write_observations_csv(std::ostream& out, const Observations& obs) {
  out << "i,t,x,y\n";
  const double dn = static_cast<double>(obs.n);
  for (int i = 0; i <= obs.n; ++i) {
    out << i << ',' << detail::fmt_g17(i / dn) << ','
        << detail::fmt_g17(obs.values[static_cast<std::size_t>(i)]) << ',';
    if (i > 0) out << detail::fmt_g17(obs.increments[static_cast<std::size_t>(i - 1)]);
    out << '\n';
  }
}

inline Observations read_observations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("observations csv: empty file");
  if (line == "i,t,x,y\r") line.pop_back();
  if (line != "i,t,x,y") throw ConfigError("observations csv: bad header: " + line);
  Observations obs;
  std::vector<double> xs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // columns: i,t,x,y
    std::size_t p1 = line.find(',');
    std::size_t p2 = line.find(',', p1 + 1);
    std::size_t p3 = line.find(',', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos) {
      throw ConfigError("observations csv: malformed row: " + line);
    }
    try {
      xs.push_back(std::stod(line.substr(p2 + 1, p3 - p2 - 1)));
    } catch (const std::exception&) {
      throw ConfigError("observations csv: bad number in row: " + line);
    }
  }
  if (xs.size() < 2) throw ConfigError("observations csv: need at least rows i=0,1");
  obs.n = static_cast<int>(xs.size()) - 1;
  obs.values = std::move(xs);
  if (obs.values[0] != 0.0) throw ConfigError("observations csv: x at i=0 must be 0");
  obs.increments.resize(static_cast<std::size_t>(obs.n));
  for (int i = 1; i <= obs.n; ++i) {
    obs.increments[static_cast<std::size_t>(i - 1)] =
        obs.values[static_cast<std::size_t>(i)] - obs.values[static_cast<std::size_t>(i - 1)];
  }
  return obs;
}

}  // namespace dispbayes
