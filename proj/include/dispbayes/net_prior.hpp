#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/errors.hpp"
#include "dispbayes/numeric_util.hpp"

namespace dispbayes {

inline constexpr std::size_t kDefaultNetCap = 1000000;

// Finite sieve prior: a sup-norm eps-net of the class, uniform log-weights.
struct NetPrior {
  std::vector<DispersionFn> members;
  std::vector<std::vector<int>> level_paths;  // value-grid level index per knot
  std::vector<double> log_weights;            // normalized, log-sum-exp = 0
  double resolution = 0.0;
  ClassParams params;

  std::size_t size() const { return members.size(); }
};

namespace detail {

struct NetLattice {
  std::vector<double> knots;
  std::vector<int> max_move;  // per segment, in value-grid steps
  int levels = 0;             // value grid size
  double value_step = 0.0;
};

inline NetLattice net_lattice(const ClassParams& p, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw BadEps("net lattice: eps must be positive");
  NetLattice lat;
  lat.value_step = eps / 2.0;
  const double h = std::min(eps / (2.0 * p.m_lip), 1.0);
  if (h < 1e-6) {
    throw NetTooLarge("net lattice: knot spacing below 1e-6; coarsen eps or reduce m_lip");
  }
  lat.knots.push_back(0.0);
  for (int k = 1; k * h < 1.0 - 1e-9 * h; ++k) lat.knots.push_back(k * h);
  lat.knots.push_back(1.0);
  lat.levels = static_cast<int>(std::floor((p.k_upper - p.kappa) / lat.value_step + 1e-9)) + 1;
  lat.max_move.resize(lat.knots.size() - 1);
  for (std::size_t k = 0; k + 1 < lat.knots.size(); ++k) {
    // Budget from the actual segment length, so the class slope bound holds
    // on the clamped final segment as well.
    const double dt = lat.knots[k + 1] - lat.knots[k];
    lat.max_move[k] = static_cast<int>(std::floor(p.m_lip * dt / lat.value_step + 1e-9));
  }
  return lat;
}

// Saturating path count over the lattice; anything above cap reads cap+1.
inline std::uint64_t count_net_paths(const NetLattice& lat, std::uint64_t cap) {
  const std::uint64_t sat = cap + 1;
  std::vector<std::uint64_t> cur(static_cast<std::size_t>(lat.levels), 1);
  for (int move : lat.max_move) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(lat.levels), 0);
    for (int j = 0; j < lat.levels; ++j) {
      const std::uint64_t c = cur[static_cast<std::size_t>(j)];
      if (c == 0) continue;
      for (int d = -move; d <= move; ++d) {
        const int q = j + d;
        if (q < 0 || q >= lat.levels) continue;
        auto& slot = next[static_cast<std::size_t>(q)];
        slot = (slot + c > sat) ? sat : slot + c;
      }
    }
    cur.swap(next);
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : cur) total = (total + c > sat) ? sat : total + c;
  return total;
}

}  // namespace detail

// Remark-2-style construction: knots spaced h = eps/(2 m_lip) (final knot
// clamped to 1), knot values on the grid kappa + j * eps/2, adjacent values
// moving at most one grid step per full segment. Uniform weights. The result
// is a sup-norm eps-net of the class (certified by the covering property
// test, not by a proof).
inline NetPrior build_net(const ClassParams& params, double eps,
                          std::size_t member_cap = kDefaultNetCap) {
  params.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) throw BadEps("build_net: eps must be positive");
  const detail::NetLattice lat = detail::net_lattice(params, eps);
  const std::uint64_t count = detail::count_net_paths(lat, member_cap);
  if (count > member_cap) {
    std::ostringstream msg;
    msg << "build_net: net would exceed the member cap (" << member_cap
        << "); coarsen eps or use the MCMC backend";
    throw NetTooLarge(msg.str());
  }

  NetPrior net;
  net.resolution = eps;
  net.params = params;
  net.members.reserve(count);
  net.level_paths.reserve(count);

  const std::size_t nknots = lat.knots.size();
  std::vector<int> path(nknots);
  std::vector<double> values(nknots);
  // Depth-first enumeration in lexicographic level order: deterministic.
  auto emit = [&](auto&& self, std::size_t k) -> void {
    if (k == nknots) {
      for (std::size_t q = 0; q < nknots; ++q) {
        values[q] = params.kappa + path[q] * lat.value_step;
      }
      net.members.emplace_back(lat.knots, values);
      net.level_paths.push_back(path);
      return;
    }
    if (k == 0) {
      for (int j = 0; j < lat.levels; ++j) {
        path[0] = j;
        self(self, 1);
      }
      return;
    }
    const int move = lat.max_move[k - 1];
    for (int d = -move; d <= move; ++d) {
      const int q = path[k - 1] + d;
      if (q < 0 || q >= lat.levels) continue;
      path[k] = q;
      self(self, k + 1);
    }
  };
  emit(emit, 0);

  net.log_weights.assign(net.members.size(), -std::log(static_cast<double>(net.members.size())));
  return net;
}

// log Pi(members within eps of s0 under the metric); -inf when none.
inline double log_small_ball_mass(const NetPrior& net, const DispersionFn& s0, double eps,
                                  Metric metric) {
  if (!(eps > 0.0)) throw BadEps("small_ball_mass: eps must be positive");
  std::vector<double> hits;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (distance(net.members[k], s0, metric) < eps) hits.push_back(net.log_weights[k]);
  }
  if (hits.empty()) return -std::numeric_limits<double>::infinity();
  return log_sum_exp(hits);
}

// Dyadic peeling of the complement of U_{s0,eps}: shell j collects members
// with 2^j eps^2 <= L2_distance^2 < 2^{j+1} eps^2 (closed left edge).
struct ShellIndex {
  static constexpr int kInsideU = -1;
  int m_eps = 0;
  std::vector<int> shell;  // per member: kInsideU or shell index in [0, m_eps]
};

inline ShellIndex shell_partition(const NetPrior& net, const DispersionFn& s0, double eps) {
  if (!(eps > 0.0)) throw BadEps("shell_partition: eps must be positive");
  ShellIndex idx;
  const double eps_sq = eps * eps;
  const double four_ksq = 4.0 * net.params.k_upper * net.params.k_upper;
  int m = 1;
  while (std::ldexp(eps_sq, m) < four_ksq) ++m;
  idx.m_eps = m;
  idx.shell.resize(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    const double dsq = distance_sq_l2(net.members[k], s0);
    if (dsq < eps_sq) {
      idx.shell[k] = ShellIndex::kInsideU;
      continue;
    }
    int j = 0;
    while (j < idx.m_eps && dsq >= std::ldexp(eps_sq, j + 1)) ++j;
    idx.shell[k] = j;
  }
  return idx;
}

}  // namespace dispbayes
