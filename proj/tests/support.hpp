#pragma once

#include <vector>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/rng.hpp"

namespace testsupport {

// Random class member on a uniform knot grid: feasible by construction
// (each value drawn uniformly from the slope-constrained window).
inline dispbayes::DispersionFn random_member(const dispbayes::ClassParams& p, int max_segments,
                                             dispbayes::CounterRng& rng) {
  const int segs = 1 + static_cast<int>(rng.next_uniform() * max_segments);
  std::vector<double> knots(static_cast<std::size_t>(segs) + 1);
  for (int k = 0; k <= segs; ++k) {
    knots[static_cast<std::size_t>(k)] = static_cast<double>(k) / segs;
  }
  knots.back() = 1.0;
  const double h = 1.0 / segs;
  std::vector<double> values(knots.size());
  values[0] = p.kappa + rng.next_uniform() * (p.k_upper - p.kappa);
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double lo = std::max(p.kappa, values[k - 1] - p.m_lip * h);
    const double hi = std::min(p.k_upper, values[k - 1] + p.m_lip * h);
    values[k] = lo + rng.next_uniform() * (hi - lo);
  }
  return {knots, values};
}

}  // namespace testsupport
