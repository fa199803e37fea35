#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/errors.hpp"
#include "dispbayes/likelihood.hpp"
#include "dispbayes/net_prior.hpp"
#include "dispbayes/numeric_util.hpp"
#include "dispbayes/rng.hpp"
#include "dispbayes/simulate.hpp"

namespace dispbayes {

// Exact posterior over a finite net; log_post is normalized (log-sum-exp 0).
struct DiscretePosterior {
  const NetPrior* prior = nullptr;
  std::vector<double> log_post;
};

inline DiscretePosterior net_posterior(const NetPrior& net, const Observations& obs) {
  DiscretePosterior post;
  post.prior = &net;
  post.log_post.resize(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    const double lw = net.log_weights[k];
    post.log_post[k] =
        std::isfinite(lw) ? lw + log_likelihood(net.members[k], obs) : lw;
  }
  const double norm = log_sum_exp(post.log_post);
  for (double& lp : post.log_post) lp -= norm;
  return post;
}

struct BallMass {
  double inside = 0.0;
  double outside = 0.0;
  double se_outside = 0.0;  // batch-means error for chains, 0 for exact posteriors
};

inline BallMass posterior_ball_mass(const DiscretePosterior& post, const DispersionFn& s0,
                                    double radius) {
  if (radius <= 0.0) throw BadEps("posterior_ball_mass: radius must be positive");
  if (post.log_post.empty()) throw EmptyChain("posterior_ball_mass: empty posterior");
  double inside = 0.0;
  for (std::size_t k = 0; k < post.log_post.size(); ++k) {
    if (distance(post.prior->members[k], s0, Metric::kL2) < radius) {
      inside += std::exp(post.log_post[k]);
    }
  }
  inside = std::min(inside, 1.0);
  return {inside, 1.0 - inside, 0.0};
}

inline std::vector<double> posterior_mean(const DiscretePosterior& post,
                                          std::span<const double> grid) {
  if (post.log_post.empty()) throw EmptyChain("posterior_mean: empty posterior");
  std::vector<double> mean(grid.size(), 0.0);
  for (std::size_t k = 0; k < post.log_post.size(); ++k) {
    const double w = std::exp(post.log_post[k]);
    if (w == 0.0) continue;
    const DispersionFn& s = post.prior->members[k];
    for (std::size_t g = 0; g < grid.size(); ++g) mean[g] += w * s(grid[g]);
  }
  return mean;
}

// Lower weighted median of the L2 distances to s0.
inline double posterior_median_distance(const DiscretePosterior& post, const DispersionFn& s0) {
  if (post.log_post.empty()) throw EmptyChain("posterior_median_distance: empty posterior");
  std::vector<std::pair<double, double>> dw(post.log_post.size());
  for (std::size_t k = 0; k < post.log_post.size(); ++k) {
    dw[k] = {distance(post.prior->members[k], s0, Metric::kL2), std::exp(post.log_post[k])};
  }
  std::sort(dw.begin(), dw.end());
  double cum = 0.0;
  for (const auto& [d, w] : dw) {
    cum += w;
    if (cum >= 0.5) return d;
  }
  return dw.back().first;
}

// ---------------------------------------------------------------------------
// Metropolis sampler over the continuous knot-value polytope
//   { v in [kappa, k_upper]^K : |v_{j+1} - v_j| <= m_lip * h }
// with a uniform prior on the polytope (the continuum limit of the uniform
// net prior) and single-site Gaussian random-walk proposals. Proposals that
// leave the polytope are rejected outright, which keeps detailed balance for
// the symmetric proposal.
// ---------------------------------------------------------------------------

struct McmcConfig {
  long iters = 50000;
  long burn_in = -1;    // -1: 20% of iters
  long thin = 10;
  double step = -1.0;   // -1: 0.1 * (k_upper - kappa)
  SeedRecord seed;
  bool likelihood_off = false;  // sample the prior alone (debug)

  long effective_burn_in() const { return burn_in >= 0 ? burn_in : iters / 5; }
};

struct McmcChain {
  std::vector<DispersionFn> states;   // post burn-in, thinned
  std::vector<long> state_iters;      // iteration index of each kept state
  std::vector<bool> state_accepted;   // whether that iteration's proposal was accepted
  double acceptance_rate = 0.0;
  long accepted = 0;
  long proposals = 0;
  McmcConfig config;
  std::vector<double> knots;
};

inline McmcChain mcmc_posterior(const ClassParams& params, int knot_count,
                                const Observations& obs, McmcConfig config) {
  params.validate();
  if (knot_count < 2) throw ConfigError("mcmc_posterior: knot_count >= 2 required");
  if (config.iters <= 0 || config.effective_burn_in() >= config.iters) {
    throw ConfigError("mcmc_posterior: need iters > burn_in >= 0");
  }
  if (config.thin <= 0) throw ConfigError("mcmc_posterior: thin must be positive");
  const double step =
      config.step > 0.0 ? config.step : 0.1 * (params.k_upper - params.kappa);
  if (!(step > 0.0)) throw ConfigError("mcmc_posterior: step must be positive");

  const std::size_t kn = static_cast<std::size_t>(knot_count);
  std::vector<double> knots(kn);
  for (std::size_t j = 0; j < kn; ++j) {
    knots[j] = static_cast<double>(j) / static_cast<double>(kn - 1);
  }
  knots.back() = 1.0;
  const double h = 1.0 / static_cast<double>(kn - 1);
  const double max_jump = params.m_lip * h * (1.0 + detail::kBoundarySlack);

  std::vector<double> v(kn, 0.5 * (params.kappa + params.k_upper));
  std::vector<double> cand(kn);

  const double dn = static_cast<double>(obs.n);
  std::vector<double> vars(static_cast<std::size_t>(obs.n));
  auto interval_var = [&](const std::vector<double>& vals, int i) {
    return detail::pwl_integral_sq(knots, vals, (i - 1) / dn, i / dn);
  };
  auto increment_loglik = [&](double var, double y) {
    constexpr double log_two_pi = 1.8378770664093454836;
    return -0.5 * (log_two_pi + std::log(var)) - y * y / (2.0 * var);
  };
  auto full_loglik = [&](const std::vector<double>& vals) {
    detail::StableSum acc;
    for (int i = 1; i <= obs.n; ++i) {
      const double var = interval_var(vals, i);
      vars[static_cast<std::size_t>(i - 1)] = var;
      acc.add(increment_loglik(var, obs.increments[static_cast<std::size_t>(i - 1)]));
    }
    return acc.value();
  };

  double loglik = config.likelihood_off ? 0.0 : full_loglik(v);
  if (!std::isfinite(loglik)) throw NonFiniteLikelihood("mcmc_posterior: non-finite start");

  CounterRng rng(config.seed);
  McmcChain chain;
  chain.config = config;
  chain.config.step = step;
  chain.knots = knots;
  const long burn = config.effective_burn_in();
  chain.states.reserve(static_cast<std::size_t>((config.iters - burn) / config.thin) + 1);

  for (long it = 0; it < config.iters; ++it) {
    ++chain.proposals;
    const std::size_t site =
        std::min<std::size_t>(static_cast<std::size_t>(rng.next_uniform() * kn), kn - 1);
    const double proposal = v[site] + step * rng.next_normal();
    const double u_accept = rng.next_uniform();  // drawn unconditionally: fixed stream layout

    bool feasible = proposal >= params.kappa && proposal <= params.k_upper;
    if (feasible && site > 0 && std::abs(proposal - v[site - 1]) > max_jump) feasible = false;
    if (feasible && site + 1 < kn && std::abs(proposal - v[site + 1]) > max_jump) feasible = false;

    bool accepted = false;
    if (feasible) {
      double delta = 0.0;
      if (!config.likelihood_off) {
        cand = v;
        cand[site] = proposal;
        const double t_lo = site > 0 ? knots[site - 1] : 0.0;
        const double t_hi = site + 1 < kn ? knots[site + 1] : 1.0;
        const int i_lo = std::max(1, static_cast<int>(std::floor(t_lo * dn)) + 1);
        const int i_hi = std::min(obs.n, static_cast<int>(std::ceil(t_hi * dn)));
        detail::StableSum d;
        for (int i = i_lo; i <= i_hi; ++i) {
          const double y = obs.increments[static_cast<std::size_t>(i - 1)];
          const double var_new = interval_var(cand, i);
          d.add(increment_loglik(var_new, y) -
                increment_loglik(vars[static_cast<std::size_t>(i - 1)], y));
        }
        delta = d.value();
      }
      if (delta >= 0.0 || u_accept < std::exp(delta)) {
        accepted = true;
        v[site] = proposal;
        if (!config.likelihood_off) {
          const double t_lo = site > 0 ? knots[site - 1] : 0.0;
          const double t_hi = site + 1 < kn ? knots[site + 1] : 1.0;
          const int i_lo = std::max(1, static_cast<int>(std::floor(t_lo * dn)) + 1);
          const int i_hi = std::min(obs.n, static_cast<int>(std::ceil(t_hi * dn)));
          for (int i = i_lo; i <= i_hi; ++i) {
            vars[static_cast<std::size_t>(i - 1)] = interval_var(v, i);
          }
          loglik += delta;
        }
        ++chain.accepted;
      }
    }
    // Re-anchor the running log-likelihood now and then to stop drift.
    if (!config.likelihood_off && (it & 0xFFF) == 0xFFF) loglik = full_loglik(v);

    if (it >= burn && (it - burn) % config.thin == 0) {
      chain.states.emplace_back(knots, v);
      chain.state_iters.push_back(it);
      chain.state_accepted.push_back(accepted);
    }
  }
  chain.acceptance_rate =
      static_cast<double>(chain.accepted) / static_cast<double>(chain.proposals);
  return chain;
}

inline BallMass posterior_ball_mass(const McmcChain& chain, const DispersionFn& s0,
                                    double radius) {
  if (radius <= 0.0) throw BadEps("posterior_ball_mass: radius must be positive");
  if (chain.states.empty()) throw EmptyChain("posterior_ball_mass: empty chain");
  const std::size_t n = chain.states.size();
  std::vector<double> outside_flags(n);
  for (std::size_t k = 0; k < n; ++k) {
    outside_flags[k] = distance(chain.states[k], s0, Metric::kL2) >= radius ? 1.0 : 0.0;
  }
  const double outside =
      std::accumulate(outside_flags.begin(), outside_flags.end(), 0.0) / static_cast<double>(n);
  // Batch-means standard error, 20 batches.
  const std::size_t nb = std::min<std::size_t>(20, n);
  std::vector<double> bm(nb, 0.0);
  std::vector<std::size_t> bc(nb, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t b = k * nb / n;
    bm[b] += outside_flags[k];
    ++bc[b];
  }
  double var = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    bm[b] /= static_cast<double>(bc[b]);
    const double d = bm[b] - outside;
    var += d * d;
  }
  const double se =
      nb > 1 ? std::sqrt(var / static_cast<double>(nb - 1) / static_cast<double>(nb)) : 0.0;
  return {1.0 - outside, outside, se};
}

inline std::vector<double> posterior_mean(const McmcChain& chain, std::span<const double> grid) {
  if (chain.states.empty()) throw EmptyChain("posterior_mean: empty chain");
  std::vector<double> mean(grid.size(), 0.0);
  for (const DispersionFn& s : chain.states) {
    for (std::size_t g = 0; g < grid.size(); ++g) mean[g] += s(grid[g]);
  }
  for (double& m : mean) m /= static_cast<double>(chain.states.size());
  return mean;
}

inline double posterior_median_distance(const McmcChain& chain, const DispersionFn& s0) {
  if (chain.states.empty()) throw EmptyChain("posterior_median_distance: empty chain");
  std::vector<double> d(chain.states.size());
  for (std::size_t k = 0; k < chain.states.size(); ++k) {
    d[k] = distance(chain.states[k], s0, Metric::kL2);
  }
  return median(std::move(d));
}

// ---------------------------------------------------------------------------
// Discrete-state Metropolis chain over a net, used to cross-check
// net_posterior. Proposals mix a uniform draw over all members with a
// single-knot one-level lattice move; both components are symmetric, so the
// plain Metropolis ratio applies.
// ---------------------------------------------------------------------------

struct DiscreteChain {
  std::vector<double> freq;  // visit frequency per member, post burn-in
  double acceptance_rate = 0.0;
  long iters = 0;
};

inline DiscreteChain discrete_net_chain(const NetPrior& net, const Observations& obs,
                                        long iters, long burn_in, SeedRecord seed) {
  if (net.size() == 0) throw EmptyChain("discrete_net_chain: empty net");
  if (iters <= 0 || burn_in < 0 || burn_in >= iters) {
    throw ConfigError("discrete_net_chain: need iters > burn_in >= 0");
  }
  // Unnormalized log posterior per member.
  std::vector<double> lp(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    lp[k] = net.log_weights[k] + log_likelihood(net.members[k], obs);
  }
  // Lattice lookup: level path -> member index.
  const std::size_t path_len = net.level_paths.front().size();
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(net.size() * 2);
  auto key_of = [&](const std::vector<int>& path) {
    std::string key(path.size() * sizeof(int), '\0');
    std::memcpy(key.data(), path.data(), key.size());
    return key;
  };
  for (std::size_t k = 0; k < net.size(); ++k) index.emplace(key_of(net.level_paths[k]), k);

  CounterRng rng(seed);
  std::size_t state = 0;
  long accepted = 0;
  DiscreteChain out;
  out.freq.assign(net.size(), 0.0);
  out.iters = iters;
  std::vector<int> scratch;
  for (long it = 0; it < iters; ++it) {
    std::size_t cand = state;
    bool have_candidate = false;
    if (rng.next_uniform() < 0.5) {
      cand = std::min<std::size_t>(static_cast<std::size_t>(rng.next_uniform() * net.size()),
                                   net.size() - 1);
      have_candidate = true;
    } else {
      const std::size_t site = std::min<std::size_t>(
          static_cast<std::size_t>(rng.next_uniform() * path_len), path_len - 1);
      const int delta = rng.next_uniform() < 0.5 ? -1 : 1;
      scratch = net.level_paths[state];
      scratch[static_cast<std::size_t>(site)] += delta;
      const auto it2 = index.find(key_of(scratch));
      if (it2 != index.end()) {
        cand = it2->second;
        have_candidate = true;
      }
    }
    const double u = rng.next_uniform();  // unconditional draw: fixed stream layout
    if (have_candidate && (lp[cand] >= lp[state] || u < std::exp(lp[cand] - lp[state]))) {
      state = cand;
      ++accepted;
    }
    if (it >= burn_in) out.freq[state] += 1.0;
  }
  const double kept = static_cast<double>(iters - burn_in);
  for (double& f : out.freq) f /= kept;
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(iters);
  return out;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  double tv = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
  return 0.5 * tv;
}

}  // namespace dispbayes
