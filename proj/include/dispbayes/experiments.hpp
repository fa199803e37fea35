#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/errors.hpp"
#include "dispbayes/likelihood.hpp"
#include "dispbayes/net_prior.hpp"
#include "dispbayes/numeric_util.hpp"
#include "dispbayes/posterior.hpp"
#include "dispbayes/quadrature.hpp"
#include "dispbayes/rng.hpp"
#include "dispbayes/simulate.hpp"

namespace dispbayes {

// Frozen constants for the verification suite (fitted once, then pinned).
// kSmallBallCBar bounds -log Pi(V_{s0,eps_n}) / (n eps_n^2) for the default
// net construction; kKlBoundOffset is the additive constant in the summed
// KL bound check.
inline constexpr double kSmallBallCBar = 0.1;
inline constexpr double kKlBoundOffset = 1.0;

// Neighborhood scale: eps_tilde = c * n^{-1/3} * log(n).
inline double eps_tilde(double c, int n) {
  return c * std::pow(static_cast<double>(n), -1.0 / 3.0) * std::log(static_cast<double>(n));
}

// Knot count the sieve uses at resolution eps (same lattice as build_net).
inline int sieve_knot_count(const ClassParams& params, double eps) {
  return static_cast<int>(detail::net_lattice(params, eps).knots.size());
}

// ---------------------------------------------------------------------------
// Ordinary least squares line fit.
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS of residuals
};

inline SlopeFit slope_fit(std::span<const std::pair<double, double>> pts) {
  if (pts.size() < 3) throw DegenerateDesign("slope_fit: need at least 3 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].first == pts[j].first) {
        throw DegenerateDesign("slope_fit: duplicate x value");
      }
    }
  }
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

// ---------------------------------------------------------------------------
// Contraction benchmark.
// ---------------------------------------------------------------------------

enum class Backend { kNet, kMcmc };

struct ExperimentConfig {
  DispersionFn s0 = DispersionFn::constant(1.0);
  ClassParams params;
  std::vector<int> n_grid = {250, 500, 1000, 2000, 4000, 8000};
  int replicates = 20;
  double eps_const = 0.5;                              // c in eps_tilde
  std::vector<double> radius_multipliers = {1, 2, 4, 8};
  Backend backend = Backend::kMcmc;
  std::uint64_t base_seed = 0;
  long mcmc_iters = 30000;
  long mcmc_thin = 10;
  double mcmc_step = -1.0;  // default inside mcmc_posterior
  int workers = 1;
  std::size_t net_cap = kDefaultNetCap;

  void validate() const {
    params.validate();
    if (n_grid.empty()) throw ConfigError("config: empty n_grid");
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
      if (n_grid[k] < 1) throw ConfigError("config: n must be >= 1");
      if (k > 0 && n_grid[k] <= n_grid[k - 1]) {
        throw ConfigError("config: n_grid must be strictly increasing");
      }
    }
    if (replicates < 1) throw ConfigError("config: replicates >= 1 required");
    if (!(eps_const > 0.0)) throw ConfigError("config: eps_const must be positive");
    if (radius_multipliers.empty()) throw ConfigError("config: empty radius_multipliers");
    for (double m : radius_multipliers) {
      if (!(m > 0.0)) throw ConfigError("config: radius multipliers must be positive");
    }
    if (workers < 1) throw ConfigError("config: workers >= 1 required");
    if (!class_membership(s0, params).member) {
      throw ConfigError("config: s0 is not a class member under params");
    }
  }
};

struct ExperimentRow {
  int n = 0;
  int replicate = 0;
  double median_l2 = 0.0;
  std::vector<double> outside_mass;  // one per radius multiplier
  double runtime_s = 0.0;            // in-memory only; not part of artifact files
  std::uint64_t stream = 0;
};

struct PerNSummary {
  int n = 0;
  double eps_tilde = 0.0;
  double median_of_medians = 0.0;
  std::vector<double> mean_outside;
  std::vector<double> se_outside;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;      // ordered by (n, replicate)
  std::vector<PerNSummary> per_n;
  SlopeFit slope_fit;                   // NaN when not fittable
};

namespace detail {

inline std::uint64_t replicate_stream(int n, int replicate) {
  return derive_stream(derive_stream(0, static_cast<std::uint64_t>(n)),
                       static_cast<std::uint64_t>(replicate));
}

}  // namespace detail

// Simulates from s0 and measures how fast the posterior concentrates: for
// each (n, replicate) the posterior median L2 error and the mass outside
// radius mult * eps_tilde(n) for each multiplier, then an OLS slope of
// log median error against log n. Deterministic given base_seed, for any
// worker count.
inline ExperimentResult contraction_benchmark(
    const ExperimentConfig& config,
    const std::function<void(const ExperimentRow&)>& on_row = nullptr) {
  config.validate();
  ExperimentResult result;
  result.config = config;

  // Nets are shared per n for the enumeration backend.
  std::vector<NetPrior> nets;
  if (config.backend == Backend::kNet) {
    nets.reserve(config.n_grid.size());
    for (int n : config.n_grid) {
      nets.push_back(build_net(config.params, eps_tilde(config.eps_const, n), config.net_cap));
    }
  }

  const std::size_t tasks = config.n_grid.size() * static_cast<std::size_t>(config.replicates);
  result.rows.resize(tasks);
  std::atomic<std::size_t> next{0};
  std::mutex row_mutex;
  std::exception_ptr first_error;

  auto run_task = [&](std::size_t t) {
    const std::size_t n_idx = t / static_cast<std::size_t>(config.replicates);
    const int rep = static_cast<int>(t % static_cast<std::size_t>(config.replicates));
    const int n = config.n_grid[n_idx];
    const double eps = eps_tilde(config.eps_const, n);
    const std::uint64_t stream = detail::replicate_stream(n, rep);
    const auto t0 = std::chrono::steady_clock::now();

    const Observations obs =
        sample_observations(config.s0, n, SeedRecord{config.base_seed, stream});

    ExperimentRow row;
    row.n = n;
    row.replicate = rep;
    row.stream = stream;
    row.outside_mass.reserve(config.radius_multipliers.size());
    if (config.backend == Backend::kNet) {
      const DiscretePosterior post = net_posterior(nets[n_idx], obs);
      row.median_l2 = posterior_median_distance(post, config.s0);
      for (double mult : config.radius_multipliers) {
        row.outside_mass.push_back(posterior_ball_mass(post, config.s0, mult * eps).outside);
      }
    } else {
      McmcConfig mc;
      mc.iters = config.mcmc_iters;
      mc.thin = config.mcmc_thin;
      mc.step = config.mcmc_step;
      mc.seed = SeedRecord{config.base_seed, derive_stream(stream, 1)};
      const McmcChain chain =
          mcmc_posterior(config.params, sieve_knot_count(config.params, eps), obs, mc);
      row.median_l2 = posterior_median_distance(chain, config.s0);
      for (double mult : config.radius_multipliers) {
        row.outside_mass.push_back(posterior_ball_mass(chain, config.s0, mult * eps).outside);
      }
    }
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_row) {
      const std::lock_guard<std::mutex> lock(row_mutex);
      on_row(row);
    }
    result.rows[t] = std::move(row);
  };

  const unsigned thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), tasks);
  if (thread_count <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    auto worker = [&] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks) return;
        try {
          run_task(t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(row_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned w = 0; w < thread_count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Per-n aggregation over replicates.
  for (std::size_t n_idx = 0; n_idx < config.n_grid.size(); ++n_idx) {
    PerNSummary s;
    s.n = config.n_grid[n_idx];
    s.eps_tilde = eps_tilde(config.eps_const, s.n);
    std::vector<double> medians;
    medians.reserve(static_cast<std::size_t>(config.replicates));
    s.mean_outside.assign(config.radius_multipliers.size(), 0.0);
    s.se_outside.assign(config.radius_multipliers.size(), 0.0);
    for (int rep = 0; rep < config.replicates; ++rep) {
      const ExperimentRow& row =
          result.rows[n_idx * static_cast<std::size_t>(config.replicates) +
                      static_cast<std::size_t>(rep)];
      medians.push_back(row.median_l2);
      for (std::size_t m = 0; m < s.mean_outside.size(); ++m) {
        s.mean_outside[m] += row.outside_mass[m];
      }
    }
    for (double& v : s.mean_outside) v /= static_cast<double>(config.replicates);
    if (config.replicates > 1) {
      for (std::size_t m = 0; m < s.se_outside.size(); ++m) {
        double var = 0.0;
        for (int rep = 0; rep < config.replicates; ++rep) {
          const ExperimentRow& row =
              result.rows[n_idx * static_cast<std::size_t>(config.replicates) +
                          static_cast<std::size_t>(rep)];
          const double d = row.outside_mass[m] - s.mean_outside[m];
          var += d * d;
        }
        s.se_outside[m] = std::sqrt(var / (config.replicates - 1.0) /
                                    static_cast<double>(config.replicates));
      }
    }
    s.median_of_medians = median(std::move(medians));
    result.per_n.push_back(std::move(s));
  }

  if (result.per_n.size() >= 3) {
    bool fittable = true;
    std::vector<std::pair<double, double>> pts;
    for (const PerNSummary& s : result.per_n) {
      if (!(s.median_of_medians > 0.0)) {
        fittable = false;
        break;
      }
      pts.emplace_back(std::log(static_cast<double>(s.n)), std::log(s.median_of_medians));
    }
    if (fittable) result.slope_fit = slope_fit(pts);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Lemma-conclusion checks.
// ---------------------------------------------------------------------------

namespace detail {

// Composite Gauss-Legendre over the merged knot panels; the integrands below
// are smooth rational functions of (s, s0) on each panel.
template <typename F>
double integrate_over_merged(const DispersionFn& a, const DispersionFn& b, F&& f, int nodes = 32) {
  const GaussLegendre rule(nodes);
  const std::vector<double> panels = merged_knots(a, b);
  return integrate_panels(std::forward<F>(f), panels, rule);
}

}  // namespace detail

struct RiemannReport {
  double lhs = 0.0;            // (1/2n) sum [log(1+f_i) - f_i]
  double limit_rhs = 0.0;      // (1/2) int [log(1+g) - g],  g = (s0^2-s^2)/s^2
  double quadratic_rhs = 0.0;  // -(1/2) int g^2
  double residual = 0.0;       // |lhs - limit_rhs|, order 1/n for fixed (s, s0)
  double quadratic_gap = 0.0;  // |lhs - quadratic_rhs|, includes the cubic-in-f term
  bool cubic_bound_ok = true;  // per-term |log(1+f)-f+f^2/2| <= |f|^3 whenever |f| <= 1/2
  double sup_distance = 0.0;
};

inline RiemannReport riemann_identity_report(const DispersionFn& s, const DispersionFn& s0,
                                             int n) {
  if (n < 1) throw ConfigError("riemann_identity: n >= 1 required");
  RiemannReport rep;
  const std::vector<double> f = f_values(s, s0, n);
  detail::StableSum lhs;
  for (double fi : f) {
    lhs.add(std::log1p(fi) - fi);
    if (std::abs(fi) <= 0.5) {
      const double gap = std::abs(std::log1p(fi) - fi + 0.5 * fi * fi);
      if (gap > std::abs(fi * fi * fi) * (1.0 + 1e-9)) rep.cubic_bound_ok = false;
    }
  }
  rep.lhs = lhs.value() * 0.5 / static_cast<double>(n);
  auto g = [&](double u) {
    const double a = s0(u);
    const double b = s(u);
    return (a * a - b * b) / (b * b);
  };
  rep.limit_rhs =
      0.5 * detail::integrate_over_merged(s, s0, [&](double u) {
        const double gu = g(u);
        return std::log1p(gu) - gu;
      });
  rep.quadratic_rhs = -0.5 * detail::integrate_over_merged(s, s0, [&](double u) {
    const double gu = g(u);
    return gu * gu;
  });
  rep.residual = std::abs(rep.lhs - rep.limit_rhs);
  rep.quadratic_gap = std::abs(rep.lhs - rep.quadratic_rhs);
  rep.sup_distance = distance(s, s0, Metric::kSup);
  return rep;
}

inline double verify_riemann_identity(const DispersionFn& s, const DispersionFn& s0, int n) {
  return riemann_identity_report(s, s0, n).residual;
}

// Lower bound of the deterministic term when ||s - s0||_inf < eps.
inline double riemann_lower_bound(const ClassParams& p, double eps) {
  return -2.0 * p.k_upper * p.k_upper * eps * eps / std::pow(p.kappa, 4);
}

// Largest c with log(1+x) - x <= -c x^2 on the f-range attainable in the
// class, [kappa^2/K^2 - 1, K^2/kappa^2 - 1]; found by a deterministic scan.
inline double kl_quadratic_constant(const ClassParams& p) {
  const double lo = p.kappa * p.kappa / (p.k_upper * p.k_upper) - 1.0;
  const double hi = p.k_upper * p.k_upper / (p.kappa * p.kappa) - 1.0;
  const int grid = 200001;
  double c = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid; ++k) {
    const double x = lo + (hi - lo) * k / (grid - 1.0);
    const double h = std::abs(x) < 1e-8 ? 0.5 : (x - std::log1p(x)) / (x * x);
    c = std::min(c, h);
  }
  return c;
}

struct KlBoundReport {
  double c0_tilde = 0.0;    // quadratic constant used in the bound
  double offset = 0.0;      // additive constant (kKlBoundOffset)
  double min_slack = 0.0;   // min over shell members of bound - sum E[Z]; >= 0 passes
  std::size_t members_checked = 0;
};

// Checks sum_i E[Z_{i,n,s}] <= -(c0 kappa^2 / K^4) 2^j eps^2 n + C0 on every
// shell member of the net.
inline KlBoundReport verify_kl_bound(const NetPrior& net, const DispersionFn& s0, double eps,
                                     int n) {
  KlBoundReport rep;
  rep.c0_tilde = kl_quadratic_constant(net.params);
  rep.offset = kKlBoundOffset;
  rep.min_slack = std::numeric_limits<double>::infinity();
  const ShellIndex shells = shell_partition(net, s0, eps);
  const double coeff = rep.c0_tilde * net.params.kappa * net.params.kappa /
                       std::pow(net.params.k_upper, 4);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const int j = shells.shell[k];
    if (j == ShellIndex::kInsideU) continue;
    const std::vector<double> f = f_values(net.members[k], s0, n);
    detail::StableSum ez;
    for (double fi : f) ez.add(0.5 * (std::log1p(fi) - fi));
    const double bound =
        -coeff * std::ldexp(eps * eps, j) * static_cast<double>(n) + rep.offset;
    rep.min_slack = std::min(rep.min_slack, bound - ez.value());
    ++rep.members_checked;
  }
  return rep;
}

struct MartingaleSupReport {
  std::vector<double> per_replicate_sup;
  double p95 = 0.0;
  double p95_over_eps_sq = 0.0;
  std::size_t restricted_count = 0;  // members inside V_{s0, eps_tilde}
  std::size_t checked_count = 0;     // after subsampling
};

// Empirical version of the martingale-part sup bound: the 95th percentile
// over replicates of max_{s in V} |(1/n) sum w_i f_s(z_i)|, reported as a
// multiple of eps_tilde^2. The max is over a seeded subsample, so it is a
// lower bound on the true sup.
inline MartingaleSupReport verify_martingale_sup(const NetPrior& net, const DispersionFn& s0,
                                                 int n, double eps_til, int reps,
                                                 SeedRecord seed,
                                                 std::size_t max_members = 10000) {
  if (reps < 1) throw ConfigError("verify_martingale_sup: reps >= 1 required");
  std::vector<std::size_t> restricted;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (distance(net.members[k], s0, Metric::kSup) < eps_til) restricted.push_back(k);
  }
  MartingaleSupReport rep;
  rep.restricted_count = restricted.size();
  if (restricted.empty()) {
    throw EmptyRestriction("verify_martingale_sup: no net member inside V; coarsen eps");
  }
  CounterRng pick(SeedRecord{seed.base, derive_stream(seed.stream, 0x5eedu)});
  if (restricted.size() > max_members) {
    // Partial Fisher-Yates, deterministic.
    for (std::size_t k = 0; k < max_members; ++k) {
      const std::size_t j =
          k + static_cast<std::size_t>(pick.next_uniform() * (restricted.size() - k));
      std::swap(restricted[k], restricted[std::min(j, restricted.size() - 1)]);
    }
    restricted.resize(max_members);
  }
  rep.checked_count = restricted.size();

  // w vectors per replicate, then one pass per member.
  std::vector<std::vector<double>> w(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const Observations obs = sample_observations(
        s0, n, SeedRecord{seed.base, derive_stream(seed.stream, static_cast<std::uint64_t>(r))});
    w[static_cast<std::size_t>(r)] = w_values(obs, s0);
  }
  rep.per_replicate_sup.assign(static_cast<std::size_t>(reps), 0.0);
  for (std::size_t m : restricted) {
    const std::vector<double> f = f_values(net.members[m], s0, n);
    for (int r = 0; r < reps; ++r) {
      const std::vector<double>& wr = w[static_cast<std::size_t>(r)];
      double dot = 0.0;
      for (int i = 0; i < n; ++i) {
        dot += wr[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
      }
      const double stat = std::abs(dot) / static_cast<double>(n);
      auto& cur = rep.per_replicate_sup[static_cast<std::size_t>(r)];
      cur = std::max(cur, stat);
    }
  }
  rep.p95 = percentile(rep.per_replicate_sup, 0.95);
  rep.p95_over_eps_sq = rep.p95 / (eps_til * eps_til);
  return rep;
}

struct RatioTailReport {
  double fraction = 0.0;  // replicates whose sup log-ratio reached the threshold
  std::size_t restricted_count = 0;
  std::size_t checked_count = 0;
};

// Empirical tail of the likelihood ratio over the complement of U_{s0,eps_n}:
// fraction of replicates with max_{s in U^c} log R_n(s) >= -c1 n eps_n^2.
inline RatioTailReport verify_ratio_tail(const NetPrior& net, const DispersionFn& s0, int n,
                                         double eps_n, double c1, int reps, SeedRecord seed,
                                         std::size_t max_members = 10000) {
  if (reps < 1) throw ConfigError("verify_ratio_tail: reps >= 1 required");
  std::vector<std::size_t> restricted;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (distance(net.members[k], s0, Metric::kL2) >= eps_n) restricted.push_back(k);
  }
  RatioTailReport rep;
  rep.restricted_count = restricted.size();
  if (restricted.empty()) {
    throw EmptyRestriction("verify_ratio_tail: no net member outside U; refine eps");
  }
  CounterRng pick(SeedRecord{seed.base, derive_stream(seed.stream, 0x7a11u)});
  if (restricted.size() > max_members) {
    for (std::size_t k = 0; k < max_members; ++k) {
      const std::size_t j =
          k + static_cast<std::size_t>(pick.next_uniform() * (restricted.size() - k));
      std::swap(restricted[k], restricted[std::min(j, restricted.size() - 1)]);
    }
    restricted.resize(max_members);
  }
  rep.checked_count = restricted.size();

  std::vector<std::vector<double>> w(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const Observations obs = sample_observations(
        s0, n, SeedRecord{seed.base, derive_stream(seed.stream, static_cast<std::uint64_t>(r))});
    w[static_cast<std::size_t>(r)] = w_values(obs, s0);
  }
  // log R_n(s) = (1/2) <w, f_s> + (1/2) sum [log(1+f_i) - f_i].
  std::vector<double> max_log_ratio(static_cast<std::size_t>(reps),
                                    -std::numeric_limits<double>::infinity());
  for (std::size_t m : restricted) {
    const std::vector<double> f = f_values(net.members[m], s0, n);
    detail::StableSum det;
    for (double fi : f) det.add(std::log1p(fi) - fi);
    const double det_part = 0.5 * det.value();
    for (int r = 0; r < reps; ++r) {
      const std::vector<double>& wr = w[static_cast<std::size_t>(r)];
      double dot = 0.0;
      for (int i = 0; i < n; ++i) {
        dot += wr[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
      }
      auto& cur = max_log_ratio[static_cast<std::size_t>(r)];
      cur = std::max(cur, 0.5 * dot + det_part);
    }
  }
  const double threshold = -c1 * static_cast<double>(n) * eps_n * eps_n;
  int exceed = 0;
  for (double v : max_log_ratio) {
    if (v >= threshold) ++exceed;
  }
  rep.fraction = static_cast<double>(exceed) / static_cast<double>(reps);
  return rep;
}

// sigma0^2 = 2 E[(1-Z^2)^2 exp(|1-Z^2|/3)], Z standard normal, by composite
// Gauss-Legendre quadrature (panel split at the |1-z^2| kink; the integrand
// below ~exp(-z^2/6) is negligible past z = 16).
inline double sigma0_constant(int nodes = 64) {
  const GaussLegendre rule(nodes);
  auto integrand = [](double z) {
    const double w = 1.0 - z * z;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return w * w * std::exp(std::abs(w) / 3.0) * phi;
  };
  const double panels[] = {0.0, 1.0, 2.0, 4.0, 8.0, 16.0};
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < std::size(panels); ++k) {
    integral += rule.integrate(integrand, panels[k], panels[k + 1]);
  }
  return 2.0 * (2.0 * integral);  // even integrand: full-line integral is twice [0,inf)
}

// ---------------------------------------------------------------------------
// Small-ball condition check (prior mass of sup-norm balls around s0).
// ---------------------------------------------------------------------------

struct SmallBallCheck {
  int n = 0;
  double eps = 0.0;          // eps_tilde(n)
  double neg_log_mass = 0.0; // -log Pi(V_{s0,eps})
  double bound = 0.0;        // kSmallBallCBar * n * eps^2
  bool ok = false;
  std::size_t net_size = 0;
};

inline std::vector<SmallBallCheck> check_small_ball_condition(
    const ClassParams& params, const DispersionFn& s0, double eps_const,
    std::span<const int> n_list, double c_bar = kSmallBallCBar,
    std::size_t net_cap = kDefaultNetCap) {
  std::vector<SmallBallCheck> checks;
  for (int n : n_list) {
    SmallBallCheck c;
    c.n = n;
    c.eps = eps_tilde(eps_const, n);
    const NetPrior net = build_net(params, c.eps, net_cap);
    c.net_size = net.size();
    c.neg_log_mass = -log_small_ball_mass(net, s0, c.eps, Metric::kSup);
    c.bound = c_bar * static_cast<double>(n) * c.eps * c.eps;
    c.ok = c.neg_log_mass <= c.bound;
    checks.push_back(c);
  }
  return checks;
}

}  // namespace dispbayes
