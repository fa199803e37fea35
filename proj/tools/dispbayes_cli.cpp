// Command-line front end: simulation, likelihood evaluation, posterior
// computation and the verification experiments, with deterministic seeding
// and atomic CSV/JSON/SVG artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/experiments.hpp"
#include "dispbayes/io.hpp"
#include "dispbayes/likelihood.hpp"
#include "dispbayes/net_prior.hpp"
#include "dispbayes/posterior.hpp"
#include "dispbayes/serialize.hpp"
#include "dispbayes/simulate.hpp"

namespace fs = std::filesystem;
using dispbayes::json;

namespace {

// `const:<v>` | `linear:<v0>,<v1>` | `file:<path>` (DispersionFn JSON),
// validated against the configured class parameters.
dispbayes::DispersionFn parse_s0_spec(const std::string& text, const dispbayes::ClassParams& p) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw dispbayes::SpecSyntax("dispersion spec needs const:<v>, linear:<v0>,<v1> or file:<path>");
  }
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw dispbayes::SpecSyntax("dispersion spec: bad number '" + s + "'");
    }
  };
  if (kind == "const") {
    const double v = to_double(rest);
    return dispbayes::make_piecewise_linear({0.0, 1.0}, {v, v}, p);
  }
  if (kind == "linear") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos) {
      throw dispbayes::SpecSyntax("linear spec needs two comma-separated values");
    }
    const double v0 = to_double(rest.substr(0, comma));
    const double v1 = to_double(rest.substr(comma + 1));
    return dispbayes::make_piecewise_linear({0.0, 1.0}, {v0, v1}, p);
  }
  if (kind == "file") {
    std::ifstream in(rest);
    if (!in) throw dispbayes::SpecSyntax("cannot open dispersion file: " + rest);
    json j;
    in >> j;
    dispbayes::DispersionFn s = dispbayes::dispersion_from_json(j);
    const auto rep = dispbayes::class_membership(s, p);
    if (!rep.member) {
      if (rep.violation.rfind("range", 0) == 0) throw dispbayes::RangeViolation(rep.violation);
      throw dispbayes::SlopeViolation(rep.violation);
    }
    return s;
  }
  throw dispbayes::SpecSyntax("unknown dispersion spec kind: " + kind);
}

fs::path resolve_out(const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("DISPBAYES_OUT_DIR")) {
    return fs::path(dir) / p;
  }
  return p;
}

// Options absent from the command line fall back to values in the --config
// JSON file; flags always win.
class ConfigFile {
 public:
  explicit ConfigFile(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw dispbayes::ConfigError("cannot open config file: " + path);
    try {
      in >> data_;
    } catch (const std::exception& e) {
      throw dispbayes::ConfigError(std::string("config file parse: ") + e.what());
    }
  }

  template <typename T>
  void fill(const CLI::Option* opt, const char* key, T& target) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (!data_.contains(key)) return;
    try {
      target = data_.at(key).get<T>();
    } catch (const std::exception& e) {
      throw dispbayes::ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }

 private:
  json data_ = json::object();
};

struct ParamFlags {
  double kappa = 0.5;
  double k_upper = 2.0;
  double m_lip = 1.0;
  CLI::Option* kappa_opt = nullptr;
  CLI::Option* k_upper_opt = nullptr;
  CLI::Option* m_lip_opt = nullptr;

  void attach(CLI::App* cmd) {
    kappa_opt = cmd->add_option("--kappa", kappa, "class lower bound");
    k_upper_opt = cmd->add_option("--k-upper", k_upper, "class upper bound");
    m_lip_opt = cmd->add_option("--m-lip", m_lip, "class slope bound");
  }
  void fill(const ConfigFile& cfg) {
    cfg.fill(kappa_opt, "kappa", kappa);
    cfg.fill(k_upper_opt, "k_upper", k_upper);
    cfg.fill(m_lip_opt, "m_lip", m_lip);
  }
  dispbayes::ClassParams params() const {
    dispbayes::ClassParams p{kappa, k_upper, m_lip};
    p.validate();
    return p;
  }
  json echo() const {
    return json{{"kappa", kappa}, {"k_upper", k_upper}, {"m_lip", m_lip}};
  }
};

// ---------------------------------------------------------------------------

struct SimulateCmd {
  std::string s0_spec;
  int n = 16;
  std::uint64_t seed = 0;
  std::string out = "obs.csv";
  std::string config_path;
  ParamFlags params;
  CLI::Option* n_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* s0_opt = nullptr;

  int run(const ConfigFile& cfg) {
    params.fill(cfg);
    cfg.fill(s0_opt, "s0", s0_spec);
    cfg.fill(n_opt, "n", n);
    cfg.fill(seed_opt, "seed", seed);
    cfg.fill(out_opt, "out", out);
    if (s0_spec.empty()) throw dispbayes::ConfigError("simulate: --s0 is required");
    if (n < 1) throw dispbayes::ConfigError("simulate: n >= 1 required");
    const dispbayes::DispersionFn s0 = parse_s0_spec(s0_spec, params.params());
    const dispbayes::Observations obs =
        dispbayes::sample_observations(s0, n, dispbayes::SeedRecord{seed, 0});
    std::ostringstream csv;
    dispbayes::write_observations_csv(csv, obs);
    dispbayes::write_file_atomic(resolve_out(out), csv.str());
    std::cerr << "simulate: wrote " << resolve_out(out).string() << " (n=" << n << ")\n";
    return 0;
  }
};

struct LoglikCmd {
  std::string obs_path;
  CLI::Option* obs_opt = nullptr;
  std::string s_spec;
  std::string s0_spec;
  std::string diag;
  std::string out;
  std::string config_path;
  ParamFlags params;
  CLI::Option* s_opt = nullptr;
  CLI::Option* s0_opt = nullptr;
  CLI::Option* diag_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  int run(const ConfigFile& cfg) {
    params.fill(cfg);
    cfg.fill(s_opt, "s", s_spec);
    cfg.fill(s0_opt, "s0", s0_spec);
    cfg.fill(diag_opt, "diag", diag);
    cfg.fill(out_opt, "out", out);
    cfg.fill(obs_opt, "obs", obs_path);
    if (obs_path.empty()) throw dispbayes::ConfigError("loglik: --obs is required");
    if (s_spec.empty()) throw dispbayes::ConfigError("loglik: --s is required");
    std::ifstream in(obs_path);
    if (!in) throw dispbayes::ConfigError("cannot open observations: " + obs_path);
    const dispbayes::Observations obs = dispbayes::read_observations_csv(in);
    const dispbayes::ClassParams p = params.params();
    const dispbayes::DispersionFn s = parse_s0_spec(s_spec, p);
    const double ll = dispbayes::log_likelihood(s, obs);
    std::cout << dispbayes::detail::fmt_g17(ll) << "\n";
    if (!diag.empty() || !s0_spec.empty()) {
      if (s0_spec.empty()) {
        throw dispbayes::ConfigError("loglik: --diag needs --s0");
      }
      const dispbayes::DispersionFn s0 = parse_s0_spec(s0_spec, p);
      if (!diag.empty()) {
        dispbayes::write_file_atomic(resolve_out(diag), dispbayes::diagnostics_csv(s, s0, obs));
      }
    }
    if (!out.empty()) {
      json j{{"config",
              json{{"obs", obs_path}, {"s", s_spec}, {"s0", s0_spec},
                   {"params", params.echo()}, {"diag", diag}, {"out", out}}},
             {"log_likelihood", ll},
             {"n", obs.n}};
      dispbayes::write_file_atomic(resolve_out(out), j.dump(2) + "\n");
    }
    return 0;
  }
};

struct PosteriorCmd {
  std::string obs_path;
  CLI::Option* obs_opt = nullptr;
  std::string s0_spec;
  CLI::Option* s0_opt = nullptr;
  std::string backend = "mcmc";
  double eps = 0.3;
  int knots = 0;  // 0: derived from eps via the sieve lattice
  long iters = 50000;
  long burn_in = -1;
  long thin = 10;
  double step = -1.0;
  bool likelihood_off = false;
  std::uint64_t seed = 0;
  std::vector<double> radii = {0.1, 0.2, 0.4};
  int grid_points = 101;
  std::string out = "posterior.json";
  std::string chain_csv;
  std::string net_json;
  std::string config_path;
  ParamFlags params;
  CLI::Option* backend_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* knots_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* radii_opt = nullptr;

  int run(const ConfigFile& cfg) {
    params.fill(cfg);
    cfg.fill(backend_opt, "backend", backend);
    cfg.fill(eps_opt, "eps", eps);
    cfg.fill(knots_opt, "knots", knots);
    cfg.fill(iters_opt, "iters", iters);
    cfg.fill(seed_opt, "seed", seed);
    cfg.fill(radii_opt, "radii", radii);
    cfg.fill(obs_opt, "obs", obs_path);
    cfg.fill(s0_opt, "s0", s0_spec);
    if (obs_path.empty()) throw dispbayes::ConfigError("posterior: --obs is required");
    if (s0_spec.empty()) throw dispbayes::ConfigError("posterior: --s0 is required");
    std::ifstream in(obs_path);
    if (!in) throw dispbayes::ConfigError("cannot open observations: " + obs_path);
    const dispbayes::Observations obs = dispbayes::read_observations_csv(in);
    const dispbayes::ClassParams p = params.params();
    const dispbayes::DispersionFn s0 = parse_s0_spec(s0_spec, p);
    if (backend != "net" && backend != "mcmc") {
      throw dispbayes::ConfigError("posterior: backend must be net or mcmc");
    }
    for (double r : radii) {
      if (!(r > 0.0)) throw dispbayes::ConfigError("posterior: radii must be positive");
    }
    if (grid_points < 2) throw dispbayes::ConfigError("posterior: grid_points >= 2");

    std::vector<double> grid(static_cast<std::size_t>(grid_points));
    for (int g = 0; g < grid_points; ++g) {
      grid[static_cast<std::size_t>(g)] = static_cast<double>(g) / (grid_points - 1);
    }
    grid.back() = 1.0;

    json config_echo{{"obs", obs_path},       {"s0", s0_spec},
                     {"backend", backend},    {"eps", eps},
                     {"knots", knots},        {"iters", iters},
                     {"burn_in", burn_in},    {"thin", thin},
                     {"step", step},          {"likelihood_off", likelihood_off},
                     {"seed", seed},          {"radii", radii},
                     {"grid_points", grid_points}, {"params", params.echo()},
                     {"out", out},            {"chain_csv", chain_csv},
                     {"net_json", net_json}};

    std::vector<double> outside, se, mean_curve;
    if (backend == "net") {
      const dispbayes::NetPrior net = dispbayes::build_net(p, eps);
      const dispbayes::DiscretePosterior post = dispbayes::net_posterior(net, obs);
      for (double r : radii) {
        const auto mass = dispbayes::posterior_ball_mass(post, s0, r);
        outside.push_back(mass.outside);
        se.push_back(mass.se_outside);
      }
      mean_curve = dispbayes::posterior_mean(post, grid);
      if (!net_json.empty()) {
        dispbayes::write_file_atomic(resolve_out(net_json),
                                     dispbayes::net_manifest(net).dump(2) + "\n");
      }
    } else {
      dispbayes::McmcConfig mc;
      mc.iters = iters;
      mc.burn_in = burn_in;
      mc.thin = thin;
      mc.step = step;
      mc.seed = dispbayes::SeedRecord{seed, 1};
      mc.likelihood_off = likelihood_off;
      const int kn = knots > 0 ? knots : dispbayes::sieve_knot_count(p, eps);
      const dispbayes::McmcChain chain = dispbayes::mcmc_posterior(p, kn, obs, mc);
      for (double r : radii) {
        const auto mass = dispbayes::posterior_ball_mass(chain, s0, r);
        outside.push_back(mass.outside);
        se.push_back(mass.se_outside);
      }
      mean_curve = dispbayes::posterior_mean(chain, grid);
      if (!chain_csv.empty()) {
        dispbayes::write_file_atomic(resolve_out(chain_csv), dispbayes::chain_csv(chain));
      }
      config_echo["acceptance_rate"] = chain.acceptance_rate;
    }
    json j{{"config", config_echo},
           {"n", obs.n},
           {"radius_grid", radii},
           {"outside_mass", outside},
           {"se", se},
           {"mean_curve", json{{"grid", grid}, {"values", mean_curve}}}};
    dispbayes::write_file_atomic(resolve_out(out), j.dump(2) + "\n");
    std::cerr << "posterior: wrote " << resolve_out(out).string() << "\n";
    return 0;
  }
};

struct BenchCmd {
  std::string s0_spec;
  std::vector<int> n_grid = {250, 500, 1000, 2000, 4000, 8000};
  int replicates = 20;
  double eps_const = 0.5;
  std::vector<double> radius_multipliers = {1, 2, 4, 8};
  std::string backend = "mcmc";
  long iters = 30000;
  long thin = 10;
  double step = -1.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_prefix = "bench";
  bool svg = false;
  bool quiet = false;
  std::string config_path;
  ParamFlags params;
  CLI::Option* s0_opt = nullptr;
  CLI::Option* n_grid_opt = nullptr;
  CLI::Option* replicates_opt = nullptr;
  CLI::Option* eps_const_opt = nullptr;
  CLI::Option* mult_opt = nullptr;
  CLI::Option* backend_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* prefix_opt = nullptr;

  int run(const ConfigFile& cfg) {
    params.fill(cfg);
    cfg.fill(s0_opt, "s0", s0_spec);
    cfg.fill(n_grid_opt, "n_grid", n_grid);
    cfg.fill(replicates_opt, "replicates", replicates);
    cfg.fill(eps_const_opt, "eps_const", eps_const);
    cfg.fill(mult_opt, "radius_multipliers", radius_multipliers);
    cfg.fill(backend_opt, "backend", backend);
    cfg.fill(iters_opt, "iters", iters);
    cfg.fill(seed_opt, "seed", seed);
    cfg.fill(workers_opt, "workers", workers);
    cfg.fill(prefix_opt, "out_prefix", out_prefix);

    if (s0_spec.empty()) throw dispbayes::ConfigError("bench-contraction: --s0 is required");
    dispbayes::ExperimentConfig ec;
    ec.params = params.params();
    ec.s0 = parse_s0_spec(s0_spec, ec.params);
    ec.n_grid = n_grid;
    ec.replicates = replicates;
    ec.eps_const = eps_const;
    ec.radius_multipliers = radius_multipliers;
    if (backend == "net") {
      ec.backend = dispbayes::Backend::kNet;
    } else if (backend == "mcmc") {
      ec.backend = dispbayes::Backend::kMcmc;
    } else {
      throw dispbayes::ConfigError("bench-contraction: backend must be net or mcmc");
    }
    ec.base_seed = seed;
    ec.mcmc_iters = iters;
    ec.mcmc_thin = thin;
    ec.mcmc_step = step;
    ec.workers = workers;

    const auto progress = [&](const dispbayes::ExperimentRow& row) {
      if (!quiet) {
        std::cerr << "bench: n=" << row.n << " rep=" << row.replicate << " median_l2="
                  << row.median_l2 << " (" << row.runtime_s << "s)\n";
      }
    };
    const dispbayes::ExperimentResult result = dispbayes::contraction_benchmark(ec, progress);

    dispbayes::write_file_atomic(resolve_out(out_prefix + ".csv"),
                                 dispbayes::result_csv(result, "bench-contraction"));
    dispbayes::write_file_atomic(resolve_out(out_prefix + ".json"),
                                 dispbayes::summary_json(result).dump(2) + "\n");
    if (svg) {
      dispbayes::write_file_atomic(resolve_out(out_prefix + ".svg"),
                                   dispbayes::slope_svg(result));
    }
    std::cerr << "bench-contraction: slope=" << result.slope_fit.slope << " wrote "
              << resolve_out(out_prefix + ".csv").string() << "\n";
    return 0;
  }
};

struct VerifyCmd {
  std::string s0_spec = "const:1.0";
  double eps_const = 0.5;
  std::vector<int> n_grid = {500, 2000, 8000};
  int reps = 50;
  int kl_n = 50;
  double kl_eps = 0.5;
  double c1 = 0.5;
  std::uint64_t seed = 0;
  std::string out_prefix = "lemmas";
  std::string config_path;
  ParamFlags params;
  CLI::Option* s0_opt = nullptr;
  CLI::Option* eps_const_opt = nullptr;
  CLI::Option* n_grid_opt = nullptr;
  CLI::Option* reps_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  int run(const ConfigFile& cfg) {
    params.fill(cfg);
    cfg.fill(s0_opt, "s0", s0_spec);
    cfg.fill(eps_const_opt, "eps_const", eps_const);
    cfg.fill(n_grid_opt, "n_grid", n_grid);
    cfg.fill(reps_opt, "reps", reps);
    cfg.fill(seed_opt, "seed", seed);
    const dispbayes::ClassParams p = params.params();
    const dispbayes::DispersionFn s0 = parse_s0_spec(s0_spec, p);
    bool all_ok = true;
    json report;
    report["config"] = json{{"s0", s0_spec},     {"eps_const", eps_const}, {"n_grid", n_grid},
                            {"reps", reps},      {"kl_n", kl_n},           {"kl_eps", kl_eps},
                            {"c1", c1},          {"seed", seed},           {"params", params.echo()},
                            {"out_prefix", out_prefix}};

    // Riemann-sum identity: residual * n bounded over doublings for a nearby s.
    {
      // Deform s0 by a tent bump when the slope budget allows (a constant
      // shift of a constant s0 would leave no discretization error to track),
      // otherwise fall back to a constant shift.
      double max_slope = 0.0;
      for (std::size_t k = 0; k + 1 < s0.knots().size(); ++k) {
        max_slope = std::max(max_slope, std::abs(s0.values()[k + 1] - s0.values()[k]) /
                                            (s0.knots()[k + 1] - s0.knots()[k]));
      }
      const double headroom =
          p.k_upper - *std::max_element(s0.values().begin(), s0.values().end());
      const double amp = std::min({0.05 * (p.k_upper - p.kappa),
                                   0.5 * (p.m_lip - max_slope), headroom});
      std::vector<double> knots = s0.knots();
      if (amp > 0.0 &&
          std::find(knots.begin(), knots.end(), 0.5) == knots.end()) {
        knots.insert(std::upper_bound(knots.begin(), knots.end(), 0.5), 0.5);
      }
      std::vector<double> values(knots.size());
      for (std::size_t k = 0; k < knots.size(); ++k) {
        const double tent = 1.0 - std::abs(2.0 * knots[k] - 1.0);
        values[k] = s0(knots[k]) + (amp > 0.0 ? amp * tent : std::min(0.05, headroom));
      }
      const dispbayes::DispersionFn s(knots, values);
      std::vector<double> scaled;
      double max_ratio = 0.0;
      // values at the roundoff floor count as converged, not as growth
      constexpr double kFloor = 1e-9;
      for (int n = 16; n <= 4096; n *= 2) {
        scaled.push_back(dispbayes::verify_riemann_identity(s, s0, n) * n);
        if (scaled.size() > 1 && scaled[scaled.size() - 2] > kFloor) {
          max_ratio = std::max(max_ratio, scaled.back() / scaled[scaled.size() - 2]);
        }
      }
      const bool ok = max_ratio <= 1.5;
      all_ok = all_ok && ok;
      report["riemann"] = json{{"residual_times_n", scaled}, {"max_doubling_ratio", max_ratio},
                               {"pass", ok}};
      std::cout << "[lemma] riemann-identity: max doubling ratio " << max_ratio
                << (ok ? " PASS" : " FAIL") << "\n";
    }
    // Summed KL bound over shells.
    {
      const dispbayes::NetPrior net = dispbayes::build_net(p, kl_eps);
      const auto rep = dispbayes::verify_kl_bound(net, s0, kl_eps, kl_n);
      const bool ok = rep.min_slack >= 0.0;
      all_ok = all_ok && ok;
      report["kl_bound"] = json{{"c0_tilde", rep.c0_tilde},
                                {"offset", rep.offset},
                                {"min_slack", rep.min_slack},
                                {"members_checked", rep.members_checked},
                                {"pass", ok}};
      std::cout << "[lemma] kl-bound: min slack " << rep.min_slack << " over "
                << rep.members_checked << " members" << (ok ? " PASS" : " FAIL") << "\n";
    }
    // Martingale sup ratio across n.
    {
      std::vector<double> ratios;
      for (int n : n_grid) {
        const double et = dispbayes::eps_tilde(eps_const, n);
        const dispbayes::NetPrior net = dispbayes::build_net(p, et);
        const auto rep = dispbayes::verify_martingale_sup(
            net, s0, n, et, reps, dispbayes::SeedRecord{seed, dispbayes::derive_stream(1, n)});
        ratios.push_back(rep.p95_over_eps_sq);
      }
      const double lo = *std::min_element(ratios.begin(), ratios.end());
      const double hi = *std::max_element(ratios.begin(), ratios.end());
      const bool ok = lo > 0.0 ? (hi / lo <= 5.0) : false;
      all_ok = all_ok && ok;
      report["martingale_sup"] = json{{"p95_over_eps_sq", ratios}, {"max_over_min", lo > 0 ? hi / lo : -1},
                                      {"pass", ok}};
      std::cout << "[lemma] martingale-sup: ratio spread " << (lo > 0 ? hi / lo : -1.0)
                << (ok ? " PASS" : " FAIL") << "\n";
    }
    // Likelihood-ratio tail decreasing in n.
    {
      std::vector<double> fractions;
      for (int n : n_grid) {
        const double et = dispbayes::eps_tilde(eps_const, n);
        const dispbayes::NetPrior net = dispbayes::build_net(p, et);
        const auto rep = dispbayes::verify_ratio_tail(
            net, s0, n, et, c1, reps, dispbayes::SeedRecord{seed, dispbayes::derive_stream(2, n)});
        fractions.push_back(rep.fraction);
      }
      bool ok = true;
      for (std::size_t k = 1; k < fractions.size(); ++k) {
        ok = ok && fractions[k] <= fractions[k - 1];
      }
      all_ok = all_ok && ok;
      report["ratio_tail"] = json{{"fraction", fractions}, {"pass", ok}};
      std::cout << "[lemma] ratio-tail: fractions";
      for (double f : fractions) std::cout << ' ' << f;
      std::cout << (ok ? " PASS" : " FAIL") << "\n";
    }
    dispbayes::write_file_atomic(resolve_out(out_prefix + ".json"), report.dump(2) + "\n");
    return all_ok ? 0 : 1;
  }
};

struct Sigma0Cmd {
  int nodes = 64;
  std::string out;

  int run(const ConfigFile&) {
    const double value = dispbayes::sigma0_constant(nodes);
    std::cout << dispbayes::detail::fmt_g17(value) << "\n";
    if (!out.empty()) {
      json j{{"config", json{{"nodes", nodes}, {"out", out}}}, {"sigma0_sq", value}};
      dispbayes::write_file_atomic(resolve_out(out), j.dump(2) + "\n");
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian estimation of a time-varying dispersion coefficient for dX = s(t) dW"};
  app.require_subcommand(1);

  SimulateCmd sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "sample observations on the grid i/n");
  sim.s0_opt = sim_cmd->add_option("--s0", sim.s0_spec, "true dispersion spec");
  sim.n_opt = sim_cmd->add_option("--n", sim.n, "grid size");
  sim.seed_opt = sim_cmd->add_option("--seed", sim.seed, "base seed");
  sim.out_opt = sim_cmd->add_option("--out", sim.out, "output CSV");
  sim_cmd->add_option("--config", sim.config_path, "JSON config file (flags override)");
  sim.params.attach(sim_cmd);

  LoglikCmd ll;
  CLI::App* ll_cmd = app.add_subcommand("loglik", "log-likelihood of a dispersion spec");
  ll.obs_opt = ll_cmd->add_option("--obs", ll.obs_path, "observations CSV");
  ll.s_opt = ll_cmd->add_option("--s", ll.s_spec, "dispersion spec to evaluate");
  ll.s0_opt = ll_cmd->add_option("--s0", ll.s0_spec, "reference dispersion for --diag");
  ll.diag_opt = ll_cmd->add_option("--diag", ll.diag, "write per-interval z,f,w CSV");
  ll.out_opt = ll_cmd->add_option("--out", ll.out, "write JSON summary");
  ll_cmd->add_option("--config", ll.config_path, "JSON config file (flags override)");
  ll.params.attach(ll_cmd);

  PosteriorCmd post;
  CLI::App* post_cmd = app.add_subcommand("posterior", "posterior over the sieve");
  post.obs_opt = post_cmd->add_option("--obs", post.obs_path, "observations CSV");
  post.s0_opt = post_cmd->add_option("--s0", post.s0_spec, "reference dispersion (ball masses)");
  post.backend_opt = post_cmd->add_option("--backend", post.backend, "net | mcmc");
  post.eps_opt = post_cmd->add_option("--eps", post.eps, "sieve resolution");
  post.knots_opt = post_cmd->add_option("--knots", post.knots, "MCMC knot count (0: from eps)");
  post.iters_opt = post_cmd->add_option("--iters", post.iters, "MCMC iterations");
  post_cmd->add_option("--burn-in", post.burn_in, "burn-in iterations (-1: 20%)");
  post_cmd->add_option("--thin", post.thin, "thinning stride");
  post_cmd->add_option("--step", post.step, "proposal step (-1: 0.1*(K-kappa))");
  post_cmd->add_flag("--likelihood-off", post.likelihood_off, "sample the prior alone");
  post.seed_opt = post_cmd->add_option("--seed", post.seed, "base seed");
  post.radii_opt =
      post_cmd->add_option("--radii", post.radii, "L2 ball radii")->delimiter(',');
  post_cmd->add_option("--grid-points", post.grid_points, "mean-curve grid size");
  post_cmd->add_option("--out", post.out, "summary JSON");
  post_cmd->add_option("--chain-csv", post.chain_csv, "dump kept states");
  post_cmd->add_option("--net-json", post.net_json, "dump net manifest (net backend)");
  post_cmd->add_option("--config", post.config_path, "JSON config file (flags override)");
  post.params.attach(post_cmd);

  BenchCmd bench;
  CLI::App* bench_cmd = app.add_subcommand("bench-contraction", "posterior contraction benchmark");
  bench.s0_opt = bench_cmd->add_option("--s0", bench.s0_spec, "true dispersion spec");
  bench.n_grid_opt = bench_cmd->add_option("--n-grid", bench.n_grid, "grid sizes")->delimiter(',');
  bench.replicates_opt = bench_cmd->add_option("--replicates", bench.replicates, "replicates per n");
  bench.eps_const_opt = bench_cmd->add_option("--eps-const", bench.eps_const, "c in eps_tilde");
  bench.mult_opt = bench_cmd->add_option("--radius-multipliers", bench.radius_multipliers,
                                         "radii as multiples of eps_tilde")->delimiter(',');
  bench.backend_opt = bench_cmd->add_option("--backend", bench.backend, "net | mcmc");
  bench.iters_opt = bench_cmd->add_option("--iters", bench.iters, "MCMC iterations");
  bench_cmd->add_option("--thin", bench.thin, "MCMC thinning");
  bench_cmd->add_option("--step", bench.step, "MCMC step");
  bench.seed_opt = bench_cmd->add_option("--seed", bench.seed, "base seed");
  bench.workers_opt = bench_cmd->add_option("--workers", bench.workers, "parallel replicates");
  bench.prefix_opt = bench_cmd->add_option("--out-prefix", bench.out_prefix, "artifact prefix");
  bench_cmd->add_flag("--svg", bench.svg, "also write a log-log SVG plot");
  bench_cmd->add_flag("--quiet", bench.quiet, "suppress progress lines");
  bench_cmd->add_option("--config", bench.config_path, "JSON config file (flags override)");
  bench.params.attach(bench_cmd);

  VerifyCmd verify;
  CLI::App* verify_cmd = app.add_subcommand("verify-lemmas", "lemma-conclusion checks");
  verify.s0_opt = verify_cmd->add_option("--s0", verify.s0_spec, "true dispersion spec");
  verify.eps_const_opt = verify_cmd->add_option("--eps-const", verify.eps_const, "c in eps_tilde");
  verify.n_grid_opt = verify_cmd->add_option("--n-grid", verify.n_grid, "grid sizes")->delimiter(',');
  verify.reps_opt = verify_cmd->add_option("--reps", verify.reps, "Monte Carlo replicates");
  verify_cmd->add_option("--kl-n", verify.kl_n, "n for the KL bound check");
  verify_cmd->add_option("--kl-eps", verify.kl_eps, "net resolution for the KL bound check");
  verify_cmd->add_option("--c1", verify.c1, "tail threshold constant");
  verify.seed_opt = verify_cmd->add_option("--seed", verify.seed, "base seed");
  verify_cmd->add_option("--out-prefix", verify.out_prefix, "artifact prefix");
  verify_cmd->add_option("--config", verify.config_path, "JSON config file (flags override)");
  verify.params.attach(verify_cmd);

  Sigma0Cmd sigma0;
  CLI::App* sigma0_cmd = app.add_subcommand("sigma0", "sigma0^2 = 2 E[W^2 exp(|W|/3)]");
  sigma0_cmd->add_option("--nodes", sigma0.nodes, "quadrature nodes per panel");
  sigma0_cmd->add_option("--out", sigma0.out, "write JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) return sim.run(ConfigFile(sim.config_path));
    if (ll_cmd->parsed()) return ll.run(ConfigFile(ll.config_path));
    if (post_cmd->parsed()) return post.run(ConfigFile(post.config_path));
    if (bench_cmd->parsed()) return bench.run(ConfigFile(bench.config_path));
    if (verify_cmd->parsed()) return verify.run(ConfigFile(verify.config_path));
    if (sigma0_cmd->parsed()) return sigma0.run(ConfigFile(""));
  } catch (const dispbayes::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dispbayes::SpecSyntax& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dispbayes::BadEps& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dispbayes::GridError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dispbayes::RangeViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dispbayes::SlopeViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
