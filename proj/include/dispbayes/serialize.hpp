#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dispbayes/dispersion.hpp"
#include "dispbayes/errors.hpp"
#include "dispbayes/experiments.hpp"
#include "dispbayes/net_prior.hpp"

namespace dispbayes {

using json = nlohmann::json;

inline json to_json(const DispersionFn& s) {
  return json{{"knots", s.knots()}, {"values", s.values()}};
}

inline DispersionFn dispersion_from_json(const json& j) {
  if (!j.contains("knots") || !j.contains("values")) {
    throw SpecSyntax("dispersion json: need \"knots\" and \"values\" arrays");
  }
  return {j.at("knots").get<std::vector<double>>(), j.at("values").get<std::vector<double>>()};
}

inline json to_json(const ClassParams& p) {
  return json{{"kappa", p.kappa}, {"k_upper", p.k_upper}, {"m_lip", p.m_lip}};
}

inline ClassParams params_from_json(const json& j) {
  ClassParams p;
  p.kappa = j.value("kappa", p.kappa);
  p.k_upper = j.value("k_upper", p.k_upper);
  p.m_lip = j.value("m_lip", p.m_lip);
  p.validate();
  return p;
}

inline json net_manifest(const NetPrior& net, bool include_members = false) {
  json j{{"resolution", net.resolution},
         {"count", net.size()},
         {"params", to_json(net.params)}};
  if (include_members) {
    json members = json::array();
    for (const DispersionFn& s : net.members) members.push_back(to_json(s));
    j["members"] = std::move(members);
  }
  return j;
}

inline json to_json(const SlopeFit& fit) {
  return json{{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
}

inline json to_json(const ExperimentConfig& c) {
  return json{{"s0", to_json(c.s0)},
              {"params", to_json(c.params)},
              {"n_grid", c.n_grid},
              {"replicates", c.replicates},
              {"eps_const", c.eps_const},
              {"radius_multipliers", c.radius_multipliers},
              {"backend", c.backend == Backend::kNet ? "net" : "mcmc"},
              {"base_seed", c.base_seed},
              {"mcmc_iters", c.mcmc_iters},
              {"mcmc_thin", c.mcmc_thin},
              {"mcmc_step", c.mcmc_step},
              {"workers", c.workers},
              {"net_cap", c.net_cap}};
}

inline json summary_json(const ExperimentResult& result) {
  json per_n = json::array();
  for (const PerNSummary& s : result.per_n) {
    per_n.push_back(json{{"n", s.n},
                         {"eps_tilde", s.eps_tilde},
                         {"median_l2_median", s.median_of_medians},
                         {"outside_mass_mean", s.mean_outside},
                         {"outside_mass_se", s.se_outside}});
  }
  return json{{"config", to_json(result.config)},
              {"per_n", std::move(per_n)},
              {"slope_fit", to_json(result.slope_fit)}};
}

}  // namespace dispbayes
