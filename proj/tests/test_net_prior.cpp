#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "dispbayes/net_prior.hpp"
#include "dispbayes/numeric_util.hpp"
#include "dispbayes/serialize.hpp"
#include "support.hpp"

using namespace dispbayes;
using Catch::Approx;

namespace {
const ClassParams kParams{0.5, 2.0, 1.0};
}

TEST_CASE("build_net single-segment example") {
  // kappa 0.5, K 1.5, M 1, eps 2: knots {0,1}, value grid {0.5, 1.5},
  // |dv| <= 1: all four pairs qualify.
  const ClassParams p{0.5, 1.5, 1.0};
  const NetPrior net = build_net(p, 2.0);
  REQUIRE(net.size() == 4);

  // Independent enumeration oracle over the stated grids.
  std::set<std::pair<double, double>> expected;
  for (double v0 : {0.5, 1.5}) {
    for (double v1 : {0.5, 1.5}) {
      if (std::abs(v1 - v0) <= 1.0) expected.insert({v0, v1});
    }
  }
  std::set<std::pair<double, double>> got;
  for (const DispersionFn& m : net.members) {
    REQUIRE(m.knots().size() == 2);
    got.insert({m.values()[0], m.values()[1]});
  }
  CHECK(got == expected);

  for (double lw : net.log_weights) CHECK(lw == Approx(-std::log(4.0)).margin(1e-15));
  CHECK(log_sum_exp(net.log_weights) == Approx(0.0).margin(1e-12));
}

TEST_CASE("build_net basics") {
  CHECK_THROWS_AS(build_net(kParams, 0.0), BadEps);
  CHECK_THROWS_AS(build_net(kParams, -1.0), BadEps);
  CHECK_THROWS_AS(build_net(kParams, 0.4, 100), NetTooLarge);

  SECTION("halving eps strictly grows the net") {
    const std::size_t coarse = build_net(kParams, 0.8).size();
    const std::size_t fine = build_net(kParams, 0.4).size();
    CHECK(fine > coarse);
  }
  SECTION("every member is a class member, members pairwise distinct") {
    const NetPrior net = build_net(kParams, 0.5);
    for (const DispersionFn& m : net.members) {
      CHECK(class_membership(m, kParams).member);
    }
    for (std::size_t a = 0; a + 1 < net.size(); ++a) {
      CHECK(distance(net.members[a], net.members[a + 1], Metric::kSup) > 0.0);
    }
    CHECK(log_sum_exp(net.log_weights) == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("net is a sup-norm eps-net of the class") {
  for (double eps : {0.8, 0.5}) {
    const NetPrior net = build_net(kParams, eps);
    CounterRng rng(41, static_cast<std::uint64_t>(eps * 100));
    for (int rep = 0; rep < 1000; ++rep) {
      const DispersionFn s = testsupport::random_member(kParams, 9, rng);
      double best = std::numeric_limits<double>::infinity();
      for (const DispersionFn& m : net.members) {
        best = std::min(best, distance(s, m, Metric::kSup));
        if (best <= eps) break;
      }
      CHECK(best <= eps);
    }
  }
}

TEST_CASE("entropy scaling: log member count grows ~linearly in 1/eps") {
  // Frozen counts from the enumeration itself (deterministic construction).
  const std::size_t n08 = build_net(kParams, 0.8).size();
  const std::size_t n04 = build_net(kParams, 0.4).size();
  const std::size_t n02 = build_net(kParams, 0.2).size();
  CHECK(n08 == 26);
  CHECK(n04 == 1436);
  CHECK(n02 == 753040);

  // log N / (1/eps) stays within a narrow band across the three resolutions.
  const double r1 = std::log(static_cast<double>(n08)) / (1.0 / 0.8);
  const double r2 = std::log(static_cast<double>(n04)) / (1.0 / 0.4);
  const double r3 = std::log(static_cast<double>(n02)) / (1.0 / 0.2);
  const double lo = std::min({r1, r2, r3});
  const double hi = std::max({r1, r2, r3});
  CHECK(hi / lo < 1.5);
}

TEST_CASE("small-ball mass") {
  const ClassParams p{0.5, 1.5, 1.0};
  const NetPrior net = build_net(p, 2.0);  // the 4-member net

  SECTION("only the constant-0.5 member is within SUP 0.5 of s0 = 0.5") {
    const double lm = log_small_ball_mass(net, DispersionFn::constant(0.5), 0.5, Metric::kSup);
    CHECK(lm == Approx(std::log(0.25)).margin(1e-12));
  }
  SECTION("radius beyond the range diameter captures everything") {
    const double lm = log_small_ball_mass(net, DispersionFn::constant(1.0),
                                          (p.k_upper - p.kappa) + 0.1, Metric::kSup);
    CHECK(lm == Approx(0.0).margin(1e-12));
  }
  SECTION("member s0 always contributes at least its own weight") {
    const double lm = log_small_ball_mass(net, net.members[0], 1e-9, Metric::kSup);
    CHECK(lm >= -std::log(static_cast<double>(net.size())) - 1e-12);
  }
  SECTION("no member in a tiny ball around a non-member") {
    const double lm = log_small_ball_mass(net, DispersionFn::constant(0.8), 1e-6, Metric::kSup);
    CHECK(lm == -std::numeric_limits<double>::infinity());
  }
  CHECK_THROWS_AS(log_small_ball_mass(net, net.members[0], 0.0, Metric::kSup), BadEps);
}

TEST_CASE("shell partition") {
  SECTION("m_eps minimality: K = 2, eps = 1 gives 4") {
    ClassParams p{0.5, 2.0, 1.0};
    NetPrior net = build_net(p, 1.0);
    const ShellIndex idx = shell_partition(net, DispersionFn::constant(1.0), 1.0);
    CHECK(idx.m_eps == 4);                                   // 2^4 * 1 >= 16, 2^3 * 1 < 16
    CHECK(std::ldexp(1.0, idx.m_eps) <= 8.0 * p.k_upper * p.k_upper);
  }
  SECTION("assignment edges") {
    // Hand-built net: distances to s0=1 are 0 and 0.5.
    NetPrior net;
    net.params = kParams;
    net.resolution = 0.5;
    net.members = {DispersionFn::constant(1.0), DispersionFn::constant(1.5)};
    net.level_paths = {{0}, {1}};
    net.log_weights = {-std::log(2.0), -std::log(2.0)};
    const DispersionFn s0 = DispersionFn::constant(1.0);

    // s0 itself: inside U for any eps.
    ShellIndex idx = shell_partition(net, s0, 0.1);
    CHECK(idx.shell[0] == ShellIndex::kInsideU);

    // ||s - s0||_2^2 = 0.25 = eps^2 exactly: closed left edge, shell 0.
    idx = shell_partition(net, s0, 0.5);
    CHECK(idx.shell[1] == 0);

    // eps^2 = 0.0625 exactly: d^2/eps^2 = 4 -> closed left edge of shell 2.
    idx = shell_partition(net, s0, 0.25);
    CHECK(idx.shell[1] == 2);
  }
  SECTION("every member lands in exactly one cell and the masses cover") {
    const NetPrior net = build_net(kParams, 0.5);
    const DispersionFn s0 = DispersionFn::constant(1.0);
    const double eps = 0.3;
    const double eps_sq = eps * eps;
    const ShellIndex idx = shell_partition(net, s0, eps);
    REQUIRE(idx.shell.size() == net.size());
    double mass = 0.0;
    for (std::size_t k = 0; k < net.size(); ++k) {
      CHECK(idx.shell[k] >= ShellIndex::kInsideU);
      CHECK(idx.shell[k] <= idx.m_eps);
      mass += std::exp(net.log_weights[k]);
      const double dsq = distance_sq_l2(net.members[k], s0);
      if (idx.shell[k] == ShellIndex::kInsideU) {
        CHECK(dsq < eps_sq);
      } else {
        CHECK(dsq >= std::ldexp(eps_sq, idx.shell[k]));
        CHECK(dsq < std::ldexp(eps_sq, idx.shell[k] + 1));
      }
    }
    CHECK(mass == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("net manifest JSON") {
  const ClassParams p{0.5, 1.5, 1.0};
  const NetPrior net = build_net(p, 2.0);
  const json j = net_manifest(net);
  CHECK(j.at("count").get<std::size_t>() == 4);
  CHECK(j.at("resolution").get<double>() == 2.0);
  CHECK(j.at("params").at("kappa").get<double>() == 0.5);
  const json full = net_manifest(net, true);
  CHECK(full.at("members").size() == 4);
}
