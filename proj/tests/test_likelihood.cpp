#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "dispbayes/likelihood.hpp"
#include "dispbayes/simulate.hpp"
#include "support.hpp"

using namespace dispbayes;
using Catch::Approx;

namespace {

const ClassParams kParams{0.5, 2.0, 1.0};

Observations manual_obs(std::vector<double> values) {
  Observations obs;
  obs.n = static_cast<int>(values.size()) - 1;
  obs.values = std::move(values);
  obs.increments.resize(static_cast<std::size_t>(obs.n));
  for (int i = 1; i <= obs.n; ++i) {
    obs.increments[static_cast<std::size_t>(i - 1)] =
        obs.values[static_cast<std::size_t>(i)] - obs.values[static_cast<std::size_t>(i - 1)];
  }
  return obs;
}

// Density-product oracle: per-increment normal density evaluated in linear
// space, multiplied, then logged. Only usable at small n.
double loglik_oracle(const DispersionFn& s, const Observations& obs) {
  const auto vars = increment_variances(s, obs.n);
  double prod = 1.0;
  for (int i = 0; i < obs.n; ++i) {
    const double v = vars[static_cast<std::size_t>(i)];
    const double y = obs.increments[static_cast<std::size_t>(i)];
    prod *= std::exp(-y * y / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
  }
  return std::log(prod);
}

}  // namespace

TEST_CASE("log_likelihood closed form") {
  const DispersionFn unit = DispersionFn::constant(1.0);
  CHECK(log_likelihood(unit, manual_obs({0.0, 0.0})) ==
        Approx(-0.5 * std::log(2.0 * std::numbers::pi)).margin(1e-12));
  CHECK(log_likelihood(unit, manual_obs({0.0, 1.0})) ==
        Approx(-0.5 * std::log(2.0 * std::numbers::pi) - 0.5).margin(1e-12));

  CounterRng rng(31, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const DispersionFn s = testsupport::random_member(kParams, 5, rng);
    const DispersionFn s0 = testsupport::random_member(kParams, 5, rng);
    const int n = 1 + static_cast<int>(rng.next_uniform() * 24);
    const Observations obs =
        sample_observations(s0, n, {13, derive_stream(4, static_cast<std::uint64_t>(rep))});
    CHECK(log_likelihood(s, obs) == Approx(loglik_oracle(s, obs)).margin(1e-10));
  }
}

TEST_CASE("log_likelihood_ratio") {
  const DispersionFn one = DispersionFn::constant(1.0);
  const DispersionFn root2 = DispersionFn::constant(std::sqrt(2.0));
  const Observations obs = manual_obs({0.0, 1.0});

  CHECK(log_likelihood_ratio(one, one, obs) == 0.0);
  // 0.5 log(1/2) + 1/4
  CHECK(log_likelihood_ratio(root2, one, obs) ==
        Approx(0.5 * std::log(0.5) + 0.25).margin(1e-12));

  CounterRng rng(32, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const DispersionFn a = testsupport::random_member(kParams, 5, rng);
    const DispersionFn b = testsupport::random_member(kParams, 5, rng);
    const Observations o =
        sample_observations(a, 32, {14, derive_stream(5, static_cast<std::uint64_t>(rep))});
    CHECK(log_likelihood_ratio(a, b, o) ==
          Approx(-log_likelihood_ratio(b, a, o)).margin(1e-12));
  }
}

TEST_CASE("f values") {
  const DispersionFn one = DispersionFn::constant(1.0);
  const DispersionFn root2 = DispersionFn::constant(std::sqrt(2.0));

  for (double fi : f_values(one, one, 7)) CHECK(fi == 0.0);
  for (double fi : f_values(root2, one, 5)) CHECK(fi == Approx(-0.5).margin(1e-12));

  const double floor_bound =
      kParams.kappa * kParams.kappa / (kParams.k_upper * kParams.k_upper) - 1.0;
  CounterRng rng(33, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const DispersionFn s = testsupport::random_member(kParams, 5, rng);
    const DispersionFn s0 = testsupport::random_member(kParams, 5, rng);
    for (double fi : f_values(s, s0, 16)) {
      CHECK(fi > -1.0);
      CHECK(fi >= floor_bound - 1e-12);
    }
  }
}

TEST_CASE("w values") {
  const DispersionFn s0 = DispersionFn::linear(1.0, 1.5);
  Observations zeros = manual_obs({0.0, 0.0, 0.0, 0.0});
  for (double w : w_values(zeros, s0)) CHECK(w == 1.0);

  // y_i^2 equal to the increment variance gives w_i = 0
  const auto vars = increment_variances(s0, 4);
  std::vector<double> values{0.0};
  for (double v : vars) values.push_back(values.back() + std::sqrt(v));
  const auto w = w_values(manual_obs(std::move(values)), s0);
  for (double wi : w) CHECK(wi == Approx(0.0).margin(1e-12));
  for (double wi : w) CHECK(wi <= 1.0);
}

TEST_CASE("S_n decomposition identities") {
  const DispersionFn one = DispersionFn::constant(1.0);
  const DispersionFn root2 = DispersionFn::constant(std::sqrt(2.0));

  SECTION("s = s0 gives (0, 0, 0)") {
    const Observations obs = sample_observations(one, 8, {3, 3});
    const SnDecomposition d = sn_decomposition(one, one, obs);
    CHECK(d.martingale_term == 0.0);
    CHECK(d.deterministic_term == 0.0);
    CHECK(d.total == 0.0);
  }
  SECTION("hand case: f = -1/2, W = 0") {
    const Observations obs = manual_obs({0.0, 1.0});
    const SnDecomposition d = sn_decomposition(root2, one, obs);
    CHECK(d.martingale_term == Approx(0.0).margin(1e-15));
    CHECK(d.deterministic_term == Approx(0.5 * (std::log(0.5) + 0.5)).margin(1e-12));
    CHECK(d.total * 1 == Approx(log_likelihood_ratio(root2, one, obs)).margin(1e-12));
  }
  SECTION("randomized identity suite") {
    CounterRng rng(34, 0);
    for (int rep = 0; rep < 200; ++rep) {
      const DispersionFn s = testsupport::random_member(kParams, 6, rng);
      const DispersionFn s0 = testsupport::random_member(kParams, 6, rng);
      const int n = 1 + static_cast<int>(rng.next_uniform() * 64);
      const Observations obs =
          sample_observations(s0, n, {15, derive_stream(6, static_cast<std::uint64_t>(rep))});
      const SnDecomposition d = sn_decomposition(s, s0, obs);
      CHECK(d.total == Approx(d.martingale_term + d.deterministic_term).margin(1e-12));
      CHECK(d.deterministic_term <= 1e-15);  // log(1+x) <= x
      CHECK(d.total * n == Approx(log_likelihood_ratio(s, s0, obs)).margin(1e-10));
    }
  }
}

TEST_CASE("expected log-ratio increment is minus a Gaussian KL") {
  const DispersionFn one = DispersionFn::constant(1.0);
  const DispersionFn root2 = DispersionFn::constant(std::sqrt(2.0));

  CHECK(expected_log_ratio_increment(one, one, 1, 4) == 0.0);
  CHECK(expected_log_ratio_increment(root2, one, 3, 7) ==
        Approx(0.5 * std::log(0.5) + 0.25).margin(1e-12));
  CHECK_THROWS_AS(expected_log_ratio_increment(one, one, 0, 4), DomainError);
  CHECK_THROWS_AS(expected_log_ratio_increment(one, one, 5, 4), DomainError);

  // Independent route: KL(N(0,v0) || N(0,v)) = (v0/v - 1 + log(v/v0)) / 2.
  CounterRng rng(35, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const DispersionFn s = testsupport::random_member(kParams, 5, rng);
    const DispersionFn s0 = testsupport::random_member(kParams, 5, rng);
    const int n = 1 + static_cast<int>(rng.next_uniform() * 32);
    const int i = 1 + static_cast<int>(rng.next_uniform() * n);
    const double a = (i - 1.0) / n, b = static_cast<double>(i) / n;
    const double v0 = s0.integral_sq(a, b), v = s.integral_sq(a, b);
    const double kl = 0.5 * (v0 / v - 1.0 + std::log(v / v0));
    const double ez = expected_log_ratio_increment(s, s0, i, n);
    CHECK(ez == Approx(-kl).margin(1e-12));
    CHECK(ez <= 0.0);
  }
}

TEST_CASE("log-space evaluation stays finite at n = 1e6 with large paths") {
  const DispersionFn s({0.0, 0.5, 1.0}, {0.5, 1.0, 2.0});
  const int n = 1000000;
  Observations obs;
  obs.n = n;
  obs.values.resize(static_cast<std::size_t>(n) + 1);
  obs.increments.resize(static_cast<std::size_t>(n));
  // deterministic sweep up to |x| = 1e3
  for (int i = 1; i <= n; ++i) {
    obs.values[static_cast<std::size_t>(i)] =
        1e3 * std::sin(200.0 * std::numbers::pi * i / n);
    obs.increments[static_cast<std::size_t>(i - 1)] =
        obs.values[static_cast<std::size_t>(i)] - obs.values[static_cast<std::size_t>(i - 1)];
  }
  const double ll = log_likelihood(s, obs);
  CHECK(std::isfinite(ll));

  Observations degenerate = manual_obs({0.0, 1.0});
  const DispersionFn zeroish({0.0, 1.0}, {0.0, 0.0});
  CHECK_THROWS_AS(log_likelihood(zeroish, degenerate), DegenerateVariance);
}
