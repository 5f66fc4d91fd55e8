// Copyright 2026 The spinchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spinchain/chain.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <vector>

using namespace spinchain;

namespace {

RunConfig strong_depolarizing_config(int n, double lambda, int steps) {
  RunConfig config;
  config.ensemble_size = n;
  config.kernel_width = 0.0;
  config.channel = ChannelSpec::collective_depolarizing(lambda);
  config.initial = InitialStateSpec::mixed();
  config.steps = steps;
  config.seed = 42;
  return config;
}

// Brute-force pooled lag covariance: gather every pair, two-pass formula.
double pooled_covariance_by_hand(const std::vector<Trajectory> &trajectories, int lag) {
  std::vector<double> xs, ys;
  for (const auto &t : trajectories) {
    for (int step = 1; step + lag <= t.length(); ++step) {
      xs.push_back(0.5 * t.outcome_doubled(step));
      ys.push_back(0.5 * t.outcome_doubled(step + lag));
    }
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double acc = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) acc += (xs[i] - mx) * (ys[i] - my);
  return acc / (static_cast<double>(xs.size()) - 1.0);
}

}  // namespace

TEST_CASE("initial sector distributions", "[chain]") {
  auto mixed = initial_sector_distribution(2, InitialStateSpec::mixed());
  REQUIRE(mixed.probs[0] == 0.25);
  REQUIRE(mixed.probs[1] == 0.5);
  REQUIRE(mixed.probs[2] == 0.25);

  auto all_up = initial_sector_distribution(6, InitialStateSpec::product(1.0));
  REQUIRE(all_up.at_doubled(6) == 1.0);

  auto skew = initial_sector_distribution(4, InitialStateSpec::product(0.7));
  REQUIRE(skew.at_doubled(0) == Catch::Approx(0.2646).epsilon(1e-12));

  auto given = make_sector_distribution(3, {0.1, 0.2, 0.3, 0.4});
  auto verbatim = initial_sector_distribution(3, InitialStateSpec::sector(given));
  for (std::size_t i = 0; i < 4; ++i) REQUIRE(verbatim.probs[i] == Catch::Approx(given.probs[i]).margin(1e-15));

  REQUIRE_THROWS_AS(initial_sector_distribution(4, InitialStateSpec::product(1.3)), std::domain_error);
  REQUIRE_THROWS_AS(initial_sector_distribution(4, InitialStateSpec::sector(given)), std::invalid_argument);
}

TEST_CASE("projective readout with frozen evolution repeats forever", "[chain]") {
  RunConfig config = strong_depolarizing_config(10, 0.0, 6);
  auto ctx = make_context(config);
  for (std::uint64_t index = 0; index < 20; ++index) {
    auto traj = run_trajectory(ctx, index);
    for (int step = 2; step <= 6; ++step) {
      REQUIRE(traj.outcome_doubled(step) == traj.outcome_doubled(1));
    }
  }
}

TEST_CASE("trajectories are deterministic per (seed, index)", "[chain]") {
  RunConfig config = strong_depolarizing_config(12, 0.4, 8);
  auto ctx = make_context(config);
  auto a = run_trajectory(ctx, 7);
  auto b = run_trajectory(ctx, 7);
  REQUIRE(a.stream_id == b.stream_id);
  for (int step = 1; step <= 8; ++step) REQUIRE(a.outcome_doubled(step) == b.outcome_doubled(step));

  auto c = run_trajectory(ctx, 8);
  REQUIRE(c.stream_id != a.stream_id);
}

TEST_CASE("threaded sampling matches serial sampling", "[chain]") {
  RunConfig config = strong_depolarizing_config(16, 0.3, 5);
  config.kernel_width = 1.5;
  auto ctx = make_context(config);
  auto serial = run_trajectories(ctx, 64, 1);
  auto threaded = run_trajectories(ctx, 64, 4);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    REQUIRE(serial[i].stream_id == threaded[i].stream_id);
    for (int step = 1; step <= 5; ++step) {
      REQUIRE(serial[i].outcome_doubled(step) == threaded[i].outcome_doubled(step));
    }
  }
}

TEST_CASE("post-selection forces the first record", "[chain]") {
  RunConfig config = strong_depolarizing_config(10, 0.2, 3);
  auto ctx = make_context(config);
  auto traj = run_trajectory(ctx, 3, 4);
  REQUIRE(traj.outcome_doubled(1) == 4);
  REQUIRE(traj.records[0].probability ==
          Catch::Approx(mixed_sector_distribution(10).at_doubled(4)).epsilon(1e-12));

  RunConfig impossible = strong_depolarizing_config(10, 0.2, 2);
  impossible.initial = InitialStateSpec::product(1.0);
  auto ctx2 = make_context(impossible);
  REQUIRE_THROWS_AS(run_trajectory(ctx2, 0, -10), std::domain_error);
}

TEST_CASE("independence probability", "[chain]") {
  REQUIRE(independence_probability(0.42, 0) == 0.0);
  REQUIRE(independence_probability(0.42, 1) == Catch::Approx(0.42).epsilon(1e-15));
  REQUIRE(independence_probability(0.3, 4) == Catch::Approx(0.7599).epsilon(1e-14));
  REQUIRE(independence_probability(1.0, 3) == 1.0);
  REQUIRE(independence_probability(0.0, 12) == 0.0);
  REQUIRE_THROWS_AS(independence_probability(0.3, -1), std::domain_error);

  // Closed form equals the recursion eta_k = lambda + (1-lambda) eta_{k-1}.
  for (int i = 0; i <= 10; ++i) {
    double lambda = i / 10.0;
    double eta = 0.0;
    for (int k = 1; k <= 64; ++k) {
      eta = lambda + (1.0 - lambda) * eta;
      REQUIRE(independence_probability(lambda, k) == Catch::Approx(eta).margin(1e-14));
    }
  }
}

TEST_CASE("joint distribution limiting shapes", "[chain]") {
  // Full resampling: records are independent, joint is the outer product.
  auto resample = make_context(strong_depolarizing_config(14, 1.0, 4));
  auto joint = exact_joint_distribution(resample, 3, 1);
  auto q0 = mixed_sector_distribution(14);
  for (std::size_t a = 0; a < 15; ++a) {
    for (std::size_t b = 0; b < 15; ++b) {
      REQUIRE(joint.probs(a, b) == Catch::Approx(q0.probs[a] * q0.probs[b]).margin(1e-13));
    }
  }

  // Frozen evolution: the joint is purely diagonal.
  auto frozen = make_context(strong_depolarizing_config(14, 0.0, 4));
  auto diag = exact_joint_distribution(frozen, 4, 2);
  for (std::size_t a = 0; a < 15; ++a) {
    for (std::size_t b = 0; b < 15; ++b) {
      REQUIRE(diag.probs(a, b) == Catch::Approx(a == b ? q0.probs[a] : 0.0).margin(1e-13));
    }
  }

  REQUIRE_THROWS_AS(exact_joint_distribution(frozen, 2, 2), std::out_of_range);
  REQUIRE_THROWS_AS(exact_joint_distribution(frozen, 5, 1), std::out_of_range);
}

TEST_CASE("joint distribution closed form for the mixing chain", "[chain]") {
  // (1-l)^k delta P + eta_k P x P, projective readout, mixed start.
  const int n = 20;
  const double lambda = 0.3;
  auto ctx = make_context(strong_depolarizing_config(n, lambda, 6));
  auto q0 = mixed_sector_distribution(n);
  for (int lag : {1, 2, 4}) {
    auto joint = exact_joint_distribution(ctx, 1 + lag, 1);
    double keep = std::pow(1.0 - lambda, lag);
    double eta = independence_probability(lambda, lag);
    for (std::size_t a = 0; a <= n; ++a) {
      for (std::size_t b = 0; b <= n; ++b) {
        double expected = eta * q0.probs[a] * q0.probs[b] + (a == b ? keep * q0.probs[b] : 0.0);
        REQUIRE(joint.probs(a, b) == Catch::Approx(expected).margin(1e-12));
      }
    }
  }
}

TEST_CASE("joint marginals match single-time distributions", "[chain]") {
  RunConfig config;
  config.ensemble_size = 18;
  config.kernel_width = 2.0;
  config.channel = ChannelSpec::epsilon_polarizing(0.25, binomial_sector_distribution(18, 0.65));
  config.initial = InitialStateSpec::product(0.4);
  config.steps = 6;
  auto ctx = make_context(config);
  auto joint = exact_joint_distribution(ctx, 5, 2);
  auto later = joint.later_marginal();
  auto earlier = joint.earlier_marginal();
  auto exact_later = predictive_distribution(ctx, 5);
  auto exact_earlier = predictive_distribution(ctx, 2);
  for (std::size_t i = 0; i <= 18; ++i) {
    REQUIRE(later.probs[i] == Catch::Approx(exact_later.probs[i]).margin(1e-12));
    REQUIRE(earlier.probs[i] == Catch::Approx(exact_earlier.probs[i]).margin(1e-12));
  }
  REQUIRE(std::abs(distribution_sum(later.probs) - 1.0) < 1e-12);
}

TEST_CASE("conditional of the strong mixing chain", "[chain]") {
  // P(m2 | m1) = (1-lambda) delta + lambda q0.
  const int n = 16;
  const double lambda = 0.45;
  auto ctx = make_context(strong_depolarizing_config(n, lambda, 2));
  auto joint = exact_joint_distribution(ctx, 2, 1);
  auto q0 = mixed_sector_distribution(n);
  for (std::size_t b = 0; b <= n; ++b) {
    for (std::size_t a = 0; a <= n; ++a) {
      double conditional = joint.probs(a, b) / q0.probs[b];
      double expected = lambda * q0.probs[a] + (a == b ? 1.0 - lambda : 0.0);
      REQUIRE(conditional == Catch::Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("posterior equivalence between product and mixed starts", "[chain]") {
  // After a projective readout the conditional future is start-independent;
  // only the first marginal remembers the preparation.
  RunConfig mixed_config;
  mixed_config.ensemble_size = 30;
  mixed_config.kernel_width = 0.0;
  mixed_config.channel = ChannelSpec::product_flips(0.3, 0.1);
  mixed_config.initial = InitialStateSpec::mixed();
  mixed_config.steps = 2;
  RunConfig product_config = mixed_config;
  product_config.initial = InitialStateSpec::product(0.7);

  auto mixed_ctx = make_context(mixed_config);
  auto product_ctx = make_context(product_config);
  auto mixed_joint = exact_joint_distribution(mixed_ctx, 2, 1);
  auto product_joint = exact_joint_distribution(product_ctx, 2, 1);
  auto mixed_first = mixed_joint.earlier_marginal();
  auto product_first = product_joint.earlier_marginal();

  REQUIRE(total_variation(mixed_first, product_first) > 0.1);
  for (std::size_t b = 0; b <= 30; ++b) {
    if (mixed_first.probs[b] < 1e-13 || product_first.probs[b] < 1e-13) continue;
    for (std::size_t a = 0; a <= 30; ++a) {
      double lhs = mixed_joint.probs(a, b) / mixed_first.probs[b];
      double rhs = product_joint.probs(a, b) / product_first.probs[b];
      REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
    }
  }
}

TEST_CASE("weak mixing joint has the two-term decomposition", "[chain]") {
  // Gaussian readout of a stationary mixing chain:
  // J(a,b) = (1-l)^k sum_l D(a,l) D(b,l) q0(l) + eta_k P(a) P(b).
  const int n = 24;
  const double lambda = 0.35;
  const int lag = 3;
  auto q0 = mixed_sector_distribution(n);
  RunConfig config;
  config.ensemble_size = n;
  config.kernel_width = 2.0;
  config.channel = ChannelSpec::epsilon_polarizing(lambda, q0);
  config.initial = InitialStateSpec::mixed();
  config.steps = 1 + lag;
  auto ctx = make_context(config);
  auto joint = exact_joint_distribution(ctx, 1 + lag, 1);
  auto p1 = outcome_distribution(ctx.kernel, q0);
  const auto &d = ctx.kernel.outcome_given_sector;
  double keep = std::pow(1.0 - lambda, lag);
  double eta = independence_probability(lambda, lag);
  for (std::size_t a = 0; a <= n; ++a) {
    for (std::size_t b = 0; b <= n; ++b) {
      long double overlap = 0.0L;
      for (std::size_t l = 0; l <= n; ++l) {
        overlap += static_cast<long double>(d(a, l)) * d(b, l) * q0.probs[l];
      }
      double expected = keep * static_cast<double>(overlap) + eta * p1.probs[a] * p1.probs[b];
      REQUIRE(joint.probs(a, b) == Catch::Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("covariance from joints", "[chain]") {
  // Independent joint has zero covariance.
  auto resample = make_context(strong_depolarizing_config(12, 1.0, 3));
  REQUIRE(std::abs(covariance(exact_joint_distribution(resample, 2, 1))) < 1e-13);

  // Perfectly repeating mixed chain: covariance is the N/4 variance.
  auto frozen = make_context(strong_depolarizing_config(100, 0.0, 3));
  REQUIRE(covariance(exact_joint_distribution(frozen, 2, 1)) == Catch::Approx(25.0).epsilon(1e-12));

  auto partial = make_context(strong_depolarizing_config(20, 0.3, 5));
  REQUIRE(covariance(exact_joint_distribution(partial, 4, 1)) ==
          Catch::Approx(5.0 * 0.343).epsilon(1e-12));
}

TEST_CASE("closed-form covariance", "[chain]") {
  REQUIRE(mixing_covariance_closed_form(100, 0.0, 5, 0.0) == 25.0);
  REQUIRE(mixing_covariance_closed_form(100, 1.0, 2, 0.7) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(mixing_covariance_closed_form(100, 0.2, 2, 0.0) == Catch::Approx(16.0).epsilon(1e-13));
  REQUIRE_THROWS_AS(mixing_covariance_closed_form(100, 0.2, 0, 0.0), std::domain_error);
}

TEST_CASE("exact, closed-form, and sampled covariances agree", "[chain]") {
  const int n = 40;
  for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    auto ctx = make_context(strong_depolarizing_config(n, lambda, 9));
    for (int lag = 1; lag <= 8; ++lag) {
      double exact = covariance(exact_joint_distribution(ctx, 1 + lag, 1));
      double closed = mixing_covariance_closed_form(n, lambda, lag, 0.0);
      REQUIRE(std::abs(exact - closed) < 1e-10);
    }
  }

  RunConfig sampled = strong_depolarizing_config(n, 0.3, 9);
  sampled.seed = 991;
  auto ctx = make_context(sampled);
  auto trajectories = run_trajectories(ctx, 10000, 4);
  for (int lag : {1, 3}) {
    auto estimate = empirical_lag_covariance(trajectories, lag);
    double exact = covariance(exact_joint_distribution(ctx, 1 + lag, 1));
    REQUIRE(std::abs(estimate.value - exact) < 3.0 * estimate.std_error);
    REQUIRE(estimate.std_error > 0.0);
  }
}

TEST_CASE("empirical covariance matches a brute-force evaluation", "[chain]") {
  RunConfig config = strong_depolarizing_config(10, 0.5, 6);
  config.kernel_width = 1.0;
  config.seed = 5;
  auto ctx = make_context(config);
  auto trajectories = run_trajectories(ctx, 50, 1);
  for (int lag : {1, 2, 5}) {
    auto fast = empirical_lag_covariance(trajectories, lag);
    REQUIRE(fast.value == Catch::Approx(pooled_covariance_by_hand(trajectories, lag)).margin(1e-10));
  }
  REQUIRE_THROWS_AS(empirical_lag_covariance({trajectories[0]}, 1), std::domain_error);
  REQUIRE_THROWS_AS(empirical_lag_covariance(trajectories, 6), std::domain_error);
}

TEST_CASE("constant trajectories reduce to across-trajectory variance", "[chain]") {
  // Frozen strong chain: every trajectory repeats its first draw, so the
  // pooled lag covariance equals the variance of those draws at every lag.
  RunConfig config = strong_depolarizing_config(30, 0.0, 5);
  config.seed = 17;
  auto ctx = make_context(config);
  auto trajectories = run_trajectories(ctx, 400, 2);
  long double mean = 0.0L;
  for (const auto &t : trajectories) mean += 0.5 * t.outcome_doubled(1);
  mean /= static_cast<long double>(trajectories.size());
  long double variance = 0.0L;
  for (const auto &t : trajectories) {
    long double d = 0.5 * t.outcome_doubled(1) - mean;
    variance += d * d;
  }
  variance /= static_cast<long double>(trajectories.size()) - 1.0L;
  for (int lag = 1; lag <= 4; ++lag) {
    auto estimate = empirical_lag_covariance(trajectories, lag);
    REQUIRE(estimate.value == Catch::Approx(pooled_covariance_by_hand(trajectories, lag)).margin(1e-10));
    REQUIRE(estimate.value == Catch::Approx(static_cast<double>(variance)).epsilon(1e-2));
    REQUIRE(empirical_lag_correlation(trajectories, lag) == 1.0);  // exactly
  }
}

TEST_CASE("resampling chain has no empirical correlation", "[chain]") {
  RunConfig config = strong_depolarizing_config(24, 1.0, 2);
  config.seed = 23;
  auto ctx = make_context(config);
  auto trajectories = run_trajectories(ctx, 10000, 4);
  auto estimate = empirical_lag_covariance(trajectories, 1);
  REQUIRE(std::abs(estimate.value) < 3.0 * estimate.std_error);
  REQUIRE(std::abs(empirical_lag_correlation(trajectories, 1)) < 0.05);
}

TEST_CASE("break-even ensemble size", "[chain]") {
  auto right_angle = break_even_spin_count(M_PI / 2, 0.1);
  REQUIRE_FALSE(right_angle.unbounded);
  REQUIRE(right_angle.max_spins == 100);

  REQUIRE(break_even_spin_count(M_PI / 2, 0.99999).max_spins == 1);

  // tan(pi/12) = 0.26794919...; floor((tan(pi/12) * 1e-5)^-2).
  auto small_angle = break_even_spin_count(M_PI / 6, 1e-5);
  REQUIRE(small_angle.max_spins == 139282032302ULL);
  REQUIRE(small_angle.bound == Catch::Approx(1.3928203230275509e11).epsilon(1e-12));

  auto unpolarized = break_even_spin_count(M_PI / 4, 0.0);
  REQUIRE(unpolarized.unbounded);

  REQUIRE_THROWS_AS(break_even_spin_count(0.0, 0.5), std::domain_error);
  REQUIRE_THROWS_AS(break_even_spin_count(2.0, 0.5), std::domain_error);
  REQUIRE_THROWS_AS(break_even_spin_count(M_PI / 4, 1.0), std::domain_error);
}
