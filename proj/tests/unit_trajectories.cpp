#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "stats_util.hpp"
#include "test_models.hpp"
#include "trajstat/errors.hpp"
#include "trajstat/trajectories.hpp"

using namespace trajstat;

TEST_CASE("decay-model waiting times are exponential") {
  const auto m = two_level_decay();
  const WaitingTimeSampler sampler(m);
  const CVec psi = m.initial_state();

  const int n = 20000, bins = 20;
  std::vector<int> counts(bins, 0);
  std::mt19937_64 rng(42);
  for (int i = 0; i < n; ++i) {
    const double t = sampler.sample(psi, rng).t_w;
    // Equal-probability bins of Exp(1): bin = floor(bins * (1 - e^{-t})).
    int b = static_cast<int>(bins * (1.0 - std::exp(-t)));
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  double stat = 0.0;
  const double expected = static_cast<double>(n) / bins;
  for (int b = 0; b < bins; ++b) {
    const double d = counts[b] - expected;
    stat += d * d / expected;
  }
  CHECK(teststats::chi2_sf(stat, bins - 1) > 1e-3);
}

TEST_CASE("sampled first waits match waiting_density") {
  const auto q = testmodels::driven_qubit();
  const WaitingTimeSampler sampler(q);
  const CVec psi = q.initial_state();
  CHECK(sampler.survival_floor(psi) < 1e-12);

  // Bin probabilities from the survival function (last bin is the tail).
  const int n = 20000, bins = 30;
  const double t_hi = 6.0;
  std::vector<double> prob(bins);
  for (int b = 0; b < bins; ++b) {
    const double a = t_hi * b / (bins - 1.0);
    prob[b] = (b + 1 < bins)
                  ? sampler.survival(psi, a) -
                        sampler.survival(psi, t_hi * (b + 1) / (bins - 1.0))
                  : sampler.survival(psi, a);
  }
  std::vector<int> counts(bins, 0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < n; ++i) {
    const double t = sampler.sample(psi, rng).t_w;
    int b = static_cast<int>(std::floor(t / t_hi * (bins - 1)));
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  double stat = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double e = n * prob[b];
    REQUIRE(e > 5.0);
    const double d = counts[b] - e;
    stat += d * d / e;
  }
  CHECK(teststats::chi2_sf(stat, bins - 1) > 1e-3);

  // The density integrates the same distribution: -dS/dt = waiting_density.
  const double h = 1e-6, t0 = 0.8;
  const double fd = (sampler.survival(psi, t0 - h) -
                     sampler.survival(psi, t0 + h)) / (2.0 * h);
  CHECK(std::abs(fd - sampler.waiting_density(psi, t0)) < 1e-7);
}

TEST_CASE("dark states are surfaced, not hidden") {
  const auto m = two_level_decay();
  const WaitingTimeSampler sampler(m);
  CVec ground = CVec::Zero(2);
  ground(0) = 1.0;
  CHECK(sampler.survival_floor(ground) == doctest::Approx(1.0).epsilon(1e-12));
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sampler.sample(ground, rng), DarkState);
  // A second jump never happens from |0>; fixed-count sampling must say so.
  CHECK_THROWS_AS(sample_fixed_count(m, 2, 1, 1), DarkState);
  // Fixed-time sampling simply stops after the single jump.
  const auto batch = sample_fixed_time(m, 50.0, 20, 1);
  for (const auto& traj : batch.trajectories) CHECK(traj.count() <= 1);
}

TEST_CASE("batches are invariant under index-range partitioning") {
  const auto q = testmodels::driven_qubit();
  const auto full = sample_fixed_time(q, 5.0, 50, 9);
  const auto a = sample_fixed_time_range(q, 5.0, 0, 17, 9);
  const auto b = sample_fixed_time_range(q, 5.0, 17, 50, 9);
  REQUIRE(a.trajectories.size() + b.trajectories.size() == 50);
  for (int i = 0; i < 50; ++i) {
    const auto& part =
        i < 17 ? a.trajectories[i] : b.trajectories[i - 17];
    const auto& ref = full.trajectories[i];
    REQUIRE(part.count() == ref.count());
    for (int j = 0; j < ref.count(); ++j) {
      CHECK(part.jumps[j].time == ref.jumps[j].time);
      CHECK(part.jumps[j].channel == ref.jumps[j].channel);
    }
  }
}

TEST_CASE("schemes share the per-index random stream") {
  // With the same (seed, index), the fixed-time record is a prefix of the
  // fixed-count record as long as no truncation interferes.
  const auto q = testmodels::driven_qubit();
  const auto by_time = sample_fixed_time(q, 4.0, 20, 123);
  const auto by_count = sample_fixed_count(q, 30, 20, 123);
  for (int i = 0; i < 20; ++i) {
    const auto& t = by_time.trajectories[i];
    const auto& k = by_count.trajectories[i];
    REQUIRE(t.count() <= k.count());
    for (int j = 0; j < t.count(); ++j) {
      CHECK(t.jumps[j].time == k.jumps[j].time);
      CHECK(t.jumps[j].channel == k.jumps[j].channel);
    }
  }
}

TEST_CASE("trajectory_log_density against direct propagation") {
  const auto q = testmodels::driven_qubit();
  const WaitingTimeSampler sampler(q);

  Trajectory x;
  x.scheme = Trajectory::Scheme::FixedCount;
  x.K = 2;
  x.jumps = {{0.7, 0}, {1.9, 1}};

  CVec psi = q.initial_state();
  psi = q.jumps()[0].op * sampler.evolve(psi, 0.7);
  psi = q.jumps()[1].op * sampler.evolve(psi, 1.2);
  CHECK(std::abs(trajectory_log_density(q, x) -
                 std::log(psi.squaredNorm())) < 1e-10);

  // Fixed-time adds the no-jump tail on [1.9, tau].
  Trajectory xt = x;
  xt.scheme = Trajectory::Scheme::FixedTime;
  xt.tau = 3.0;
  const CVec tail = sampler.evolve(psi / psi.norm(), 1.1);
  CHECK(std::abs(trajectory_log_density(q, xt) -
                 std::log(psi.squaredNorm() * tail.squaredNorm())) < 1e-10);

  // The diagonal amplitude is the density itself.
  CHECK(std::abs(trajectory_amplitude(q, x, x).real() -
                 std::exp(trajectory_log_density(q, x))) < 1e-12);
  CHECK(std::abs(trajectory_amplitude(q, x, x).imag()) < 1e-14);
}

TEST_CASE("spin totals add channel labels") {
  const auto q = testmodels::driven_qubit();
  Trajectory x;
  x.jumps = {{0.5, 0}, {1.0, 0}, {1.5, 1}};
  const RVec m = x.spin_total(q);
  REQUIRE(m.size() == 1);
  CHECK(m(0) == doctest::Approx(1.0));  // +1 +1 -1
}

TEST_CASE("equivalence exponents shrink with tau") {
  const auto q = testmodels::driven_qubit();
  const auto pts = classical_equivalence_check(q, 0.2, {5.0, 10.0, 20.0},
                                               20000, 3);
  REQUIRE(pts.size() == 3);
  for (const auto& p : pts) {
    CHECK(std::isfinite(p.std_error));
    CHECK(p.std_error > 0.0);
    CHECK(p.acceptance > 0.0);
    CHECK(std::abs(p.exponent_mc - p.exponent) < 4.0 * p.std_error + 1e-3);
  }
  CHECK(std::abs(pts[2].exponent) < std::abs(pts[0].exponent));
}
