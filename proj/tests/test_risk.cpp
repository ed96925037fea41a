#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dora/risk.hpp"
#include "dora/rng.hpp"

namespace {

using namespace dora;

TEST(FailureProbability, ClampsToUnitInterval) {
  EXPECT_DOUBLE_EQ(failure_probability(0.0), 0.0);
  EXPECT_DOUBLE_EQ(failure_probability(1.7), 1.0);
  EXPECT_DOUBLE_EQ(failure_probability(0.3), 0.3);
}

TEST(FailureProbability, NegativeInputRejected) {
  EXPECT_THROW(failure_probability(-0.1), std::invalid_argument);
}

TEST(FailureProbabilityProduct, IndependentSourcesCombineByProduct) {
  const std::vector<double> two{0.5, 0.5};
  EXPECT_DOUBLE_EQ(failure_probability_product(two), 0.25);
  const std::vector<double> clamped{2.0, 0.5};
  EXPECT_DOUBLE_EQ(failure_probability_product(clamped), 0.5);
  EXPECT_DOUBLE_EQ(failure_probability_product({}), 0.0);
}

TEST(SampleFailure, DegenerateProbabilities) {
  RandomStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(sample_failure(0.0, rng));
    EXPECT_TRUE(sample_failure(1.0, rng));
  }
}

TEST(SampleFailure, RejectsOutOfRange) {
  RandomStream rng(1);
  EXPECT_THROW(sample_failure(-0.01, rng), std::invalid_argument);
  EXPECT_THROW(sample_failure(1.01, rng), std::invalid_argument);
}

TEST(SampleFailure, MonteCarloMatchesBernoulliRate) {
  const int trials = 100000;
  const double p = 0.1;
  RandomStream rng(2024);
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    hits += sample_failure(p, rng) ? 1 : 0;
  }
  const double rate = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt(p * (1.0 - p) / trials);  // ~0.00095
  EXPECT_NEAR(rate, p, 3.0 * sigma);
}

TEST(SampleFailure, ConsumesExactlyOneDraw) {
  RandomStream a(5), b(5);
  (void)sample_failure(0.5, a);
  (void)b.next_u64();
  EXPECT_EQ(a.state(), b.state());
}

TEST(InfoGainProbability, SpecValues) {
  EXPECT_NEAR(info_gain_probability(1e9, {0.01}), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(info_gain_probability(0.0, {1.0}), 0.0);
  EXPECT_NEAR(info_gain_probability(2.0, {0.5}), 1.0 - 0.5 * std::exp(-1.0), 1e-12);
}

TEST(InfoGainProbability, NegativeElapsedYieldsOne) {
  EXPECT_DOUBLE_EQ(info_gain_probability(-3.0, {0.5}), 1.0);
}

TEST(InfoGainProbability, DensityAboveOneClamps) {
  // omega > 1 makes the density exceed 1 at delta_t = 0.
  EXPECT_DOUBLE_EQ(info_gain_probability(0.0, {4.0}), 0.0);
}

TEST(InfoGainProbability, RejectsNonPositiveOmega) {
  EXPECT_THROW(info_gain_probability(1.0, {0.0}), std::invalid_argument);
  EXPECT_THROW(info_gain_probability(1.0, {-1.0}), std::invalid_argument);
}

TEST(InfoGainProbability, MonotoneNonDecreasing) {
  RandomStream rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double omega = 0.001 + rng.uniform01();
    const double t1 = 1000.0 * rng.uniform01();
    const double t2 = t1 + 1000.0 * rng.uniform01();
    EXPECT_LE(info_gain_probability(t1, {omega}),
              info_gain_probability(t2, {omega}) + 1e-15);
  }
}

// An idle robot re-drawing on a cell of constant radiation survives like
// (1 - p)^t.
TEST(SurvivalCurve, MatchesGeometricEnvelope) {
  const double p = 0.05;
  const int robots = 100000;
  const int horizon = 40;
  RandomStream rng(99);
  std::vector<int> survivors(horizon + 1, 0);
  for (int r = 0; r < robots; ++r) {
    int alive_until = horizon;
    for (int t = 1; t <= horizon; ++t) {
      if (sample_failure(failure_probability(p), rng)) {
        alive_until = t - 1;
        break;
      }
    }
    for (int t = 0; t <= alive_until; ++t) survivors[t] += 1;
  }
  for (int t : {1, 5, 10, 20, 40}) {
    const double expected = std::pow(1.0 - p, t);
    const double got = static_cast<double>(survivors[t]) / robots;
    const double sigma = std::sqrt(expected * (1.0 - expected) / robots);
    EXPECT_NEAR(got, expected, 3.5 * sigma) << "at t=" << t;
  }
}

}  // namespace
