// Copyright 2026 The rctc Authors
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

#include "rctc/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rctc/error.hpp"

namespace rctc {
namespace {

ChannelModel delay_channel(double lambda, int n) { return ChannelModel{lambda, 0.05, 0.0125, n}; }

TEST(ChannelModel, Validation) {
  EXPECT_THROW((ChannelModel{0.0, 0.05, 0.01, 3}.validate()), DomainError);
  EXPECT_THROW((ChannelModel{1.0, -0.05, 0.01, 3}.validate()), DomainError);
  EXPECT_THROW((ChannelModel{1.0, 0.05, 0.0, 3}.validate()), DomainError);
  EXPECT_THROW((ChannelModel{1.0, 0.05, 0.01, 0}.validate()), DomainError);
  EXPECT_THROW(ChannelModel::from_violation_probability(1.5, 0.05, 0.01, 3), DomainError);
}

TEST(ChannelModel, ViolationProbabilityRoundTrip) {
  for (double p : {0.05, 0.1, 0.3}) {
    const auto m = ChannelModel::from_violation_probability(p, 0.05, 0.0125, 6);
    EXPECT_NEAR(m.violation_probability(), p, 1e-14);
    EXPECT_NEAR(m.lambda, -std::log(p) / 0.05, 1e-12);
  }
}

TEST(AvailabilityMatrix, UpperTriangleIsStructuralZero) {
  AvailabilityMatrix b(3, true);
  EXPECT_FALSE(b(0, 1));
  EXPECT_THROW(b.set(0, 2, true), DomainError);
  EXPECT_NO_THROW(b.set(0, 2, false));
  EXPECT_TRUE(b.full());
}

TEST(AvailabilityFromDelays, ZeroDelaysGiveFullMatrix) {
  const std::vector<double> d(5, 0.0);
  EXPECT_TRUE(availability_from_delays(delay_channel(20.0, 5), d).full());
}

TEST(AvailabilityFromDelays, DeadlineArithmetic) {
  const auto model = delay_channel(20.0, 3);
  const std::vector<double> d{0.05 + 0.5 * 0.0125, 0.0, 0.0};
  const auto b = availability_from_delays(model, d);
  EXPECT_FALSE(b(0, 0));
  EXPECT_TRUE(b(1, 0));
  EXPECT_TRUE(b(2, 0));
  EXPECT_TRUE(b(1, 1));
}

TEST(SampleAvailability, MonteCarloIsColumnMonotone) {
  const auto model = delay_channel(40.0, 6);
  Rng rng(3);
  for (int k = 0; k < 2000; ++k) EXPECT_TRUE(sample_availability(model, DelayCorrelation::MonteCarlo, rng).monotone());
}

TEST(SampleAvailability, LongDeadlineAlmostSurelyFull) {
  const ChannelModel model{1000.0, 0.05, 0.0125, 6};  // lambda * deadline = 50
  for (double q : loss_probabilities(model).reshaped()) EXPECT_LT(q, 1e-20);
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) EXPECT_TRUE(sample_availability(model, DelayCorrelation::IndependentApprox, rng).full());
}

TEST(SampleAvailability, DeterministicInSeed) {
  const auto model = delay_channel(30.0, 6);
  EXPECT_EQ(sample_availability(model, 9), sample_availability(model, 9));
}

TEST(LossProbabilities, ClosedForm) {
  const auto q = loss_probabilities(delay_channel(20.0, 4));
  EXPECT_NEAR(q(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(q(3, 3), 0.36788, 1e-5);
  EXPECT_NEAR(q(1, 0), std::exp(-1.25), 1e-15);
  EXPECT_NEAR(q(1, 0), 0.28650, 1e-5);
  EXPECT_EQ(q(0, 1), 0.0);
  const auto fast = loss_probabilities(delay_channel(1e6, 4));
  EXPECT_LT(fast.maxCoeff(), 1e-300);
}

TEST(AvailabilityStats, EmpiricalMarginalsConverge) {
  const auto model = delay_channel(-std::log(0.2) / 0.05, 5);
  for (auto mode : {DelayCorrelation::MonteCarlo, DelayCorrelation::IndependentApprox}) {
    const auto stats = availability_stats(model, 100000, 12, mode);
    const Matrix diff = stats.empirical_marginals() - stats.marginals;
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 0.006);
  }
}

TEST(AvailabilityStats, LowLossMarginalsNearOne) {
  const auto model = ChannelModel::from_violation_probability(std::exp(-30.0), 0.05, 0.0125, 6);
  const auto stats = availability_stats(model, 10, 1, DelayCorrelation::MonteCarlo);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) EXPECT_GT(stats.marginals(i, j), 1.0 - 1e-12);
}

TEST(AvailabilityStats, ZeroSamplesRejected) {
  EXPECT_THROW(availability_stats(delay_channel(20, 3), 0, 1, DelayCorrelation::MonteCarlo), DomainError);
}

TEST(AvailabilityMoments, ExactMatchesEnumeration) {
  const auto model = delay_channel(25.0, 3);
  const auto patterns = oracle::enumerate_patterns(3, model.lambda, model.deadline, model.sample_period);
  const auto exact = AvailabilityMoments::exact(model);
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i <= t; ++i) {
      double mean = 0.0;
      for (const auto& p : patterns) mean += p.probability * p.b(t, i);
      EXPECT_NEAR(exact.mean(t, i), mean, 1e-14);
      for (int j = 0; j <= t; ++j) {
        double prod = 0.0;
        for (const auto& p : patterns) prod += p.probability * p.b(t, i) * p.b(t, j);
        EXPECT_NEAR(exact.row_product(t, i, j), prod, 1e-14);
      }
    }
  }
}

TEST(AvailabilityMoments, MonteCarloRowProductsFactor) {
  const auto model = delay_channel(-std::log(0.3) / 0.05, 4);
  const auto stats = availability_stats(model, 200000, 4, DelayCorrelation::MonteCarlo);
  const AvailabilityMoments sampled(stats);
  const auto exact = AvailabilityMoments::exact(model);
  for (int t = 0; t < 4; ++t)
    for (int i = 0; i <= t; ++i)
      for (int j = 0; j <= t; ++j) EXPECT_NEAR(sampled.row_product(t, i, j), exact.row_product(t, i, j), 0.006);
}

TEST(DelayCorrelation, Names) {
  EXPECT_EQ(delay_correlation_from_string("independent"), DelayCorrelation::IndependentApprox);
  EXPECT_STREQ(to_string(DelayCorrelation::MonteCarlo), "montecarlo");
  EXPECT_THROW(delay_correlation_from_string("other"), DomainError);
}

}  // namespace
}  // namespace rctc
