#include "doral/estimators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "doral/env.hpp"
#include "doral/rng.hpp"

namespace {

using doral::basket_count;
using doral::DelayStats;
using doral::delayed_empirical_mean;
using doral::estimate_tau;
using doral::median_of_means;
using doral::RadiusMode;
using doral::robust_bounds;
using doral::robust_radius;

DelayStats filled_stats(const std::vector<double>& delays, double delta = 0.05,
                        double alpha = 1.0, double budget = 85000.0) {
  DelayStats s(0, alpha, delta, budget);
  for (std::size_t i = 0; i < delays.size(); ++i) {
    s.record_pull(static_cast<long>(i));
    s.record_return_at(i, static_cast<long>(delays[i]));
  }
  return s;
}

TEST(BasketCount, FrozenReferenceValues) {
  EXPECT_EQ(basket_count(1000, 0.01).count, 37);
  EXPECT_EQ(basket_count(1000, 0.05).count, 24);
  EXPECT_EQ(basket_count(1000, 0.01).size, 27u);  // 1000 / 37
  EXPECT_EQ(basket_count(4, 0.01).count, 2);      // capped at pulls / 2
  EXPECT_EQ(basket_count(2, 0.01).count, 1);
  EXPECT_EQ(basket_count(3, 1.0).count, 1);       // floor(8 * 1/8) = 1
}

TEST(BasketCount, RejectsDegenerateInputs) {
  EXPECT_THROW(basket_count(1, 0.05), doral::InsufficientSamples);
  EXPECT_THROW(basket_count(0, 0.05), doral::InsufficientSamples);
  EXPECT_THROW(basket_count(10, 0.0), doral::InvalidParameter);
  EXPECT_THROW(basket_count(10, 1.5), doral::InvalidParameter);
}

TEST(DelayStats, TracksPullsAndReturnsInPullOrder) {
  DelayStats s(3, 1.0, 0.05, 1000.0);
  s.record_pull(0);
  s.record_pull(5);
  s.record_pull(9);
  EXPECT_EQ(s.pulls(), 3u);
  EXPECT_EQ(s.observed_count(), 0u);
  s.record_return(9, 4);  // later pull returns first
  s.record_return(0, 7);
  const auto& obs = s.observed();
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_DOUBLE_EQ(obs[0], 7.0);  // pull order, not arrival order
  EXPECT_DOUBLE_EQ(obs[1], 4.0);
  EXPECT_TRUE(s.returned(0));
  EXPECT_FALSE(s.returned(1));
}

TEST(DelayStats, RejectsUnknownRoundsAndBadDelays) {
  DelayStats s(0, 1.0, 0.05, 1000.0);
  s.record_pull(2);
  EXPECT_THROW(s.record_return(3, 5), doral::InvalidParameter);
  EXPECT_THROW(s.record_return(2, 0), doral::InvalidParameter);
  EXPECT_NO_THROW(s.record_return(2, 1));
}

TEST(MedianOfMeans, PlainMeanWhenSingleBasket) {
  // delta = 1 forces h = 1: the estimate is the mean of all returned delays.
  const auto s = filled_stats({4, 8, 12}, 1.0);
  EXPECT_DOUBLE_EQ(median_of_means(s), 8.0);
}

TEST(MedianOfMeans, TwoBasketsAverageMiddlePair) {
  // pulls = 4, delta = 0.2: h = min(floor(8*(0.125+ln 5)), 2) = 2, n = 2.
  const auto s = filled_stats({1, 3, 10, 2}, 0.2);
  EXPECT_EQ(basket_count(s.pulls(), s.delta()).count, 2);
  EXPECT_DOUBLE_EQ(median_of_means(s), 4.0);  // baskets (1,3) and (10,2)
}

TEST(MedianOfMeans, OddBasketsTakeMiddleAndIgnoreSurplus) {
  // pulls = 6 at delta ~ e^-0.3 gives h = 3; only 5 returns, so n = 1 and
  // the last two returned values fall outside every basket.
  DelayStats s(0, 1.0, std::exp(-0.3), 1000.0);
  const std::vector<long> delays = {9, 1, 5, 1000, 2000};
  for (long i = 0; i < 6; ++i) s.record_pull(i);
  for (std::size_t i = 0; i < delays.size(); ++i) s.record_return_at(i, delays[i]);
  EXPECT_EQ(basket_count(s.pulls(), s.delta()).count, 3);
  EXPECT_DOUBLE_EQ(median_of_means(s), 5.0);
}

TEST(MedianOfMeans, ThrowsWhenReturnsCannotFillBaskets) {
  DelayStats s(0, 1.0, 0.01, 85000.0);
  for (long i = 0; i < 1000; ++i) s.record_pull(i);
  for (std::size_t i = 0; i < 36; ++i) s.record_return_at(i, 10);  // h = 37
  EXPECT_THROW(median_of_means(s), doral::InsufficientSamples);
  s.record_return_at(500, 10);
  EXPECT_NO_THROW(median_of_means(s));
}

TEST(MedianOfMeans, RobustToOneHugeOutlier) {
  doral::Rng rng(17);
  DelayStats s(0, 1.0, 0.05, 85000.0);
  const auto d = doral::DelayDist::geometric(50.0);
  for (long i = 0; i < 400; ++i) {
    s.record_pull(i);
    s.record_return_at(static_cast<std::size_t>(i), i == 200 ? 1000000 : d.sample(rng));
  }
  EXPECT_NEAR(median_of_means(s), 50.0, 15.0);
  // the plain mean is dragged far away by the outlier
  EXPECT_GT(delayed_empirical_mean(s), 2000.0);
}

TEST(RobustRadius, FrozenReferenceValues) {
  EXPECT_NEAR(robust_radius(400, 300.0, 1.0, 85000.0, RadiusMode::Plugin),
              30.1177412520532814, 1e-12);
  EXPECT_NEAR(robust_radius(400, 300.0, 1.0, 85000.0, RadiusMode::WorstCase),
              2125.1177412520532814, 1e-9);
}

TEST(RobustRadius, ShrinksWithMorePulls) {
  double prev = robust_radius(10, 100.0, 1.0, 85000.0);
  for (std::size_t pulls = 20; pulls <= 1000; pulls += 10) {
    const double r = robust_radius(pulls, 100.0, 1.0, 85000.0);
    ASSERT_LT(r, prev);
    prev = r;
  }
}

TEST(RobustRadius, CapsExponentAtHalf) {
  // alpha = 2 and alpha = 9 share the T^{-1/2} bias decay
  const double a = robust_radius(100, 50.0, 2.0, 85000.0);
  const double dev2 = std::sqrt(2.0 * std::log(16.0 / (1.0 - std::pow(85000.0, -2.0))) / 100.0);
  const double dev9 = std::sqrt(2.0 * std::log(16.0 / (1.0 - std::pow(85000.0, -9.0))) / 100.0);
  const double b = robust_radius(100, 50.0, 9.0, 85000.0);
  EXPECT_NEAR(a - dev2, b - dev9, 1e-12);
}

TEST(RobustRadius, RejectsBadParameters) {
  EXPECT_THROW(robust_radius(0, 10.0, 1.0, 85000.0), doral::InsufficientSamples);
  EXPECT_THROW(robust_radius(10, 10.0, 0.0, 85000.0), doral::InvalidParameter);
  EXPECT_THROW(robust_radius(10, 10.0, 1.0, 1.0), doral::InvalidParameter);
}

TEST(RobustBounds, ClampsLowerAtZero) {
  const auto s = filled_stats({2, 2, 2, 2});
  const auto b = robust_bounds(s, 2.0);
  EXPECT_DOUBLE_EQ(b.lower, 0.0);  // radius exceeds the tiny estimate
  EXPECT_GT(b.upper, 2.0);
}

TEST(RobustBounds, CentersOnEstimate) {
  const auto s = filled_stats(std::vector<double>(400, 300.0), 0.05, 1.0);
  const auto b = robust_bounds(s, 300.0);
  const double r = robust_radius(400, 300.0, 1.0, 85000.0);
  EXPECT_DOUBLE_EQ(b.lower, 300.0 - r);
  EXPECT_DOUBLE_EQ(b.upper, 300.0 + r);
}

TEST(DelayedEmpiricalMean, AveragesReturnedOnly) {
  DelayStats s(0, 1.0, 0.05, 1000.0);
  s.record_pull(0);
  s.record_pull(1);
  s.record_pull(2);
  s.record_return(0, 10);
  s.record_return(2, 20);
  EXPECT_DOUBLE_EQ(delayed_empirical_mean(s), 15.0);
}

TEST(DelayedEmpiricalMean, ThrowsWithNoReturns) {
  DelayStats s(0, 1.0, 0.05, 1000.0);
  s.record_pull(0);
  EXPECT_THROW(delayed_empirical_mean(s), doral::InsufficientSamples);
}

TEST(EstimateTau, CountsReturnsWithinWindow) {
  DelayStats s(0, 1.0, 0.05, 1000.0);
  for (long i = 0; i < 10; ++i) s.record_pull(i);
  for (std::size_t i = 0; i < 10; ++i)
    if (i % 2 == 0) s.record_return_at(i, 3);  // five within m = 5
  for (std::size_t i = 1; i < 10; i += 2) s.record_return_at(i, 50);  // beyond m
  EXPECT_DOUBLE_EQ(estimate_tau(s, 5.0, 100), 0.5);
}

TEST(EstimateTau, PendingOldPullsCountAsBeyondWindow) {
  DelayStats s(0, 1.0, 0.05, 1000.0);
  s.record_pull(0);
  s.record_pull(1);
  s.record_return_at(0, 2);
  EXPECT_DOUBLE_EQ(estimate_tau(s, 5.0, 100), 0.5);  // second pull never returned
}

TEST(EstimateTau, RefusesUnresolvedWindows) {
  DelayStats s(0, 1.0, 0.05, 1000.0);
  s.record_pull(0);
  s.record_pull(18);
  s.record_return_at(0, 1);
  s.record_return_at(1, 1);
  EXPECT_THROW(estimate_tau(s, 5.0, 20), doral::NotYetResolved);
  EXPECT_NO_THROW(estimate_tau(s, 2.0, 20));
}

TEST(Concentration, OneSidedOvershootIsRare) {
  // Scaled-down version of the coverage gate: geometric(50) delays, 400
  // pulls, plugin radius at delta = 0.05. The overshoot d_M - d > R should
  // be far rarer than delta.
  doral::Rng rng(31);
  const auto dist = doral::DelayDist::geometric(50.0);
  int violations = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    DelayStats s(0, 1.0, 0.05, 85000.0);
    for (long i = 0; i < 400; ++i) {
      s.record_pull(i);
      s.record_return_at(static_cast<std::size_t>(i), dist.sample(rng));
    }
    const double dm = median_of_means(s);
    const double r = robust_radius(400, dm, 1.0, 85000.0);
    if (dm - 50.0 > r) ++violations;
  }
  EXPECT_LE(static_cast<double>(violations) / trials, 0.1);
}

}  // namespace
