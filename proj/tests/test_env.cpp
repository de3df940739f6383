#include "doral/env.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using doral::ArmSpec;
using doral::DelayDist;
using doral::EnvModel;
using doral::Environment;
using doral::Rng;
using doral::Vector;

EnvModel tiny_model(double noise = 0.0) {
  EnvModel m;
  m.pi = Vector::Zero(2);
  m.pi << 0.4, 0.6;
  m.thetas = {Vector::Zero(2), Vector::Zero(2)};
  m.thetas[0] << 0.5, 0.1;
  m.thetas[1] << 0.2, 0.9;
  ArmSpec a0;
  a0.id = 0;
  a0.features = Vector::Zero(2);
  a0.features << 1.0, 0.0;
  a0.delay = DelayDist::geometric(3.0);
  ArmSpec a1;
  a1.id = 1;
  a1.features = Vector::Zero(2);
  a1.features << 0.0, 1.0;
  a1.delay = DelayDist::geometric(5.0);
  m.arms = {a0, a1};
  m.noise_sigma = noise;
  m.horizon = 100;
  m.budget = 50.0;
  return m;
}

TEST(DelayDist, GeometricMeanAndCdf) {
  const auto d = DelayDist::geometric(300.0);
  EXPECT_DOUBLE_EQ(d.mean(), 300.0);
  EXPECT_NEAR(d.cdf(500.0), 0.8116494891777640, 1e-12);
  EXPECT_DOUBLE_EQ(d.cdf(0.0), 0.0);
  EXPECT_DOUBLE_EQ(DelayDist::geometric(1.0).cdf(1.0), 1.0);
}

TEST(DelayDist, ParetoMeanAndCdf) {
  const auto d = DelayDist::pareto(400.0, 2.0);
  EXPECT_DOUBLE_EQ(d.mean(), 800.0);
  EXPECT_DOUBLE_EQ(d.cdf(500.0), 0.36);
  EXPECT_DOUBLE_EQ(d.cdf(399.0), 0.0);
  EXPECT_TRUE(std::isinf(DelayDist::pareto(400.0, 1.0).mean()));
}

TEST(DelayDist, GeometricSampleMatchesMean) {
  const auto d = DelayDist::geometric(300.0);
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0;
  long lo = 1L << 40;
  for (int i = 0; i < n; ++i) {
    const long s = d.sample(rng);
    ASSERT_GE(s, 1);
    sum += static_cast<double>(s);
    lo = std::min(lo, s);
  }
  EXPECT_EQ(lo, 1);
  EXPECT_NEAR(sum / n, 300.0, 3.0);
}

TEST(DelayDist, ParetoSampleMatchesCdf) {
  const auto d = DelayDist::pareto(400.0, 2.0);
  Rng rng(12);
  const int n = 200000;
  int within = 0;
  for (int i = 0; i < n; ++i) {
    const long s = d.sample(rng);
    ASSERT_GE(s, 400);
    if (s <= 500) ++within;
  }
  EXPECT_NEAR(static_cast<double>(within) / n, 0.36, 0.01);
}

TEST(EnvModel, ValidatesCleanModel) {
  EXPECT_NO_THROW(tiny_model().validate());
}

TEST(EnvModel, RejectsBadInputs) {
  {
    auto m = tiny_model();
    m.pi[0] = 0.5;  // sums to 1.1
    EXPECT_THROW(m.validate(), doral::ModelError);
  }
  {
    auto m = tiny_model();
    m.pi << -0.1, 1.1;
    EXPECT_THROW(m.validate(), doral::ModelError);
  }
  {
    auto m = tiny_model();
    m.thetas[1] = Vector::Zero(3);
    EXPECT_THROW(m.validate(), doral::ModelError);
  }
  {
    auto m = tiny_model();
    m.arms[0].delay = DelayDist::geometric(100.0);  // mean > budget/4
    EXPECT_THROW(m.validate(), doral::ModelError);
  }
  {
    auto m = tiny_model();
    m.noise_sigma = -1.0;
    EXPECT_THROW(m.validate(), doral::ModelError);
  }
  {
    auto m = tiny_model();
    m.budget = 0.0;
    EXPECT_THROW(m.validate(), doral::ModelError);
  }
}

TEST(EnvModel, ExpectedRewardIsInnerProduct) {
  const auto m = tiny_model();
  EXPECT_DOUBLE_EQ(m.expected_reward(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.expected_reward(1, 1), 0.9);
}

TEST(Environment, StepSpendsAndSkipsAreFree) {
  const auto m = tiny_model();
  Environment env(m, 99);
  EXPECT_DOUBLE_EQ(env.remaining(), 50.0);
  const auto r = env.step(0, 0, 0);
  EXPECT_DOUBLE_EQ(r.spend, 1.0);
  ASSERT_TRUE(r.enqueued.has_value());
  EXPECT_EQ(r.enqueued->arrival_round, r.enqueued->decision_round + r.enqueued->delay);
  const auto skip = env.step(1, 0, std::nullopt);
  EXPECT_DOUBLE_EQ(skip.spend, 0.0);
  EXPECT_FALSE(skip.enqueued.has_value());
  EXPECT_DOUBLE_EQ(env.spent(), 1.0);
}

TEST(Environment, ThrowsWhenBudgetWouldGoNegative) {
  auto m = tiny_model();
  m.budget = 2.0;
  m.arms[0].delay = DelayDist::geometric(0.5);  // keep mean <= budget/4
  m.arms[1].delay = DelayDist::geometric(0.5);
  Environment env(m, 7);
  env.step(0, 0, 0);
  env.step(1, 0, 1);
  EXPECT_THROW(env.step(2, 0, 0), doral::BudgetExhausted);
}

TEST(Environment, FeedbackArrivesExactlyAtArrivalRound) {
  const auto m = tiny_model();
  Environment env(m, 123);
  const auto r = env.step(0, 1, 1);
  const long arrival = r.enqueued->arrival_round;
  for (long t = 0; t < arrival; ++t) EXPECT_TRUE(env.pop_due(t).empty());
  const auto due = env.pop_due(arrival);
  ASSERT_EQ(due.size(), 1u);
  EXPECT_EQ(due[0].decision_round, 0);
  EXPECT_EQ(due[0].arm, 1);
  EXPECT_TRUE(env.pop_due(arrival + 100).empty());
}

TEST(Environment, TiedArrivalsPopInEnqueueOrder) {
  auto m = tiny_model();
  m.arms[0].delay = DelayDist::geometric(1.0);  // always 1
  m.arms[1].delay = DelayDist::geometric(1.0);
  Environment env(m, 5);
  env.step(0, 0, 0);
  env.step(1, 0, 1);  // arrivals at rounds 1 and 2
  const auto due1 = env.pop_due(1);
  ASSERT_EQ(due1.size(), 1u);
  EXPECT_EQ(due1[0].arm, 0);
  ASSERT_EQ(env.pop_due(2).size(), 1u);
  env.step(2, 0, 0);
  env.step(2, 0, 1);  // same round, same delay: tie at arrival 3
  const auto due3 = env.pop_due(3);
  ASSERT_EQ(due3.size(), 2u);
  EXPECT_EQ(due3[0].arm, 0);
  EXPECT_EQ(due3[1].arm, 1);
}

TEST(Environment, NoiselessRewardEqualsExpected) {
  const auto m = tiny_model(0.0);
  Environment env(m, 77);
  const auto r = env.step(0, 1, 0);
  EXPECT_DOUBLE_EQ(r.enqueued->reward, m.expected_reward(1, 0));
  EXPECT_DOUBLE_EQ(r.enqueued->expected_reward, m.expected_reward(1, 0));
}

TEST(Environment, NoisyRewardCentersOnExpected) {
  const auto m = tiny_model(0.1);
  Environment env(m, 13);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Environment e(m, doral::mix_seed(13, static_cast<std::uint64_t>(i)));
    sum += e.step(0, 1, 1).enqueued->reward;
  }
  EXPECT_NEAR(sum / n, m.expected_reward(1, 1), 0.005);
}

TEST(Environment, SameSeedReplaysIdentically) {
  const auto m = tiny_model(0.1);
  Environment a(m, 42), b(m, 42);
  for (int t = 0; t < 20; ++t) {
    const int ja = a.sample_context(), jb = b.sample_context();
    ASSERT_EQ(ja, jb);
    const auto ra = a.step(t, ja, t % 2), rb = b.step(t, jb, t % 2);
    ASSERT_EQ(ra.enqueued->delay, rb.enqueued->delay);
    ASSERT_EQ(ra.enqueued->reward, rb.enqueued->reward);
  }
}

TEST(Environment, ContextFrequenciesFollowPi) {
  const auto m = tiny_model();
  Environment env(m, 21);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += env.sample_context();
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.6, 0.01);
}

}  // namespace
