#include "doral/rng.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

namespace {

TEST(Rng, SameSeedReplaysExactly) {
  doral::Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, UniformStaysInHalfOpenUnit) {
  doral::Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformPosStaysInOpenClosedUnit) {
  doral::Rng rng(2);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_pos();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}

TEST(Rng, GaussianMomentsMatchStandardNormal) {
  doral::Rng rng(3);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Rng, CategoricalFrequenciesTrackWeights) {
  doral::Rng rng(4);
  const std::vector<double> w = {0.09, 0.15, 0.11, 0.05, 0.1, 0.05, 0.08, 0.14, 0.13, 0.1};
  std::vector<int> counts(w.size(), 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_NEAR(static_cast<double>(counts[i]) / n, w[i], 0.005) << "index " << i;
}

TEST(Rng, CategoricalDegenerateWeightIsAlwaysChosen) {
  doral::Rng rng(5);
  const std::vector<double> w = {0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(rng.categorical(w), 1);
}

TEST(MixSeed, DistinctStreamsFromOneBase) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(doral::mix_seed(7, s));
  EXPECT_EQ(seen.size(), 100u);
}

TEST(MixSeed, Deterministic) {
  EXPECT_EQ(doral::mix_seed(123, 4), doral::mix_seed(123, 4));
  EXPECT_NE(doral::mix_seed(123, 4), doral::mix_seed(124, 4));
}

}  // namespace
