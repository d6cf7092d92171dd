/*
 * Copyright 2026 The tsfit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tsfit/rng.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

namespace tsfit {
namespace {

TEST(SeededRngTest, SameSeedAndStreamGiveSameSequence) {
  SeededRng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.Uniform01(), b.Uniform01());
    EXPECT_EQ(a.Normal(), b.Normal());
  }
}

TEST(SeededRngTest, StreamsDiffer) {
  SeededRng a(42, 0), b(42, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.Uniform01() == b.Uniform01();
  EXPECT_EQ(same, 0);
}

TEST(SeededRngTest, DeriveIsPureAndKeySensitive) {
  const SeededRng root(9);
  SeededRng a = root.Derive({1, 2});
  SeededRng b = root.Derive({1, 2});
  SeededRng c = root.Derive({2, 1});
  const double va = a.Normal();
  EXPECT_EQ(va, b.Normal());
  EXPECT_NE(va, c.Normal());
  // Deriving does not consume the parent.
  SeededRng r1(9), r2(9);
  (void)r1.Derive({5});
  EXPECT_EQ(r1.Uniform01(), r2.Uniform01());
}

TEST(SeededRngTest, UniformMoments) {
  SeededRng rng(1);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12, 0.003);
}

TEST(SeededRngTest, NormalMoments) {
  SeededRng rng(2);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.015);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(SeededRngTest, PoissonMean) {
  SeededRng rng(3);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) sum += rng.Poisson(2.0);
  EXPECT_NEAR(sum / 20000, 2.0, 0.05);
}

TEST(SeededRngTest, UniformIntCoversRange) {
  SeededRng rng(4);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto k = rng.UniformInt(5);
    ASSERT_GE(k, 0);
    ASSERT_LT(k, 5);
    ++counts[static_cast<size_t>(k)];
  }
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(SeededRngTest, CategoricalFollowsWeights) {
  SeededRng rng(5);
  const double w[3] = {0.1, 0.0, 0.9};
  int hits[3] = {0, 0, 0};
  for (int i = 0; i < 10000; ++i) ++hits[rng.Categorical(w, 3)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[2] / 10000.0, 0.9, 0.015);
}

TEST(SeededRngTest, SplitMixIsDeterministicAndMixes) {
  EXPECT_EQ(SplitMix64(0), SplitMix64(0));
  EXPECT_NE(SplitMix64(0), SplitMix64(1));
}

}  // namespace
}  // namespace tsfit
