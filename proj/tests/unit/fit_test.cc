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

#include "tsfit/fit.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "tsfit/divergence.h"
#include "tsfit/error.h"
#include "tsfit/predictor.h"
#include "unit/test_util.h"

namespace tsfit {
namespace {

using testing::FixedGaussianGenerator;
using testing::LinearSigmoidClassifier;

GaussianParams StdNormal(int d) {
  return MakeGaussian(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
}

double Kl(double p, double q) {
  p = std::clamp(p, 1e-6, 1 - 1e-6);
  q = std::clamp(q, 1e-6, 1 - 1e-6);
  return p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q));
}

TEST(FeatureSubsetTest, SortsAndValidates) {
  const FeatureSubset s({2, 0}, 3);
  EXPECT_EQ(s.indices(), (std::vector<int>{0, 2}));
  EXPECT_EQ(s.Label(), "{0,2}");
  EXPECT_FALSE(s.IsFull(3));
  EXPECT_TRUE(FeatureSubset({0, 1, 2}, 3).IsFull(3));
  EXPECT_THROW(FeatureSubset({}, 3), Error);
  EXPECT_THROW(FeatureSubset({1, 1}, 3), Error);
  EXPECT_THROW(FeatureSubset({3}, 3), Error);
  EXPECT_THROW(FeatureSubset({-1}, 3), Error);
  EXPECT_EQ(FeatureSubset::Singletons(4).size(), 4u);
}

TEST(FitTest, FullSubsetScoreIsTheShift) {
  const LinearSigmoidClassifier model(Eigen::Vector3d(1.0, -0.5, 2.0), 0.1);
  const FixedGaussianGenerator gen(StdNormal(3));
  SeededRng rng(1);
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 8, rng);
  const auto p = model.PrefixProbabilities(x);
  for (int t = 1; t < 8; ++t) {
    SeededRng r(t);
    const auto terms = FitScoreTerms(model, gen, x, FeatureSubset({0, 1, 2}, 3), t, 5, r);
    EXPECT_EQ(terms.t2, 0.0);
    EXPECT_NEAR(terms.score, Kl(p(t), p(t - 1)), 1e-12);
  }
}

TEST(FitTest, ToyLinearModel) {
  // p_t = sigmoid(2 x_{0,t}); feature 1 is dead.
  const LinearSigmoidClassifier model(Eigen::Vector2d(2.0, 0.0), 0.0);
  const FixedGaussianGenerator gen(StdNormal(2));
  Eigen::MatrixXd x(2, 2);
  x << 0.0, 1.0, 0.3, -0.7;
  const double p0 = 0.5, p1 = 1.0 / (1.0 + std::exp(-2.0));
  SeededRng r0(2);
  // Conditioning on the driving feature recovers p_t exactly.
  EXPECT_NEAR(FitScore(model, gen, x, FeatureSubset({0}, 2), 1, 50, r0), Kl(p1, p0), 1e-12);
  // The dead feature leaves p_partial = E[sigmoid(2Z)] = 0.5.
  SeededRng r1(3);
  const auto dead = FitScoreTerms(model, gen, x, FeatureSubset({1}, 2), 1, 4000, r1);
  EXPECT_NEAR(dead.p_partial, 0.5, 0.02);
  EXPECT_NEAR(dead.score, 0.0, 0.02);
}

TEST(FitTest, NegativeScoresAreKept) {
  // Flat prediction but the partial one differs, so T1 = 0 < T2.
  const LinearSigmoidClassifier model(Eigen::Vector2d(2.0, 0.0), 0.0);
  const FixedGaussianGenerator gen(StdNormal(2));
  Eigen::MatrixXd x(2, 3);
  x << 1.5, 1.5, 1.5, 0.0, 0.0, 0.0;
  SeededRng rng(4);
  const auto terms = FitScoreTerms(model, gen, x, FeatureSubset({1}, 2), 2, 100, rng);
  EXPECT_EQ(terms.t1, 0.0);
  EXPECT_GT(terms.t2, 0.1);
  EXPECT_LT(terms.score, -0.1);
}

TEST(FitTest, CrossEntropyForm) {
  const LinearSigmoidClassifier model(Eigen::Vector3d(0.7, -1.2, 0.4), -0.2);
  const FixedGaussianGenerator gen(MakeGaussian(Eigen::Vector3d(0.1, 0.2, 0.3),
                                                Eigen::Matrix3d::Identity() * 0.5));
  SeededRng rng(5);
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 6, rng);
  for (int t = 1; t < 6; ++t) {
    SeededRng r(10 + t);
    const auto terms = FitScoreTerms(model, gen, x, FeatureSubset({1}, 3), t, 10, r);
    const auto now = PredictiveDistribution::Binary(terms.p_now);
    const double ce = CrossEntropy(now, PredictiveDistribution::Binary(terms.p_prev)) -
                      CrossEntropy(now, PredictiveDistribution::Binary(terms.p_partial));
    EXPECT_NEAR(terms.score, ce, 1e-10);
    EXPECT_NEAR(terms.score, terms.t1 - terms.t2, 1e-15);
  }
}

TEST(FitTest, MatrixShapeAndFirstColumn) {
  SeededRng mrng(6);
  RecurrentClassifier model(3, 5);
  model.InitRandom(mrng);
  const FixedGaussianGenerator gen(StdNormal(3));
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 7, mrng);
  const auto m = FitImportanceMatrix(model, gen, x, 4, {}, SeededRng(7), 42);
  EXPECT_EQ(m.scores.rows(), 3);
  EXPECT_EQ(m.scores.cols(), 7);
  EXPECT_TRUE(m.scores.col(0).isZero(0));
  EXPECT_EQ(m.subject, 42);
  EXPECT_EQ(m.method, "FIT");
  EXPECT_EQ(m.row_labels, (std::vector<std::string>{"{0}", "{1}", "{2}"}));

  const auto g = FitImportanceMatrix(model, gen, x, 4, {FeatureSubset({0, 1}, 3), FeatureSubset({2}, 3)},
                                     SeededRng(7));
  EXPECT_EQ(g.scores.rows(), 2);
  EXPECT_EQ(g.row_labels[0], "{0,1}");
}

TEST(FitTest, MatrixAgreesWithCellwiseScores) {
  SeededRng mrng(8);
  RecurrentClassifier model(2, 4);
  model.InitRandom(mrng);
  const FixedGaussianGenerator gen(StdNormal(2));
  const Eigen::MatrixXd x = testing::RandomMatrix(2, 5, mrng);
  const SeededRng base(9);
  const auto m = FitImportanceMatrix(model, gen, x, 6, {}, base);
  for (int t = 1; t < 5; ++t) {
    for (int r = 0; r < 2; ++r) {
      SeededRng cell = base.Derive({static_cast<uint64_t>(r), static_cast<uint64_t>(t)});
      EXPECT_NEAR(m.scores(r, t), FitScore(model, gen, x, FeatureSubset({r}, 2), t, 6, cell), 1e-12);
    }
  }
  // Same seed, same matrix.
  EXPECT_TRUE(m.scores == FitImportanceMatrix(model, gen, x, 6, {}, base).scores);
}

TEST(FitTest, MonteCarloSpreadShrinksWithSamples) {
  const LinearSigmoidClassifier model(Eigen::Vector3d(1.5, -1.0, 0.5), 0.0);
  const FixedGaussianGenerator gen(StdNormal(3));
  SeededRng rng(20);
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 4, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int l = 10; l <= 320; l *= 2) {
    double s1 = 0, s2 = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      SeededRng cell(1000 * l + r);
      const double v = FitScore(model, gen, x, FeatureSubset({0}, 3), 2, l, cell);
      s1 += v;
      s2 += v * v;
    }
    const double var = s2 / reps - (s1 / reps) * (s1 / reps);
    // Allow sampling noise in the variance estimate itself.
    EXPECT_LE(var, 1.3 * prev) << "L = " << l;
    prev = var;
  }
}

TEST(FitTest, InvalidTimeAndSamples) {
  const LinearSigmoidClassifier model(Eigen::Vector2d(1, 1), 0);
  const FixedGaussianGenerator gen(StdNormal(2));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 4);
  SeededRng rng(10);
  for (int t : {0, 4, -1}) {
    try {
      FitScore(model, gen, x, FeatureSubset({0}, 2), t, 3, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidTime);
    }
  }
  EXPECT_THROW(FitScore(model, gen, x, FeatureSubset({0}, 2), 1, 0, rng), Error);
}

TEST(NormalizationTest, MinMaxMapsOntoUnitRange) {
  ImportanceMatrix m;
  SeededRng rng(11);
  m.scores = testing::RandomMatrix(3, 9, rng);
  const auto n = NormalizeImportance(m, Normalization::kPerSampleMinMax);
  EXPECT_DOUBLE_EQ(n.scores.minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(n.scores.maxCoeff(), 1.0);
  EXPECT_EQ(n.normalization, "per_sample_minmax");
  // Order-preserving.
  for (Eigen::Index i = 1; i < m.scores.size(); ++i) {
    EXPECT_EQ(m.scores(i) < m.scores(0), n.scores(i) < n.scores(0));
  }
}

TEST(NormalizationTest, ZScoreHasZeroMeanUnitSpread) {
  ImportanceMatrix m;
  SeededRng rng(12);
  m.scores = testing::RandomMatrix(2, 10, rng, 3.0);
  const auto n = NormalizeImportance(m, Normalization::kPerSampleZScore);
  EXPECT_NEAR(n.scores.mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(n.scores.array().square().mean()), 1.0, 1e-12);
}

TEST(NormalizationTest, ConstantMatrixIsDegenerate) {
  ImportanceMatrix m;
  m.scores = Eigen::MatrixXd::Constant(2, 3, 0.4);
  for (auto mode : {Normalization::kPerSampleMinMax, Normalization::kPerSampleZScore}) {
    const auto n = NormalizeImportance(m, mode);
    EXPECT_TRUE(n.degenerate);
    EXPECT_TRUE(n.scores.isZero(0));
  }
  const auto none = NormalizeImportance(m, Normalization::kNone);
  EXPECT_FALSE(none.degenerate);
  EXPECT_TRUE(none.scores == m.scores);
}

TEST(NormalizationTest, MagnitudeRankingIsRespected) {
  ImportanceMatrix m;
  m.scores = (Eigen::MatrixXd(1, 3) << -2.0, 0.5, 1.0).finished();
  m.rank_by_magnitude = true;
  const auto n = NormalizeImportance(m, Normalization::kPerSampleMinMax);
  EXPECT_FALSE(n.rank_by_magnitude);
  EXPECT_DOUBLE_EQ(n.scores(0), 1.0);
  EXPECT_DOUBLE_EQ(n.scores(1), 0.0);
}

TEST(NormalizationTest, NamesRoundTrip) {
  for (auto mode : {Normalization::kNone, Normalization::kPerSampleMinMax,
                    Normalization::kPerSampleZScore}) {
    EXPECT_EQ(ParseNormalization(NormalizationName(mode)), mode);
  }
  EXPECT_THROW(ParseNormalization("global"), Error);
}

}  // namespace
}  // namespace tsfit
