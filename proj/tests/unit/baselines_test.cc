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

#include "tsfit/baselines.h"

#include <cmath>

#include <gtest/gtest.h>

#include "tsfit/error.h"
#include "tsfit/predictor.h"
#include "unit/test_util.h"

namespace tsfit {
namespace {

using testing::LinearSigmoidClassifier;

// Final output sigmoid(w . x_{T-1} + b), with exact input gradients.
class LastStepLogistic : public DifferentiableClassifier {
 public:
  LastStepLogistic(Eigen::VectorXd w, double b) : inner_(w, b), w_(std::move(w)), b_(b) {}
  int input_dim() const override { return inner_.input_dim(); }
  int state_dim() const override { return 1; }
  Eigen::MatrixXd InitialStates(int batch) const override { return inner_.InitialStates(batch); }
  Eigen::MatrixXd Step(const Eigen::MatrixXd& s, const Eigen::MatrixXd& x) const override {
    return inner_.Step(s, x);
  }
  Eigen::RowVectorXd Readout(const Eigen::MatrixXd& s) const override { return inner_.Readout(s); }
  void FinalOutputGradients(const std::vector<Eigen::MatrixXd>& xs, Eigen::VectorXd* probs,
                            std::vector<Eigen::MatrixXd>* grads) const override {
    probs->resize(static_cast<Eigen::Index>(xs.size()));
    grads->assign(xs.size(), Eigen::MatrixXd());
    for (size_t i = 0; i < xs.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(w_.dot(xs[i].col(xs[i].cols() - 1)) + b_)));
      (*probs)(static_cast<Eigen::Index>(i)) = p;
      (*grads)[i] = Eigen::MatrixXd::Zero(xs[i].rows(), xs[i].cols());
      (*grads)[i].col(xs[i].cols() - 1) = p * (1 - p) * w_;
    }
  }

 private:
  LinearSigmoidClassifier inner_;
  Eigen::VectorXd w_;
  double b_;
};

// Output equal to w . x_t + b, unsquashed.
class LinearScoreClassifier : public SequenceClassifier {
 public:
  LinearScoreClassifier(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}
  int input_dim() const override { return static_cast<int>(w_.size()); }
  int state_dim() const override { return 1; }
  Eigen::MatrixXd InitialStates(int batch) const override {
    return Eigen::MatrixXd::Constant(1, batch, b_);
  }
  Eigen::MatrixXd Step(const Eigen::MatrixXd&, const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd out = w_.transpose() * x;
    out.array() += b_;
    return out;
  }
  Eigen::RowVectorXd Readout(const Eigen::MatrixXd& s) const override { return s.row(0); }

 private:
  Eigen::VectorXd w_;
  double b_;
};

FeatureStats StatsFor(int d, double lo, double hi) {
  FeatureStats st;
  st.mean = Eigen::VectorXd::Constant(d, 0.5 * (lo + hi));
  st.stddev = Eigen::VectorXd::Constant(d, 1.0);
  st.min = Eigen::VectorXd::Constant(d, lo);
  st.max = Eigen::VectorXd::Constant(d, hi);
  st.reservoir.assign(d, {lo, 0.5 * (lo + hi), hi});
  return st;
}

BaselineConfig ConfigFor(int d) {
  BaselineConfig cfg;
  cfg.stats = StatsFor(d, -2.0, 2.0);
  return cfg;
}

TEST(OcclusionTest, DeadFeatureScoresZero) {
  const LinearSigmoidClassifier model(Eigen::Vector3d(1.5, 0.0, -1.0), 0.2);
  SeededRng rng(1);
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 6, rng);
  const auto cfg = ConfigFor(3);
  for (const auto& m : {FeatureOcclusion(model, x, cfg, SeededRng(2)),
                        AugmentedFeatureOcclusion(model, x, cfg, SeededRng(2))}) {
    EXPECT_TRUE(m.scores.row(1).isZero(0)) << m.method;
    EXPECT_GT(m.scores.row(0).minCoeff(), 0.0) << m.method;
    EXPECT_GE(m.scores.minCoeff(), 0.0) << m.method;
    EXPECT_EQ(m.scores.rows(), 3);
    EXPECT_EQ(m.scores.cols(), 6);
  }
}

TEST(OcclusionTest, ReservoirOfObservedValueGivesZero) {
  const LinearSigmoidClassifier model(Eigen::Vector2d(1.0, 1.0), 0.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 4, 0.7);
  auto cfg = ConfigFor(2);
  cfg.stats.reservoir = {{0.7}, {0.7}};
  EXPECT_TRUE(AugmentedFeatureOcclusion(model, x, cfg, SeededRng(3)).scores.isZero(0));
}

TEST(OcclusionTest, DeterministicAndMatchesDirectMean) {
  const LinearSigmoidClassifier model(Eigen::Vector2d(1.0, -1.0), 0.0);
  SeededRng rng(4);
  const Eigen::MatrixXd x = testing::RandomMatrix(2, 3, rng);
  auto cfg = ConfigFor(2);
  cfg.occlusion_draws = 7;
  const SeededRng base(5);
  const auto a = FeatureOcclusion(model, x, cfg, base);
  EXPECT_TRUE(a.scores == FeatureOcclusion(model, x, cfg, base).scores);
  // Replay the draws for cell (0, 2).
  SeededRng cell = base.Derive({0, 2});
  const double p = 1.0 / (1.0 + std::exp(-(x(0, 2) - x(1, 2))));
  double acc = 0;
  for (int l = 0; l < 7; ++l) {
    const double v = cell.Uniform(-2.0, 2.0);
    acc += std::abs(1.0 / (1.0 + std::exp(-(v - x(1, 2)))) - p);
  }
  EXPECT_NEAR(a.scores(0, 2), acc / 7, 1e-14);
}

TEST(OcclusionTest, EmptyReservoirRejected) {
  const LinearSigmoidClassifier model(Eigen::Vector2d(1.0, 1.0), 0.0);
  auto cfg = ConfigFor(2);
  cfg.stats.reservoir[1].clear();
  try {
    AugmentedFeatureOcclusion(model, Eigen::MatrixXd::Zero(2, 3), cfg, SeededRng(6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyReservoir);
  }
}

TEST(OcclusionTest, ConfigValidation) {
  const LinearSigmoidClassifier model(Eigen::Vector2d(1.0, 1.0), 0.0);
  auto cfg = ConfigFor(2);
  cfg.occlusion_draws = 0;
  EXPECT_THROW(FeatureOcclusion(model, Eigen::MatrixXd::Zero(2, 3), cfg, SeededRng(1)), Error);
  cfg = ConfigFor(3);
  EXPECT_THROW(FeatureOcclusion(model, Eigen::MatrixXd::Zero(2, 3), cfg, SeededRng(1)), Error);
}

TEST(IntegratedGradientsTest, InputAtBaselineGivesZeros) {
  SeededRng rng(7);
  RecurrentClassifier model(2, 4);
  model.InitRandom(rng);
  auto cfg = ConfigFor(2);
  cfg.ig_baseline = testing::RandomMatrix(2, 5, rng);
  const auto m = IntegratedGradients(model, cfg.ig_baseline, cfg);
  EXPECT_TRUE(m.scores.isZero(0));
  EXPECT_TRUE(m.rank_by_magnitude);
}

TEST(IntegratedGradientsTest, Completeness) {
  for (uint64_t seed = 8; seed < 13; ++seed) {
    SeededRng rng(seed);
    RecurrentClassifier model(3, 6);
    model.InitRandom(rng);
    const Eigen::MatrixXd x = testing::RandomMatrix(3, 10, rng);
    auto cfg = ConfigFor(3);
    const auto m = IntegratedGradients(model, x, cfg);
    const double diff =
        model.PrefixProbabilities(x)(9) - model.PrefixProbabilities(Eigen::MatrixXd::Zero(3, 10))(9);
    EXPECT_NEAR(m.scores.sum(), diff, std::max(0.01 * std::abs(diff), 1e-4)) << "seed " << seed;
  }
}

TEST(IntegratedGradientsTest, LinearModelSigns) {
  const LastStepLogistic model(Eigen::Vector3d(2.0, -1.0, 0.0), 0.0);
  Eigen::MatrixXd x(3, 2);
  x << 5.0, 1.0, 5.0, 1.0, 5.0, 1.0;
  const auto m = IntegratedGradients(model, x, ConfigFor(3));
  EXPECT_GT(m.scores(0, 1), 0.0);
  EXPECT_LT(m.scores(1, 1), 0.0);
  EXPECT_EQ(m.scores(2, 1), 0.0);
  EXPECT_TRUE(m.scores.col(0).isZero(0));
}

TEST(IntegratedGradientsTest, StepCountConverges) {
  SeededRng rng(14);
  RecurrentClassifier model(2, 5);
  model.InitRandom(rng);
  const Eigen::MatrixXd x = testing::RandomMatrix(2, 8, rng, 2.0);
  auto cfg = ConfigFor(2);
  cfg.ig_steps = 256;
  const auto a = IntegratedGradients(model, x, cfg);
  cfg.ig_steps = 512;
  const auto b = IntegratedGradients(model, x, cfg);
  EXPECT_LE((a.scores - b.scores).norm(), 0.005 * b.scores.norm());
  cfg.ig_steps = 1;
  EXPECT_THROW(IntegratedGradients(model, x, cfg), Error);
  cfg = ConfigFor(2);
  cfg.ig_baseline = Eigen::MatrixXd::Zero(2, 3);
  EXPECT_THROW(IntegratedGradients(model, x, cfg), Error);
}

TEST(LimeTest, ConstantModelGivesZeros) {
  const LinearSigmoidClassifier model(Eigen::Vector2d::Zero(), 0.3);
  SeededRng rng(15);
  const auto m = LocalLinearExplain(model, testing::RandomMatrix(2, 4, rng), ConfigFor(2), SeededRng(16));
  EXPECT_LE(m.scores.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LimeTest, RecoversLinearCoefficients) {
  const Eigen::Vector3d w(0.5, -1.0, 0.25);
  const LinearScoreClassifier model(w, 0.1);
  SeededRng rng(17);
  const auto m = LocalLinearExplain(model, testing::RandomMatrix(3, 5, rng), ConfigFor(3), SeededRng(18));
  for (int t = 0; t < 5; ++t) {
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(m.scores(d, t), w(d), 0.05 * std::abs(w(d)));
  }
  EXPECT_TRUE(m.rank_by_magnitude);
}

TEST(LimeTest, DeterministicUnderSeed) {
  SeededRng rng(19);
  RecurrentClassifier model(2, 3);
  model.InitRandom(rng);
  const Eigen::MatrixXd x = testing::RandomMatrix(2, 4, rng);
  const auto cfg = ConfigFor(2);
  EXPECT_TRUE(LocalLinearExplain(model, x, cfg, SeededRng(20)).scores ==
              LocalLinearExplain(model, x, cfg, SeededRng(20)).scores);
  auto bad = cfg;
  bad.lime.n_perturb = 3;
  EXPECT_THROW(LocalLinearExplain(model, x, bad, SeededRng(20)), Error);
}

TEST(WeightedRidgeTest, ExactFitAndSingularFallback) {
  Eigen::MatrixXd f(4, 2);
  f << 1, 0, 0, 1, 1, 1, 2, -1;
  const Eigen::Vector2d beta(3.0, -2.0);
  const Eigen::VectorXd y = (f * beta).array() + 5.0;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  EXPECT_TRUE(WeightedRidge(f, y, w, 0.0).isApprox(beta, 1e-10));
  // Duplicate column: the unpenalized system is singular, the fallback splits the weight.
  Eigen::MatrixXd dup(4, 2);
  dup.col(0) = f.col(0);
  dup.col(1) = f.col(0);
  const Eigen::VectorXd b = WeightedRidge(dup, f.col(0), w, 0.0);
  EXPECT_NEAR(b(0) + b(1), 1.0, 1e-4);
  EXPECT_THROW(WeightedRidge(f, y, Eigen::VectorXd::Zero(4), 0.0), Error);
}

}  // namespace
}  // namespace tsfit
