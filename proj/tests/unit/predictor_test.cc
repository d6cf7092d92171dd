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

#include "tsfit/predictor.h"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "tsfit/error.h"
#include "tsfit/simdata.h"
#include "unit/test_util.h"

namespace tsfit {
namespace {

RecurrentClassifier RandomModel(int d, int h, uint64_t seed) {
  SeededRng rng(seed);
  RecurrentClassifier m(d, h);
  m.InitRandom(rng);
  return m;
}

TEST(PredictorTest, PrefixOutputsAreConsistent) {
  const auto m = RandomModel(3, 8, 1);
  SeededRng rng(2);
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 12, rng);
  const Eigen::VectorXd p = m.PrefixProbabilities(x);
  for (int t = 1; t <= 12; ++t) {
    const Eigen::MatrixXd prefix = x.leftCols(t);
    EXPECT_NEAR(m.PrefixProbabilities(prefix)(t - 1), p(t - 1), 1e-14);
    EXPECT_NEAR(m.PredictPrefix(x, t)[1], std::clamp(p(t - 1), 1e-6, 1 - 1e-6), 1e-14);
  }
}

TEST(PredictorTest, ZeroWeightsGiveSigmoidOfBias) {
  RecurrentClassifier m(2, 4);
  m.head_b() = 0.7;
  SeededRng rng(3);
  const Eigen::VectorXd p = m.PrefixProbabilities(testing::RandomMatrix(2, 5, rng));
  for (Eigen::Index t = 0; t < p.size(); ++t) EXPECT_DOUBLE_EQ(p(t), Sigmoid(0.7));
}

TEST(PredictorTest, EmptyPrefixRejected) {
  const auto m = RandomModel(2, 3, 4);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 4);
  try {
    m.PredictPrefix(x, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyPrefix);
  }
}

TEST(PredictorTest, InputGradientsMatchFiniteDifferences) {
  for (uint64_t seed = 10; seed < 15; ++seed) {
    const auto m = RandomModel(3, 6, seed);
    SeededRng rng(seed + 100);
    const Eigen::MatrixXd x = testing::RandomMatrix(3, 9, rng);
    const Eigen::MatrixXd g = m.InputGradients(x);
    const double eps = 1e-6;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Eigen::MatrixXd xp = x, xm = x;
      xp(i) += eps;
      xm(i) -= eps;
      const double fd = (m.PrefixProbabilities(xp)(8) - m.PrefixProbabilities(xm)(8)) / (2 * eps);
      const double rel = std::abs(g(i) - fd) / std::max(std::abs(fd), 1e-6);
      EXPECT_LE(rel, 1e-4) << "seed " << seed << " cell " << i;
    }
    // Class 0 gradient is the negative.
    EXPECT_TRUE(m.InputGradients(x, 0).isApprox(-g, 1e-12));
  }
}

TEST(PredictorTest, PrefixOutputIgnoresTheFuture) {
  const auto m = RandomModel(2, 5, 20);
  SeededRng rng(21);
  Eigen::MatrixXd x = testing::RandomMatrix(2, 10, rng);
  const Eigen::VectorXd before = m.PrefixProbabilities(x);
  x.rightCols(4).setConstant(50.0);
  const Eigen::VectorXd after = m.PrefixProbabilities(x);
  EXPECT_TRUE(before.head(6) == after.head(6));
}

TEST(PredictorTest, BatchedGradientsMatchSingle) {
  const auto m = RandomModel(2, 4, 22);
  SeededRng rng(23);
  std::vector<Eigen::MatrixXd> xs = {testing::RandomMatrix(2, 6, rng),
                                     testing::RandomMatrix(2, 6, rng)};
  Eigen::VectorXd probs;
  std::vector<Eigen::MatrixXd> grads;
  m.FinalOutputGradients(xs, &probs, &grads);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(probs(i), m.PrefixProbabilities(xs[i])(5), 1e-14);
    EXPECT_TRUE(grads[i].isApprox(m.InputGradients(xs[i]), 1e-12));
  }
}

TimeSeriesDataset SmallSpike(int n) {
  SpikeConfig cfg;
  cfg.n_samples = n;
  cfg.t = 30;
  return GenerateSpike(cfg, SeededRng(30));
}

TEST(PredictorTest, TrainingIsDeterministicAndLearns) {
  const auto ds = SmallSpike(120);
  PredictorHyper h;
  h.hidden = 8;
  h.epochs = 15;
  h.lr = 0.01;
  const auto a = TrainPredictor(ds, h, SeededRng(31));
  const auto b = TrainPredictor(ds, h, SeededRng(31));
  EXPECT_EQ(Flatten(a.model.Tensors()), Flatten(b.model.Tensors()));
  ASSERT_EQ(a.report.train_loss.size(), 15u);
  EXPECT_LT(a.report.train_loss.back(), a.report.train_loss.front());
  EXPECT_GT(ModelAuroc(a.model, ds), 0.8);
}

TEST(PredictorTest, ConstantLabelsTrainWithoutError) {
  auto ds = SmallSpike(40);
  for (auto& s : ds.samples) s.y.setZero();
  PredictorHyper h;
  h.hidden = 4;
  h.epochs = 5;
  h.lr = 0.05;
  const auto r = TrainPredictor(ds, h, SeededRng(32));
  for (double v : r.report.val_auroc) EXPECT_TRUE(std::isnan(v));
  EXPECT_LT(r.model.PrefixProbabilities(ds.samples[0].x).maxCoeff(), 0.5);
  EXPECT_THROW(ModelAuroc(r.model, ds), Error);
}

TEST(PredictorTest, InvalidHyperRejected) {
  const auto ds = SmallSpike(5);
  PredictorHyper h;
  h.hidden = 0;
  EXPECT_THROW(TrainPredictor(ds, h, SeededRng(1)), Error);
  EXPECT_THROW(TrainPredictor(TimeSeriesDataset{}, PredictorHyper{}, SeededRng(1)), Error);
}

TEST(PredictorTest, CheckpointIsBitFaithful) {
  const auto m = RandomModel(3, 7, 40);
  const auto dir = testing::TempDir("predictor_ckpt");
  m.Save(dir / "p.ckpt");
  const auto back = RecurrentClassifier::Load(dir / "p.ckpt");
  EXPECT_EQ(Flatten(m.Tensors()), Flatten(back.Tensors()));
  SeededRng rng(41);
  const Eigen::MatrixXd x = testing::RandomMatrix(3, 5, rng);
  EXPECT_TRUE(m.PrefixProbabilities(x) == back.PrefixProbabilities(x));
}

TEST(PredictorTest, CorruptCheckpointRejected) {
  const auto dir = testing::TempDir("predictor_bad");
  std::ofstream(dir / "p.ckpt") << "not a checkpoint";
  EXPECT_THROW(RecurrentClassifier::Load(dir / "p.ckpt"), Error);
}

TEST(PredictorTest, ReinitializeChangesOnlyItsGroup) {
  auto m = RandomModel(2, 4, 50);
  const auto before = m;
  SeededRng rng(51);
  m.Reinitialize(PredictorParamGroup::kHead, rng);
  EXPECT_FALSE(m.head_w() == before.head_w());
  EXPECT_TRUE(m.gru().w_hh == before.gru().w_hh);
  m.Reinitialize(PredictorParamGroup::kGates, rng);
  EXPECT_FALSE(m.gru().w_hh.topRows(8) == before.gru().w_hh.topRows(8));
  EXPECT_TRUE(m.gru().w_hh.bottomRows(4) == before.gru().w_hh.bottomRows(4));
}

}  // namespace
}  // namespace tsfit
