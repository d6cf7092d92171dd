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

#ifndef TSFIT_TESTS_TEST_UTIL_H_
#define TSFIT_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "tsfit/classifier.h"
#include "tsfit/gaussian.h"
#include "tsfit/generator.h"
#include "tsfit/rng.h"

namespace tsfit::testing {

inline Eigen::MatrixXd RandomMatrix(int rows, int cols, SeededRng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = scale * rng.Normal();
  }
  return m;
}

// A A^T + I.
inline Eigen::MatrixXd RandomSpd(int d, SeededRng& rng) {
  const Eigen::MatrixXd a = RandomMatrix(d, d, rng);
  return a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
}

// Fresh directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("tsfit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Memoryless classifier p_t = sigmoid(w . x_t + b). The state is the last
// logit, so the state after x_0..x_t depends on x_t only.
class LinearSigmoidClassifier : public SequenceClassifier {
 public:
  LinearSigmoidClassifier(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}

  int input_dim() const override { return static_cast<int>(w_.size()); }
  int state_dim() const override { return 1; }
  Eigen::MatrixXd InitialStates(int batch) const override {
    return Eigen::MatrixXd::Constant(1, batch, b_);
  }
  Eigen::MatrixXd Step(const Eigen::MatrixXd&, const Eigen::MatrixXd& inputs) const override {
    Eigen::MatrixXd out = w_.transpose() * inputs;
    out.array() += b_;
    return out;
  }
  Eigen::RowVectorXd Readout(const Eigen::MatrixXd& states) const override {
    return states.row(0).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }

 private:
  Eigen::VectorXd w_;
  double b_;
};

// Generator returning the same Gaussian whatever the history.
class FixedGaussianGenerator : public ConditionalGenerator {
 public:
  explicit FixedGaussianGenerator(GaussianParams p) : p_(std::move(p)) { set_start(p_); }
  GeneratorVariant variant() const override { return GeneratorVariant::kMeanImpute; }
  int dim() const override { return p_.dim(); }
  GaussianParams NextStepDistribution(const Eigen::MatrixXd&) const override { return p_; }
  void Save(const std::filesystem::path&) const override {}

 private:
  GaussianParams p_;
};

}  // namespace tsfit::testing

#endif  // TSFIT_TESTS_TEST_UTIL_H_
