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

#ifndef TSFIT_GENERATOR_H_
#define TSFIT_GENERATOR_H_

#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/dataset.h"
#include "tsfit/gaussian.h"
#include "tsfit/gru.h"
#include "tsfit/rng.h"

namespace tsfit {

enum class GeneratorVariant { kRecurrentGaussian, kCarryForward, kMeanImpute };

std::string_view VariantName(GeneratorVariant v);
// Accepts "recurrent_gaussian", "carry_forward", "mean_impute".
GeneratorVariant ParseVariant(std::string_view name);

// Approximates p(x_t | X_{0:t-1}) with a Gaussian.
class ConditionalGenerator {
 public:
  virtual ~ConditionalGenerator() = default;

  virtual GeneratorVariant variant() const = 0;
  virtual int dim() const = 0;
  // Law of the next observation given every column of `history` (which may
  // have zero columns, giving the start distribution).
  virtual GaussianParams NextStepDistribution(const Eigen::MatrixXd& history) const = 0;
  // Entry t is the law of x_t given x_0..x_{t-1}, for t = 0..T-1.
  virtual std::vector<GaussianParams> NextStepSequence(const Eigen::MatrixXd& x) const;
  virtual void Save(const std::filesystem::path& path) const = 0;

  const GaussianParams& start() const { return start_; }
  void set_start(GaussianParams p) { start_ = std::move(p); }

 protected:
  GaussianParams start_;
};

// GRU encoder over the history plus a linear head emitting the mean and a
// full Cholesky factor (diagonal = softplus(raw) + 1e-4).
class RecurrentGaussianGenerator : public ConditionalGenerator {
 public:
  RecurrentGaussianGenerator() = default;
  RecurrentGaussianGenerator(int dim, int hidden);

  GeneratorVariant variant() const override { return GeneratorVariant::kRecurrentGaussian; }
  int dim() const override { return gru_.input_dim; }
  GaussianParams NextStepDistribution(const Eigen::MatrixXd& history) const override;
  std::vector<GaussianParams> NextStepSequence(const Eigen::MatrixXd& x) const override;
  void Save(const std::filesystem::path& path) const override;

  // Maps one encoder state to the emitted Gaussian.
  GaussianParams HeadParams(const Eigen::VectorXd& h) const;
  // Number of head outputs: D mean entries + D(D+1)/2 Cholesky entries.
  int head_outputs() const;

  GruCell& gru() { return gru_; }
  const GruCell& gru() const { return gru_; }
  Eigen::MatrixXd& head_w() { return head_w_; }
  const Eigen::MatrixXd& head_w() const { return head_w_; }
  Eigen::VectorXd& head_b() { return head_b_; }
  const Eigen::VectorXd& head_b() const { return head_b_; }

  std::vector<std::span<double>> Tensors();
  std::vector<std::span<const double>> Tensors() const;

 private:
  GruCell gru_;
  Eigen::MatrixXd head_w_;
  Eigen::VectorXd head_b_;
};

// mean = x_{t-1}, covariance = diag(sigma2) with sigma2 the mean squared
// one-step difference of each feature on the training data.
class CarryForwardGenerator : public ConditionalGenerator {
 public:
  explicit CarryForwardGenerator(Eigen::VectorXd sigma2) : sigma2_(std::move(sigma2)) {}

  GeneratorVariant variant() const override { return GeneratorVariant::kCarryForward; }
  int dim() const override { return static_cast<int>(sigma2_.size()); }
  GaussianParams NextStepDistribution(const Eigen::MatrixXd& history) const override;
  void Save(const std::filesystem::path& path) const override;

  const Eigen::VectorXd& sigma2() const { return sigma2_; }

 private:
  Eigen::VectorXd sigma2_;
};

// History-independent N(training means, diag(training variances)).
class MeanImputeGenerator : public ConditionalGenerator {
 public:
  MeanImputeGenerator(Eigen::VectorXd mean, Eigen::VectorXd var)
      : mean_(std::move(mean)), var_(std::move(var)) {}

  GeneratorVariant variant() const override { return GeneratorVariant::kMeanImpute; }
  int dim() const override { return static_cast<int>(mean_.size()); }
  GaussianParams NextStepDistribution(const Eigen::MatrixXd& history) const override;
  void Save(const std::filesystem::path& path) const override;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& var() const { return var_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
};

struct GeneratorHyper {
  int hidden = 10;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double clip_norm = 5.0;
  int epochs = 100;
  int batch_size = 32;
  double val_fraction = 0.2;
};

struct TrainedGenerator {
  std::unique_ptr<ConditionalGenerator> generator;
  // Mean per-step Gaussian NLL; empty for the statistics-only variants.
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

// Fits the requested variant. The recurrent generator minimizes the exact
// Gaussian NLL of x_t given the encoded x_0..x_{t-1}, summed over t >= 1;
// the other two only compute feature statistics.
TrainedGenerator TrainGenerator(const TimeSeriesDataset& ds, GeneratorVariant variant,
                                const GeneratorHyper& hyper, const SeededRng& rng);

std::unique_ptr<ConditionalGenerator> LoadGenerator(const std::filesystem::path& path);

// Mean NLL of x_t under the generator over every sample and every t >= 1.
double MeanNll(const ConditionalGenerator& gen, const TimeSeriesDataset& ds);

// Gaussian of x_0 fitted over the samples (diagonal floored at 1e-4).
GaussianParams FitStartDistribution(const TimeSeriesDataset& ds);

// L draws (|S^c| x L) of the unobserved features from `next` conditioned on
// x_S = observed. Rows follow the ascending complement order.
Eigen::MatrixXd SampleCounterfactual(const GaussianParams& next, std::span<const int> subset,
                                     const Eigen::VectorXd& observed, int count, SeededRng& rng);
Eigen::MatrixXd SampleCounterfactual(const ConditionalGenerator& gen,
                                     const Eigen::MatrixXd& history, std::span<const int> subset,
                                     const Eigen::VectorXd& observed, int count, SeededRng& rng);

// Uniform-with-replacement draws from the pooled training values of one
// feature. Throws EmptyReservoir.
std::vector<double> MarginalBootstrapSample(const FeatureStats& stats, int feature,
                                            SeededRng& rng, int n);

}  // namespace tsfit

#endif  // TSFIT_GENERATOR_H_
