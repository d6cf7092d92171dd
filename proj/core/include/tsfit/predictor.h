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

#ifndef TSFIT_PREDICTOR_H_
#define TSFIT_PREDICTOR_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/classifier.h"
#include "tsfit/dataset.h"
#include "tsfit/gru.h"
#include "tsfit/rng.h"

namespace tsfit {

struct PredictorHyper {
  int hidden = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double clip_norm = 5.0;
  int epochs = 60;
  int batch_size = 32;
  double val_fraction = 0.2;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_auroc;
};

// Parameter groups in top-down cascading-randomization order.
enum class PredictorParamGroup { kHead, kCandidate, kGates };

// Single-layer GRU followed by a sigmoid read-out of the hidden state.
class RecurrentClassifier : public DifferentiableClassifier {
 public:
  RecurrentClassifier() = default;
  RecurrentClassifier(int input_dim, int hidden_dim);

  // Same init distribution as training uses.
  void InitRandom(SeededRng& rng);
  void Reinitialize(PredictorParamGroup group, SeededRng& rng);

  int input_dim() const override { return gru_.input_dim; }
  int state_dim() const override { return gru_.hidden_dim; }
  Eigen::MatrixXd InitialStates(int batch) const override;
  Eigen::MatrixXd Step(const Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs) const override;
  Eigen::RowVectorXd Readout(const Eigen::MatrixXd& states) const override;
  Eigen::MatrixXd StepFrom(const Eigen::VectorXd& state,
                           const Eigen::MatrixXd& inputs) const override {
    return gru_.StepShared(state, inputs);
  }
  void FinalOutputGradients(const std::vector<Eigen::MatrixXd>& xs, Eigen::VectorXd* probs,
                            std::vector<Eigen::MatrixXd>* grads) const override;

  // d P(y = target_class | X_{0:T}) / d x_{d,t} at the final step, pre-clamp.
  Eigen::MatrixXd InputGradients(const Eigen::MatrixXd& x, int target_class = 1) const;

  GruCell& gru() { return gru_; }
  const GruCell& gru() const { return gru_; }
  Eigen::RowVectorXd& head_w() { return head_w_; }
  const Eigen::RowVectorXd& head_w() const { return head_w_; }
  double& head_b() { return head_b_; }
  double head_b() const { return head_b_; }

  // Fixed order: GRU tensors, head weights, head bias.
  std::vector<std::span<double>> Tensors();
  std::vector<std::span<const double>> Tensors() const;

  void Save(const std::filesystem::path& path) const;
  static RecurrentClassifier Load(const std::filesystem::path& path);

 private:
  GruCell gru_;
  Eigen::RowVectorXd head_w_;
  double head_b_ = 0.0;
};

struct TrainedPredictor {
  RecurrentClassifier model;
  TrainReport report;
};

// Mean per-timestep binary cross-entropy with Adam. The last `val_fraction`
// of the samples is held out for the validation curves.
TrainedPredictor TrainPredictor(const TimeSeriesDataset& ds, const PredictorHyper& hyper,
                                const SeededRng& rng);

// Pooled per-timestep AUROC of the model's predictions against the labels.
double ModelAuroc(const SequenceClassifier& model, const TimeSeriesDataset& ds);

}  // namespace tsfit

#endif  // TSFIT_PREDICTOR_H_
