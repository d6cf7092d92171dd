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

#ifndef TSFIT_CLASSIFIER_H_
#define TSFIT_CLASSIFIER_H_

#include <vector>

#include <Eigen/Dense>

#include "tsfit/divergence.h"

namespace tsfit {

// A causal sequence classifier seen as a state machine: every explainer works
// against this interface so it can re-run the model from a cached history
// state instead of re-reading whole prefixes. Probabilities are P(y = 1),
// before the global clamp.
class SequenceClassifier {
 public:
  virtual ~SequenceClassifier() = default;

  virtual int input_dim() const = 0;
  virtual int state_dim() const = 0;
  // state_dim x batch, the state before any input.
  virtual Eigen::MatrixXd InitialStates(int batch) const = 0;
  // Advances each state column by the matching input column.
  virtual Eigen::MatrixXd Step(const Eigen::MatrixXd& states,
                               const Eigen::MatrixXd& inputs) const = 0;
  virtual Eigen::RowVectorXd Readout(const Eigen::MatrixXd& states) const = 0;
  // Advances a single state by each input column.
  virtual Eigen::MatrixXd StepFrom(const Eigen::VectorXd& state,
                                   const Eigen::MatrixXd& inputs) const {
    return Step(state.replicate(1, inputs.cols()), inputs);
  }

  // state_dim x (T + 1); column k is the state after the first k inputs.
  Eigen::MatrixXd StateTrajectory(const Eigen::MatrixXd& x) const;
  // p_t for t = 0..T-1, each the output after consuming x_0..x_t.
  Eigen::VectorXd PrefixProbabilities(const Eigen::MatrixXd& x) const;
  // Clamped predictive distribution from the first `t` columns of x.
  PredictiveDistribution PredictPrefix(const Eigen::MatrixXd& x, int t) const;
};

// A classifier that can report d p_final / d x for every input cell.
class DifferentiableClassifier : public SequenceClassifier {
 public:
  // For each sequence: final-step probability (pre-clamp) and its gradient
  // with respect to every input cell (D x T).
  virtual void FinalOutputGradients(const std::vector<Eigen::MatrixXd>& xs,
                                    Eigen::VectorXd* probs,
                                    std::vector<Eigen::MatrixXd>* grads) const = 0;
};

}  // namespace tsfit

#endif  // TSFIT_CLASSIFIER_H_
