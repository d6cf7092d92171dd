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

#ifndef TSFIT_BASELINES_H_
#define TSFIT_BASELINES_H_

#include <cstdint>

#include <Eigen/Dense>

#include "tsfit/classifier.h"
#include "tsfit/dataset.h"
#include "tsfit/fit.h"
#include "tsfit/rng.h"

namespace tsfit {

struct LimeOptions {
  int n_perturb = 500;
  // <= 0 means 0.75 * sqrt(D).
  double kernel_width = 0.0;
  double ridge = 1e-3;
};

struct BaselineConfig {
  // Training-split statistics: [min, max] for FO, the reservoir for AFO and
  // the per-feature scale of the LIME perturbations.
  FeatureStats stats;
  int occlusion_draws = 10;
  int ig_steps = 256;
  // IG path start; empty means the all-zeros sequence.
  Eigen::MatrixXd ig_baseline;
  LimeOptions lime;

  // Throws InvalidArgument on ig_steps < 2, n_perturb < D + 2 and the like.
  void Validate(int dim) const;
};

// The occlusion methods and LIME compare the model output at t, i.e. after
// x_0..x_t, re-running only the step at t from the cached history state.

// |p(x with x_{d,t} ~ U[min_d, max_d]) - p(x)| averaged over the draws.
ImportanceMatrix FeatureOcclusion(const SequenceClassifier& model, const Eigen::MatrixXd& x,
                                  const BaselineConfig& cfg, const SeededRng& rng,
                                  int64_t subject = 0);

// Same as FeatureOcclusion with replacements bootstrapped from the pooled
// training values of feature d.
ImportanceMatrix AugmentedFeatureOcclusion(const SequenceClassifier& model,
                                           const Eigen::MatrixXd& x, const BaselineConfig& cfg,
                                           const SeededRng& rng, int64_t subject = 0);

// Signed Riemann (right-endpoint) integrated gradients of the final-step
// probability along the straight path from the baseline.
ImportanceMatrix IntegratedGradients(const DifferentiableClassifier& model,
                                     const Eigen::MatrixXd& x, const BaselineConfig& cfg,
                                     int64_t subject = 0);

// Weighted ridge surrogate fitted per timestep on Gaussian perturbations of
// x_t. Signed coefficients are kept; ranking uses their magnitude.
ImportanceMatrix LocalLinearExplain(const SequenceClassifier& model, const Eigen::MatrixXd& x,
                                    const BaselineConfig& cfg, const SeededRng& rng,
                                    int64_t subject = 0);

// Weighted ridge regression with an unpenalized intercept. Returns the slope
// coefficients. Retries with ridge x10 up to three times before throwing
// SingularFit.
Eigen::VectorXd WeightedRidge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                              const Eigen::VectorXd& weights, double ridge);

}  // namespace tsfit

#endif  // TSFIT_BASELINES_H_
