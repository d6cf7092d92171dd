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

#ifndef TSFIT_SIMDATA_H_
#define TSFIT_SIMDATA_H_

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/dataset.h"
#include "tsfit/rng.h"

namespace tsfit {

// Three NARMA(l) features with linear trends and random additive spikes. The
// label switches on at the first spike of feature 0 and stays on.
struct SpikeConfig {
  int n_samples = 100;
  int t = 80;
  int d = 3;
  int narma_order = 2;
  // x(t+1) = a0 x(t) + a1 x(t) sum_{i<l} x(t-i) + a2 u(t-l+1) u(t) + a3
  std::array<double, 4> narma_coeffs = {0.3, 0.05, 1.5, 0.1};
  double noise_std = 0.03;
  std::vector<double> trend = {0.0, 0.003, 0.065};
  double spike_prob = 0.5;
  double spike_rate = 2.0;
  double spike_magnitude = 2.0;

  void Validate() const;
};

// Two-state HMM with Gaussian emissions; in state s the label is
// Bernoulli(sigmoid(x[driver[s]])).
struct StateConfig {
  int n_samples = 100;
  int t = 200;
  std::vector<double> initial = {0.5, 0.5};
  Eigen::MatrixXd trans = (Eigen::MatrixXd(2, 2) << 0.1, 0.9, 0.1, 0.9).finished();
  std::vector<Eigen::VectorXd> means = {
      (Eigen::VectorXd(3) << 0.1, 1.6, 0.5).finished(),
      (Eigen::VectorXd(3) << -0.1, -0.4, -1.5).finished()};
  double marginal_var = 0.8;
  double cross_cov = 0.01;
  // Correlated feature pair per state.
  std::vector<std::array<int, 2>> cross_pairs = {{1, 2}, {0, 2}};
  std::vector<int> driver = {1, 2};

  int n_states() const { return static_cast<int>(initial.size()); }
  int d() const { return static_cast<int>(means.front().size()); }
  std::vector<Eigen::MatrixXd> EmissionCovariances() const;
  void Validate() const;
};

// Three-state sticky HMM; within each constant-state segment every feature
// is an RBF Gaussian process around the state's mean.
struct SwitchConfig {
  int n_samples = 100;
  int t = 100;
  std::vector<double> initial = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  Eigen::MatrixXd trans =
      (Eigen::MatrixXd(3, 3) << 0.95, 0.02, 0.03, 0.02, 0.95, 0.03, 0.03, 0.02, 0.95).finished();
  std::vector<Eigen::VectorXd> means = {
      (Eigen::VectorXd(3) << 0.8, -0.5, -0.2).finished(),
      (Eigen::VectorXd(3) << 0.0, -1.0, 0.0).finished(),
      (Eigen::VectorXd(3) << -0.2, -0.2, 0.8).finished()};
  double marginal_var = 0.1;
  double rbf_gamma = 0.2;
  std::vector<int> driver = {0, 1, 2};

  int n_states() const { return static_cast<int>(initial.size()); }
  int d() const { return static_cast<int>(means.front().size()); }
  void Validate() const;
};

TimeSeriesDataset GenerateSpike(const SpikeConfig& cfg, const SeededRng& rng);

// `hidden_states`, when given, receives the latent state path of every sample.
TimeSeriesDataset GenerateState(const StateConfig& cfg, const SeededRng& rng,
                                std::vector<std::vector<int>>* hidden_states = nullptr);
TimeSeriesDataset GenerateSwitch(const SwitchConfig& cfg, const SeededRng& rng,
                                 std::vector<std::vector<int>>* hidden_states = nullptr);

// Markov chain path of length t.
std::vector<int> SampleMarkovChain(const std::vector<double>& initial,
                                   const Eigen::MatrixXd& trans, int t, SeededRng& rng);

}  // namespace tsfit

#endif  // TSFIT_SIMDATA_H_
