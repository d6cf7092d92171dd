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

#ifndef TSFIT_GRU_H_
#define TSFIT_GRU_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/rng.h"

namespace tsfit {

// Single-layer GRU cell, gate order [reset; update; candidate] in the stacked
// 3H-row weight matrices:
//   r = sigmoid(W_r x + b_ir + U_r h + b_hr)
//   z = sigmoid(W_z x + b_iz + U_z h + b_hz)
//   n = tanh(W_n x + b_in + r * (U_n h + b_hn))
//   h' = (1 - z) * n + z * h
// All batch quantities are column-major: one column per sequence.
struct GruCell {
  int input_dim = 0;
  int hidden_dim = 0;
  Eigen::MatrixXd w_ih;  // 3H x D
  Eigen::MatrixXd w_hh;  // 3H x H
  Eigen::VectorXd b_ih;  // 3H
  Eigen::VectorXd b_hh;  // 3H

  GruCell() = default;
  GruCell(int input, int hidden);  // zero-initialized

  // Uniform(-1/sqrt(H), 1/sqrt(H)) on every parameter.
  void InitUniform(SeededRng& rng);
  // Re-draws only the candidate rows (n) or only the gate rows (r, z).
  void ReinitCandidate(SeededRng& rng);
  void ReinitGates(SeededRng& rng);

  Eigen::MatrixXd Step(const Eigen::MatrixXd& h, const Eigen::MatrixXd& x) const;
  // Step from one state h (H x 1) for every column of x.
  Eigen::MatrixXd StepShared(const Eigen::VectorXd& h, const Eigen::MatrixXd& x) const;

  // Views over every parameter tensor in a fixed order (w_ih, w_hh, b_ih, b_hh).
  std::vector<std::span<double>> Tensors();
  std::vector<std::span<const double>> Tensors() const;
};

// Per-step activations kept for backpropagation through time. h[k] is the
// state after k inputs; h[0] is the initial state.
struct GruTrace {
  std::vector<Eigen::MatrixXd> h;
  std::vector<Eigen::MatrixXd> r, z, n, hn;
  int steps() const { return static_cast<int>(r.size()); }
};

// xs[k] is the D x B input at step k.
GruTrace GruForward(const GruCell& cell, const std::vector<Eigen::MatrixXd>& xs,
                    const Eigen::MatrixXd& h0);

// Reverse accumulation. dh_out[k] is dLoss/dh[k+1] coming from outside the
// recurrence (empty matrices are treated as zero). Gradients are accumulated
// into `grads` (which must be shaped like `cell`); input gradients are
// written to `dxs` when non-null.
void GruBackward(const GruCell& cell, const std::vector<Eigen::MatrixXd>& xs,
                 const GruTrace& trace, const std::vector<Eigen::MatrixXd>& dh_out,
                 GruCell* grads, std::vector<Eigen::MatrixXd>* dxs);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 5.0;
};

class Adam {
 public:
  Adam(AdamOptions opts, const std::vector<std::span<double>>& params);

  void Step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads);

 private:
  AdamOptions opts_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

inline double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
// Numerically stable log(1 + e^v).
inline double Softplus(double v) {
  return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

std::vector<double> Flatten(const std::vector<std::span<const double>>& tensors);
void Unflatten(std::span<const double> flat, const std::vector<std::span<double>>& tensors);

}  // namespace tsfit

#endif  // TSFIT_GRU_H_
