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

#ifndef TSFIT_DIVERGENCE_H_
#define TSFIT_DIVERGENCE_H_

#include <vector>

namespace tsfit {

// Global probability clamp applied before any log.
inline constexpr double kProbClamp = 1e-6;

// Categorical predictive distribution with every entry in
// [kProbClamp, 1 - kProbClamp], renormalized to sum to one.
class PredictiveDistribution {
 public:
  explicit PredictiveDistribution(std::vector<double> probs);
  // Bernoulli outcome with P(y = 1) = p1.
  static PredictiveDistribution Binary(double p1);

  const std::vector<double>& probs() const { return probs_; }
  int arity() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

// KL(p || q) = sum_i p_i ln(p_i / q_i). Throws ArityMismatch.
double KlCategorical(const PredictiveDistribution& p, const PredictiveDistribution& q);

// H(p, q) = -sum_i p_i ln q_i.
double CrossEntropy(const PredictiveDistribution& p, const PredictiveDistribution& q);

}  // namespace tsfit

#endif  // TSFIT_DIVERGENCE_H_
