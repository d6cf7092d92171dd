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

#include "tsfit/divergence.h"

#include <algorithm>
#include <cmath>

#include "tsfit/error.h"

namespace tsfit {

PredictiveDistribution::PredictiveDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorKind::kInvalidArgument, "empty distribution");
  double sum = 0.0;
  for (double& p : probs_) {
    if (!std::isfinite(p)) throw Error(ErrorKind::kInvalidArgument, "non-finite probability");
    p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    sum += p;
  }
  for (double& p : probs_) p /= sum;
}

PredictiveDistribution PredictiveDistribution::Binary(double p1) {
  p1 = std::clamp(p1, kProbClamp, 1.0 - kProbClamp);
  // Build the pair directly so the two entries sum to exactly 1.
  PredictiveDistribution d({1.0 - p1, p1});
  return d;
}

double KlCategorical(const PredictiveDistribution& p, const PredictiveDistribution& q) {
  if (p.arity() != q.arity()) {
    throw Error(ErrorKind::kArityMismatch, "KL between distributions of different arity");
  }
  double kl = 0.0;
  for (int i = 0; i < p.arity(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

double CrossEntropy(const PredictiveDistribution& p, const PredictiveDistribution& q) {
  if (p.arity() != q.arity()) {
    throw Error(ErrorKind::kArityMismatch, "cross-entropy between distributions of different arity");
  }
  double h = 0.0;
  for (int i = 0; i < p.arity(); ++i) h -= p[i] * std::log(q[i]);
  return h;
}

}  // namespace tsfit
