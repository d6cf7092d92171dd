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

#ifndef TSFIT_GAUSSIAN_H_
#define TSFIT_GAUSSIAN_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/rng.h"

namespace tsfit {

// Multivariate normal N(mean, chol * chol^T). `chol` is lower-triangular with
// a strictly positive diagonal; use MakeGaussian to build one from a
// covariance and get the invariant checked.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;

  int dim() const { return static_cast<int>(mean.size()); }
  Eigen::MatrixXd Covariance() const { return chol * chol.transpose(); }
  // Log density of x.
  double LogPdf(const Eigen::VectorXd& x) const;
};

// Plain Cholesky. Throws NotPositiveDefinite when a pivot is <= 1e-12 and
// InvalidArgument when sigma is not square/symmetric within 1e-8.
Eigen::MatrixXd Cholesky(const Eigen::MatrixXd& sigma);

// Cholesky with the jitter schedule 0, 1e-8, 1e-6, 1e-4 (times I) applied
// before giving up.
Eigen::MatrixXd CholeskyWithJitter(const Eigen::MatrixXd& sigma);

GaussianParams MakeGaussian(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

// Conditional law of the complement of `observed_idx` given the observed
// coordinates take `observed_vals`. Result dimensions follow the ascending
// order of the complement indices.
GaussianParams GaussianCondition(const GaussianParams& params,
                                 std::span<const int> observed_idx,
                                 const Eigen::VectorXd& observed_vals);

// n draws, one per column (dim x n).
Eigen::MatrixXd SampleMvn(const GaussianParams& params, SeededRng& rng, int n);

// Ascending indices in [0, dim) that are not in `subset`.
std::vector<int> Complement(std::span<const int> subset, int dim);

}  // namespace tsfit

#endif  // TSFIT_GAUSSIAN_H_
