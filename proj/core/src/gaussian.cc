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

#include "tsfit/gaussian.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tsfit/error.h"

namespace tsfit {
namespace {

constexpr double kPivotFloor = 1e-12;
constexpr double kJitterSchedule[] = {0.0, 1e-8, 1e-6, 1e-4};

// Returns false instead of throwing so the jitter loop stays cheap.
bool TryCholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
  const Eigen::Index n = a.rows();
  l.setZero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > kPivotFloor)) return false;
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
  }
  return true;
}

void CheckSymmetric(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "covariance must be a non-empty square matrix");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw Error(ErrorKind::kInvalidArgument, "covariance is not symmetric within 1e-8");
  }
}

}  // namespace

double GaussianParams::LogPdf(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = chol.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_det = chol.diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - log_det -
         0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd Cholesky(const Eigen::MatrixXd& sigma) {
  CheckSymmetric(sigma);
  Eigen::MatrixXd l;
  if (!TryCholesky(sigma, l)) {
    throw Error(ErrorKind::kNotPositiveDefinite,
                "pivot <= 1e-12 in a " + std::to_string(sigma.rows()) + "x" +
                    std::to_string(sigma.cols()) + " covariance");
  }
  return l;
}

Eigen::MatrixXd CholeskyWithJitter(const Eigen::MatrixXd& sigma) {
  CheckSymmetric(sigma);
  Eigen::MatrixXd l;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
  for (double jitter : kJitterSchedule) {
    if (TryCholesky(sigma + jitter * eye, l)) return l;
  }
  throw Error(ErrorKind::kNotPositiveDefinite,
              "covariance not positive-definite even with 1e-4 jitter");
}

GaussianParams MakeGaussian(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) {
  if (mean.size() != cov.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "mean/covariance dimension mismatch");
  }
  return GaussianParams{std::move(mean), CholeskyWithJitter(cov)};
}

std::vector<int> Complement(std::span<const int> subset, int dim) {
  std::vector<bool> in(dim, false);
  for (int i : subset) {
    if (i < 0 || i >= dim) throw Error(ErrorKind::kInvalidArgument, "index out of range");
    in[i] = true;
  }
  std::vector<int> rest;
  for (int i = 0; i < dim; ++i) {
    if (!in[i]) rest.push_back(i);
  }
  return rest;
}

GaussianParams GaussianCondition(const GaussianParams& params,
                                 std::span<const int> observed_idx,
                                 const Eigen::VectorXd& observed_vals) {
  const int dim = params.dim();
  if (observed_idx.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "observed index set is empty");
  }
  if (static_cast<Eigen::Index>(observed_idx.size()) != observed_vals.size()) {
    throw Error(ErrorKind::kInvalidArgument, "observed values do not match observed indices");
  }
  const std::vector<int> free_idx = Complement(observed_idx, dim);
  if (free_idx.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "observed indices must be a strict subset");
  }
  if (free_idx.size() + observed_idx.size() != static_cast<size_t>(dim)) {
    throw Error(ErrorKind::kInvalidArgument, "observed indices contain duplicates");
  }

  const Eigen::MatrixXd cov = params.Covariance();
  const auto no = static_cast<Eigen::Index>(observed_idx.size());
  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  Eigen::MatrixXd s11(no, no), s21(nf, no), s22(nf, nf);
  Eigen::VectorXd mu1(no), mu2(nf);
  for (Eigen::Index i = 0; i < no; ++i) {
    mu1(i) = params.mean(observed_idx[i]);
    for (Eigen::Index j = 0; j < no; ++j) s11(i, j) = cov(observed_idx[i], observed_idx[j]);
  }
  for (Eigen::Index i = 0; i < nf; ++i) {
    mu2(i) = params.mean(free_idx[i]);
    for (Eigen::Index j = 0; j < no; ++j) s21(i, j) = cov(free_idx[i], observed_idx[j]);
    for (Eigen::Index j = 0; j < nf; ++j) s22(i, j) = cov(free_idx[i], free_idx[j]);
  }

  const Eigen::MatrixXd l11 = CholeskyWithJitter(s11);
  // gain = S21 * S11^{-1}, via two triangular solves on S12.
  const Eigen::MatrixXd gain =
      l11.transpose()
          .triangularView<Eigen::Upper>()
          .solve(l11.triangularView<Eigen::Lower>().solve(s21.transpose()))
          .transpose();
  Eigen::VectorXd cond_mean = mu2 + gain * (observed_vals - mu1);
  Eigen::MatrixXd cond_cov = s22 - gain * s21.transpose();
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose());
  return GaussianParams{std::move(cond_mean), CholeskyWithJitter(cond_cov)};
}

Eigen::MatrixXd SampleMvn(const GaussianParams& params, SeededRng& rng, int n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "sample count must be >= 1");
  const int dim = params.dim();
  Eigen::MatrixXd z(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) z(i, j) = rng.Normal();
  }
  Eigen::MatrixXd out = params.chol.triangularView<Eigen::Lower>() * z;
  out.colwise() += params.mean;
  return out;
}

}  // namespace tsfit
