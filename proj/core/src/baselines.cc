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

#include "tsfit/baselines.h"

#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "tsfit/error.h"
#include "tsfit/generator.h"

namespace tsfit {
namespace {

constexpr int kIgChunk = 64;

ImportanceMatrix EmptyMatrix(const Eigen::MatrixXd& x, const char* method, int64_t subject) {
  ImportanceMatrix out;
  out.subject = subject;
  out.method = method;
  out.scores = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Eigen::Index d = 0; d < x.rows(); ++d) out.row_labels.push_back(fmt::format("{{{}}}", d));
  return out;
}

using Replacement = std::function<double(int feature, SeededRng& rng)>;

ImportanceMatrix Occlusion(const SequenceClassifier& model, const Eigen::MatrixXd& x,
                           const BaselineConfig& cfg, const SeededRng& rng, int64_t subject,
                           const char* method, const Replacement& draw) {
  const int d_max = static_cast<int>(x.rows());
  cfg.Validate(d_max);
  ImportanceMatrix out = EmptyMatrix(x, method, subject);
  const int draws = cfg.occlusion_draws;
  const Eigen::MatrixXd traj = model.StateTrajectory(x);
  const Eigen::RowVectorXd probs = model.Readout(traj);
  Eigen::MatrixXd inputs(d_max, static_cast<Eigen::Index>(d_max) * draws);
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (int d = 0; d < d_max; ++d) {
      SeededRng cell = rng.Derive({static_cast<uint64_t>(d), static_cast<uint64_t>(t)});
      for (int l = 0; l < draws; ++l) {
        auto col = inputs.col(static_cast<Eigen::Index>(d) * draws + l);
        col = x.col(t);
        col(d) = draw(d, cell);
      }
    }
    const Eigen::RowVectorXd p = model.Readout(model.StepFrom(traj.col(t), inputs));
    for (int d = 0; d < d_max; ++d) {
      out.scores(d, t) = (p.segment(static_cast<Eigen::Index>(d) * draws, draws).array() -
                          probs(t + 1))
                             .abs()
                             .mean();
    }
  }
  return out;
}

}  // namespace

void BaselineConfig::Validate(int dim) const {
  if (occlusion_draws < 1) throw Error(ErrorKind::kInvalidArgument, "occlusion_draws must be >= 1");
  if (ig_steps < 2) throw Error(ErrorKind::kInvalidArgument, "ig_steps must be >= 2");
  if (lime.n_perturb < dim + 2) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("lime n_perturb must be >= D + 2 = {}", dim + 2));
  }
  if (lime.ridge < 0) throw Error(ErrorKind::kInvalidArgument, "lime ridge must be >= 0");
  if (stats.dim() != dim) {
    throw Error(ErrorKind::kArityMismatch,
                fmt::format("feature statistics cover {} features, input has {}", stats.dim(), dim));
  }
}

ImportanceMatrix FeatureOcclusion(const SequenceClassifier& model, const Eigen::MatrixXd& x,
                                  const BaselineConfig& cfg, const SeededRng& rng,
                                  int64_t subject) {
  return Occlusion(model, x, cfg, rng, subject, "FO", [&cfg](int d, SeededRng& r) {
    return r.Uniform(cfg.stats.min(d), cfg.stats.max(d));
  });
}

ImportanceMatrix AugmentedFeatureOcclusion(const SequenceClassifier& model,
                                           const Eigen::MatrixXd& x, const BaselineConfig& cfg,
                                           const SeededRng& rng, int64_t subject) {
  for (int d = 0; d < x.rows(); ++d) {
    if (d >= static_cast<int>(cfg.stats.reservoir.size()) || cfg.stats.reservoir[d].empty()) {
      throw Error(ErrorKind::kEmptyReservoir, fmt::format("no training values for feature {}", d));
    }
  }
  return Occlusion(model, x, cfg, rng, subject, "AFO", [&cfg](int d, SeededRng& r) {
    const auto& pool = cfg.stats.reservoir[d];
    return pool[static_cast<size_t>(r.UniformInt(static_cast<int64_t>(pool.size())))];
  });
}

ImportanceMatrix IntegratedGradients(const DifferentiableClassifier& model,
                                     const Eigen::MatrixXd& x, const BaselineConfig& cfg,
                                     int64_t subject) {
  if (cfg.ig_steps < 2) throw Error(ErrorKind::kInvalidArgument, "ig_steps must be >= 2");
  ImportanceMatrix out = EmptyMatrix(x, "IG", subject);
  out.rank_by_magnitude = true;
  Eigen::MatrixXd base = cfg.ig_baseline;
  if (base.size() == 0) base = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  if (base.rows() != x.rows() || base.cols() != x.cols()) {
    throw Error(ErrorKind::kArityMismatch, "IG baseline shape differs from the input");
  }
  const Eigen::MatrixXd delta = x - base;
  const int k_max = cfg.ig_steps;
  Eigen::MatrixXd grad_sum = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  std::vector<Eigen::MatrixXd> path;
  std::vector<Eigen::MatrixXd> grads;
  Eigen::VectorXd probs;
  for (int k0 = 1; k0 <= k_max; k0 += kIgChunk) {
    const int k1 = std::min(k_max, k0 + kIgChunk - 1);
    path.clear();
    for (int k = k0; k <= k1; ++k) {
      path.push_back(base + (static_cast<double>(k) / k_max) * delta);
    }
    model.FinalOutputGradients(path, &probs, &grads);
    for (const auto& g : grads) grad_sum += g;
  }
  out.scores = delta.cwiseProduct(grad_sum) / k_max;
  return out;
}

Eigen::VectorXd WeightedRidge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                              const Eigen::VectorXd& weights, double ridge) {
  const double wsum = weights.sum();
  if (!(wsum > 0)) throw Error(ErrorKind::kSingularFit, "kernel weights sum to zero");
  const Eigen::RowVectorXd fmean = (weights.transpose() * features) / wsum;
  const double tmean = weights.dot(targets) / wsum;
  const Eigen::MatrixXd fc = features.rowwise() - fmean;
  const Eigen::VectorXd tc = targets.array() - tmean;
  const Eigen::MatrixXd gram = fc.transpose() * weights.asDiagonal() * fc;
  const Eigen::VectorXd rhs = fc.transpose() * weights.asDiagonal() * tc;
  double lambda = ridge;
  for (int attempt = 0; attempt <= 3; ++attempt, lambda = lambda > 0 ? lambda * 10 : 1e-8) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) continue;
    Eigen::VectorXd beta = llt.solve(rhs);
    if (beta.allFinite()) return beta;
  }
  throw Error(ErrorKind::kSingularFit,
              fmt::format("ridge system singular after raising lambda to {}", lambda));
}

ImportanceMatrix LocalLinearExplain(const SequenceClassifier& model, const Eigen::MatrixXd& x,
                                    const BaselineConfig& cfg, const SeededRng& rng,
                                    int64_t subject) {
  const int d_max = static_cast<int>(x.rows());
  cfg.Validate(d_max);
  ImportanceMatrix out = EmptyMatrix(x, "LIME", subject);
  out.rank_by_magnitude = true;
  const int n = cfg.lime.n_perturb;
  const double width =
      cfg.lime.kernel_width > 0 ? cfg.lime.kernel_width : 0.75 * std::sqrt(static_cast<double>(d_max));
  Eigen::VectorXd scale = cfg.stats.stddev;
  for (int d = 0; d < d_max; ++d) {
    if (!(scale(d) > 0)) scale(d) = 1.0;
  }

  const Eigen::MatrixXd traj = model.StateTrajectory(x);
  Eigen::MatrixXd eps(n, d_max);
  Eigen::MatrixXd inputs(d_max, n);
  Eigen::VectorXd weights(n);
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    SeededRng cell = rng.Derive({static_cast<uint64_t>(t)});
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < d_max; ++d) eps(i, d) = cell.Normal();
    }
    weights = (-eps.rowwise().squaredNorm() / (width * width)).array().exp();
    const Eigen::MatrixXd deltas = eps * scale.asDiagonal();
    inputs = deltas.transpose();
    inputs.colwise() += x.col(t);
    const Eigen::VectorXd y = model.Readout(model.StepFrom(traj.col(t), inputs)).transpose();
    out.scores.col(t) = WeightedRidge(deltas, y, weights, cfg.lime.ridge);
  }
  return out;
}

}  // namespace tsfit
