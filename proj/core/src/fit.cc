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

#include "tsfit/fit.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tsfit/error.h"

namespace tsfit {
namespace {

// p(y | X_{0:t-1}, x_{S,t}) by averaging the model over counterfactual
// completions of x_t. `state` is the model state after x_0..x_{t-1}.
double PartialPrediction(const SequenceClassifier& model, const Eigen::VectorXd& state,
                         const GaussianParams& next, const Eigen::VectorXd& x_t,
                         const FeatureSubset& subset, int samples, SeededRng& rng) {
  const int d = static_cast<int>(x_t.size());
  const auto& s = subset.indices();
  const std::vector<int> rest = Complement(s, d);
  Eigen::VectorXd observed(s.size());
  for (size_t i = 0; i < s.size(); ++i) observed(i) = x_t(s[i]);
  const Eigen::MatrixXd draws = SampleCounterfactual(next, s, observed, samples, rng);

  Eigen::MatrixXd inputs(d, samples);
  for (int l = 0; l < samples; ++l) {
    for (size_t i = 0; i < s.size(); ++i) inputs(s[i], l) = x_t(s[i]);
    for (size_t i = 0; i < rest.size(); ++i) inputs(rest[i], l) = draws(i, l);
  }
  return model.Readout(model.StepFrom(state, inputs)).mean();
}

FitTerms Score(const SequenceClassifier& model, const Eigen::VectorXd& state_prev, double p_prev,
               double p_now, const GaussianParams& next, const Eigen::VectorXd& x_t,
               const FeatureSubset& subset, int samples, SeededRng& rng) {
  FitTerms out;
  out.p_prev = p_prev;
  out.p_now = p_now;
  const auto now = PredictiveDistribution::Binary(p_now);
  out.t1 = KlCategorical(now, PredictiveDistribution::Binary(p_prev));
  if (subset.IsFull(static_cast<int>(x_t.size()))) {
    // Nothing left to marginalize: the partial prediction is the full one.
    out.p_partial = p_now;
    out.t2 = 0.0;
  } else {
    out.p_partial = PartialPrediction(model, state_prev, next, x_t, subset, samples, rng);
    out.t2 = KlCategorical(now, PredictiveDistribution::Binary(out.p_partial));
  }
  out.score = out.t1 - out.t2;
  return out;
}

}  // namespace

FeatureSubset::FeatureSubset(std::vector<int> indices, int dim) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (indices_.empty()) throw Error(ErrorKind::kInvalidArgument, "feature subset is empty");
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw Error(ErrorKind::kInvalidArgument, "feature subset has duplicate indices");
  }
  if (indices_.front() < 0 || indices_.back() >= dim) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("feature subset out of range [0, {})", dim));
  }
}

std::string FeatureSubset::Label() const { return fmt::format("{{{}}}", fmt::join(indices_, ",")); }

std::vector<FeatureSubset> FeatureSubset::Singletons(int dim) {
  std::vector<FeatureSubset> out;
  for (int i = 0; i < dim; ++i) out.emplace_back(std::vector<int>{i}, dim);
  return out;
}

Eigen::MatrixXd ImportanceMatrix::RankingScores() const {
  return rank_by_magnitude ? Eigen::MatrixXd(scores.cwiseAbs()) : scores;
}

FitTerms FitScoreTerms(const SequenceClassifier& model, const ConditionalGenerator& gen,
                       const Eigen::MatrixXd& x, const FeatureSubset& subset, int t, int samples,
                       SeededRng& rng) {
  if (t < 1 || t >= x.cols()) {
    throw Error(ErrorKind::kInvalidTime,
                fmt::format("t = {} has no previous predictive distribution in a length-{} series",
                            t, x.cols()));
  }
  if (samples < 1) throw Error(ErrorKind::kInvalidArgument, "Monte-Carlo sample count must be >= 1");
  Eigen::MatrixXd h = model.InitialStates(1);
  for (int k = 0; k < t; ++k) h = model.Step(h, x.col(k));
  const double p_prev = model.Readout(h)(0);
  const double p_now = model.Readout(model.Step(h, x.col(t)))(0);
  const GaussianParams next = gen.NextStepDistribution(x.leftCols(t));
  return Score(model, h.col(0), p_prev, p_now, next, x.col(t), subset, samples, rng);
}

double FitScore(const SequenceClassifier& model, const ConditionalGenerator& gen,
                const Eigen::MatrixXd& x, const FeatureSubset& subset, int t, int samples,
                SeededRng& rng) {
  return FitScoreTerms(model, gen, x, subset, t, samples, rng).score;
}

ImportanceMatrix FitImportanceMatrix(const SequenceClassifier& model,
                                     const ConditionalGenerator& gen, const Eigen::MatrixXd& x,
                                     int samples, const std::vector<FeatureSubset>& subsets,
                                     const SeededRng& rng, int64_t subject) {
  if (samples < 1) throw Error(ErrorKind::kInvalidArgument, "Monte-Carlo sample count must be >= 1");
  const int d = static_cast<int>(x.rows());
  const auto t_max = x.cols();
  const std::vector<FeatureSubset> rows = subsets.empty() ? FeatureSubset::Singletons(d) : subsets;

  ImportanceMatrix out;
  out.subject = subject;
  out.method = "FIT";
  out.scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), t_max);
  for (const auto& s : rows) out.row_labels.push_back(s.Label());

  const Eigen::MatrixXd traj = model.StateTrajectory(x);
  const Eigen::RowVectorXd probs = model.Readout(traj);  // probs(k): after k inputs
  const auto seq = gen.NextStepSequence(x);
  for (Eigen::Index t = 1; t < t_max; ++t) {
    for (size_t r = 0; r < rows.size(); ++r) {
      SeededRng cell = rng.Derive({static_cast<uint64_t>(r), static_cast<uint64_t>(t)});
      out.scores(static_cast<Eigen::Index>(r), t) =
          Score(model, traj.col(t), probs(t), probs(t + 1), seq[t], x.col(t), rows[r], samples, cell)
              .score;
    }
  }
  return out;
}

std::string_view NormalizationName(Normalization n) {
  switch (n) {
    case Normalization::kNone: return "none";
    case Normalization::kPerSampleMinMax: return "per_sample_minmax";
    case Normalization::kPerSampleZScore: return "per_sample_zscore";
  }
  return "none";
}

Normalization ParseNormalization(std::string_view name) {
  if (name == "none") return Normalization::kNone;
  if (name == "per_sample_minmax") return Normalization::kPerSampleMinMax;
  if (name == "per_sample_zscore") return Normalization::kPerSampleZScore;
  throw Error(ErrorKind::kInvalidConfig, fmt::format("unknown normalization '{}'", name));
}

ImportanceMatrix NormalizeImportance(const ImportanceMatrix& m, Normalization mode) {
  ImportanceMatrix out = m;
  out.normalization = std::string(NormalizationName(mode));
  if (mode == Normalization::kNone || m.scores.size() == 0) return out;
  // Work on the ranking view so signed attributions keep their |.| order.
  const Eigen::MatrixXd v = m.RankingScores();
  out.rank_by_magnitude = false;
  if (mode == Normalization::kPerSampleMinMax) {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (hi == lo) {
      out.scores.setZero();
      out.degenerate = true;
      return out;
    }
    out.scores = (v.array() - lo) / (hi - lo);
    return out;
  }
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().mean());
  // Rounding in the mean leaves a tiny spread on constant input.
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
    out.scores.setZero();
    out.degenerate = true;
    return out;
  }
  out.scores = (v.array() - mean) / sd;
  return out;
}

}  // namespace tsfit
