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

#ifndef TSFIT_FIT_H_
#define TSFIT_FIT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/classifier.h"
#include "tsfit/divergence.h"
#include "tsfit/generator.h"
#include "tsfit/rng.h"

namespace tsfit {

// Sorted, distinct, non-empty set of feature indices within [0, dim).
class FeatureSubset {
 public:
  FeatureSubset(std::vector<int> indices, int dim);

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool IsFull(int dim) const { return size() == dim; }
  std::string Label() const;  // e.g. "{0,2}"

  static std::vector<FeatureSubset> Singletons(int dim);

 private:
  std::vector<int> indices_;
};

// Score matrix for one series: rows are features or subsets, columns are
// timesteps. `rank_by_magnitude` marks signed attributions (IG, LIME) whose
// ranking uses |score|.
struct ImportanceMatrix {
  Eigen::MatrixXd scores;
  int64_t subject = 0;
  std::string method;
  std::string normalization = "none";
  std::vector<std::string> row_labels;
  bool rank_by_magnitude = false;
  // Set when a min-max normalization met a constant matrix.
  bool degenerate = false;

  Eigen::MatrixXd RankingScores() const;
};

// The pieces of one FIT score.
struct FitTerms {
  double t1 = 0.0;  // KL(p_t || p_{t-1})
  double t2 = 0.0;  // KL(p_t || p(y | X_{0:t-1}, x_{S,t}))
  double score = 0.0;
  double p_now = 0.0;
  double p_prev = 0.0;
  double p_partial = 0.0;
};

// Score of subset S at timestep t (1 <= t <= T-1) with L Monte-Carlo draws.
// Throws InvalidTime for t outside that range.
FitTerms FitScoreTerms(const SequenceClassifier& model, const ConditionalGenerator& gen,
                       const Eigen::MatrixXd& x, const FeatureSubset& subset, int t, int samples,
                       SeededRng& rng);
double FitScore(const SequenceClassifier& model, const ConditionalGenerator& gen,
                const Eigen::MatrixXd& x, const FeatureSubset& subset, int t, int samples,
                SeededRng& rng);

// Scores every (subset, t). Empty `subsets` means all singletons. Column 0 is
// defined as 0. Each cell draws from rng.Derive({row, t}).
ImportanceMatrix FitImportanceMatrix(const SequenceClassifier& model,
                                     const ConditionalGenerator& gen, const Eigen::MatrixXd& x,
                                     int samples, const std::vector<FeatureSubset>& subsets,
                                     const SeededRng& rng, int64_t subject = 0);

enum class Normalization { kNone, kPerSampleMinMax, kPerSampleZScore };

std::string_view NormalizationName(Normalization n);
Normalization ParseNormalization(std::string_view name);

// Monotone per-matrix rescaling. Min-max on a constant matrix yields zeros
// with `degenerate` set.
ImportanceMatrix NormalizeImportance(const ImportanceMatrix& m, Normalization mode);

}  // namespace tsfit

#endif  // TSFIT_FIT_H_
