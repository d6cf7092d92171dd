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

#ifndef TSFIT_EVALKIT_H_
#define TSFIT_EVALKIT_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsfit/classifier.h"
#include "tsfit/dataset.h"
#include "tsfit/fit.h"
#include "tsfit/generator.h"
#include "tsfit/predictor.h"
#include "tsfit/rng.h"

namespace tsfit {

struct EvalReport {
  std::string dataset;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  int n_runs = 1;
  std::string config_hash;
  double wall_time_s = 0.0;
};

// mean and sample standard deviation (0 for a single run).
EvalReport Summarize(std::string dataset, std::string method, std::string metric,
                     const std::vector<double>& runs);

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// thrown by any task is rethrown after all threads stop.
void ParallelFor(size_t n, int workers, const std::function<void(size_t)>& fn);

// Worker count from TSFIT_WORKERS, else 1.
int DefaultWorkers();

using Explainer =
    std::function<ImportanceMatrix(const SequenceClassifier& model, const TimeSeriesSample& s)>;

std::vector<ImportanceMatrix> ExplainAll(const SequenceClassifier& model,
                                         const TimeSeriesDataset& ds, const Explainer& explainer,
                                         int workers);

struct CellOptions {
  // Drop column 0 from the pooled cells (no method can score it from a
  // distribution shift).
  bool exclude_t0 = false;
  // Count a cell as positive when ground truth is within +-1 step in time.
  bool window = false;
  // Applied to each sample before pooling.
  Normalization normalization = Normalization::kPerSampleMinMax;
};

struct ExplanationScores {
  double auroc = 0.0;
  double auprc = 0.0;
  // Mean of per-sample AUROC over samples with both classes; NaN if none.
  double macro_auroc = 0.0;
  size_t n_cells = 0;
};

// Pools every (sample, row, t) cell. Throws DegenerateLabels when the pooled
// ground truth has a single class.
ExplanationScores ExplanationAurocAuprc(const std::vector<ImportanceMatrix>& imps,
                                        const std::vector<Eigen::MatrixXi>& gt,
                                        const CellOptions& opts = {});
ExplanationScores ExplanationAurocAuprc(const std::vector<ImportanceMatrix>& imps,
                                        const TimeSeriesDataset& ds,
                                        const CellOptions& opts = {});

// x with every masked cell replaced by its previous value (t = 0 takes
// fallback(d)).
Eigen::MatrixXd ApplyCarryForwardMask(const Eigen::MatrixXd& x, const Eigen::MatrixXi& mask,
                                      const Eigen::VectorXd& fallback);

struct DeteriorationMode {
  enum class Kind { kPercentile95, kTopK } kind = Kind::kPercentile95;
  int k = 1;

  static DeteriorationMode Percentile95() { return {}; }
  static DeteriorationMode TopK(int k) { return {Kind::kTopK, k}; }
};

// Cells to mask: those scoring strictly above the pooled 95th percentile, or
// the top k cells of each sample.
std::vector<Eigen::MatrixXi> SelectCells(const std::vector<ImportanceMatrix>& imps,
                                         const DeteriorationMode& mode);

struct DeteriorationResult {
  double original_auroc = 0.0;
  double modified_auroc = 0.0;
  double drop = 0.0;
  size_t n_selected = 0;
};

DeteriorationResult DeteriorationTest(const SequenceClassifier& model,
                                      const TimeSeriesDataset& ds,
                                      const std::vector<Eigen::MatrixXi>& selected,
                                      const Eigen::VectorXd& train_mean);
DeteriorationResult DeteriorationTest(const SequenceClassifier& model,
                                      const TimeSeriesDataset& ds,
                                      const std::vector<ImportanceMatrix>& imps,
                                      const DeteriorationMode& mode,
                                      const Eigen::VectorXd& train_mean);

struct AblationResult {
  std::string variant;
  ExplanationScores scores;
  std::vector<ImportanceMatrix> imps;
};

// FIT with each generator in turn on the same model, samples and seed.
std::vector<AblationResult> GeneratorAblation(
    const SequenceClassifier& model, const TimeSeriesDataset& ds,
    const std::vector<const ConditionalGenerator*>& generators, int samples, const SeededRng& rng,
    const CellOptions& opts, int workers);

// Spearman rho between the explanations of the original model and those of a
// copy whose first k parameter groups are re-initialized, for k = 0..stages.
// Each group is re-drawn from a fixed stream so prefixes are nested. A sample
// whose randomized explanation is constant contributes rho = 0; identical
// explanations count as 1.
std::vector<double> SanityCheck(const RecurrentClassifier& model, const Explainer& explainer,
                                const TimeSeriesDataset& ds,
                                const std::vector<PredictorParamGroup>& stages,
                                const SeededRng& rng, int workers);

}  // namespace tsfit

#endif  // TSFIT_EVALKIT_H_
