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

#include "tsfit/evalkit.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "tsfit/error.h"
#include "tsfit/metrics.h"

namespace tsfit {
namespace {

void CheckShapes(const std::vector<ImportanceMatrix>& imps, const std::vector<Eigen::MatrixXi>& gt) {
  if (imps.size() != gt.size()) {
    throw Error(ErrorKind::kArityMismatch,
                fmt::format("{} importance matrices for {} ground-truth masks", imps.size(),
                            gt.size()));
  }
  for (size_t i = 0; i < imps.size(); ++i) {
    if (imps[i].scores.rows() != gt[i].rows() || imps[i].scores.cols() != gt[i].cols()) {
      throw Error(ErrorKind::kArityMismatch,
                  fmt::format("sample {}: importance is {}x{}, ground truth {}x{}", i,
                              imps[i].scores.rows(), imps[i].scores.cols(), gt[i].rows(),
                              gt[i].cols()));
    }
  }
}

Eigen::MatrixXi Widen(const Eigen::MatrixXi& g) {
  Eigen::MatrixXi out = g;
  for (Eigen::Index t = 0; t < g.cols(); ++t) {
    if (t > 0) out.col(t) = out.col(t).cwiseMax(g.col(t - 1));
    if (t + 1 < g.cols()) out.col(t) = out.col(t).cwiseMax(g.col(t + 1));
  }
  return out;
}

}  // namespace

EvalReport Summarize(std::string dataset, std::string method, std::string metric,
                     const std::vector<double>& runs) {
  if (runs.empty()) throw Error(ErrorKind::kInvalidArgument, "no runs to summarize");
  EvalReport r;
  r.dataset = std::move(dataset);
  r.method = std::move(method);
  r.metric = std::move(metric);
  r.n_runs = static_cast<int>(runs.size());
  r.mean = std::accumulate(runs.begin(), runs.end(), 0.0) / r.n_runs;
  if (r.n_runs > 1) {
    double ss = 0.0;
    for (double v : runs) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / (r.n_runs - 1));
  }
  return r;
}

void ParallelFor(size_t n, int workers, const std::function<void(size_t)>& fn) {
  const size_t threads = std::min<size_t>(n, static_cast<size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

int DefaultWorkers() {
  if (const char* env = std::getenv("TSFIT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return 1;
}

std::vector<ImportanceMatrix> ExplainAll(const SequenceClassifier& model,
                                         const TimeSeriesDataset& ds, const Explainer& explainer,
                                         int workers) {
  std::vector<ImportanceMatrix> out(ds.size());
  ParallelFor(ds.size(), workers, [&](size_t i) { out[i] = explainer(model, ds.samples[i]); });
  return out;
}

ExplanationScores ExplanationAurocAuprc(const std::vector<ImportanceMatrix>& imps,
                                        const std::vector<Eigen::MatrixXi>& gt,
                                        const CellOptions& opts) {
  CheckShapes(imps, gt);
  std::vector<double> scores;
  std::vector<int> labels;
  double macro = 0.0;
  int macro_n = 0;
  for (size_t i = 0; i < imps.size(); ++i) {
    const Eigen::MatrixXd s = NormalizeImportance(imps[i], opts.normalization).RankingScores();
    const Eigen::MatrixXi g = opts.window ? Widen(gt[i]) : gt[i];
    std::vector<double> ss;
    std::vector<int> ll;
    for (Eigen::Index t = opts.exclude_t0 ? 1 : 0; t < s.cols(); ++t) {
      for (Eigen::Index r = 0; r < s.rows(); ++r) {
        ss.push_back(s(r, t));
        ll.push_back(g(r, t) != 0);
      }
    }
    const auto pos = std::count(ll.begin(), ll.end(), 1);
    if (pos > 0 && pos < static_cast<long>(ll.size())) {
      macro += Auroc(ss, ll);
      ++macro_n;
    }
    scores.insert(scores.end(), ss.begin(), ss.end());
    labels.insert(labels.end(), ll.begin(), ll.end());
  }
  ExplanationScores out;
  out.auroc = Auroc(scores, labels);
  out.auprc = Auprc(scores, labels);
  out.macro_auroc = macro_n > 0 ? macro / macro_n : std::numeric_limits<double>::quiet_NaN();
  out.n_cells = scores.size();
  return out;
}

ExplanationScores ExplanationAurocAuprc(const std::vector<ImportanceMatrix>& imps,
                                        const TimeSeriesDataset& ds, const CellOptions& opts) {
  std::vector<Eigen::MatrixXi> gt;
  for (const auto& s : ds.samples) {
    if (!s.gt) throw Error(ErrorKind::kInvalidArgument, "dataset has no ground-truth masks");
    gt.push_back(*s.gt);
  }
  return ExplanationAurocAuprc(imps, gt, opts);
}

Eigen::MatrixXd ApplyCarryForwardMask(const Eigen::MatrixXd& x, const Eigen::MatrixXi& mask,
                                      const Eigen::VectorXd& fallback) {
  if (mask.rows() != x.rows() || mask.cols() != x.cols() || fallback.size() != x.rows()) {
    throw Error(ErrorKind::kArityMismatch, "mask or fallback shape differs from the input");
  }
  Eigen::MatrixXd out = x;
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (Eigen::Index d = 0; d < x.rows(); ++d) {
      if (mask(d, t) != 0) out(d, t) = t == 0 ? fallback(d) : x(d, t - 1);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXi> SelectCells(const std::vector<ImportanceMatrix>& imps,
                                         const DeteriorationMode& mode) {
  std::vector<Eigen::MatrixXi> out;
  out.reserve(imps.size());
  if (mode.kind == DeteriorationMode::Kind::kTopK) {
    if (mode.k < 1) throw Error(ErrorKind::kInvalidArgument, "top-k deterioration needs k >= 1");
    for (const auto& m : imps) {
      const Eigen::MatrixXd s = m.RankingScores();
      std::vector<Eigen::Index> order(static_cast<size_t>(s.size()));
      std::iota(order.begin(), order.end(), 0);
      const size_t k = std::min<size_t>(static_cast<size_t>(mode.k), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                        [&](Eigen::Index a, Eigen::Index b) {
                          return s(a) > s(b) || (s(a) == s(b) && a < b);
                        });
      Eigen::MatrixXi sel = Eigen::MatrixXi::Zero(s.rows(), s.cols());
      for (size_t i = 0; i < k; ++i) sel(order[i]) = 1;
      out.push_back(std::move(sel));
    }
    return out;
  }
  std::vector<double> pooled;
  for (const auto& m : imps) {
    const Eigen::MatrixXd s = m.RankingScores();
    pooled.insert(pooled.end(), s.data(), s.data() + s.size());
  }
  double threshold = std::numeric_limits<double>::infinity();
  if (!pooled.empty()) {
    // Linear interpolation between order statistics.
    std::sort(pooled.begin(), pooled.end());
    const double pos = 0.95 * static_cast<double>(pooled.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, pooled.size() - 1);
    threshold = pooled[lo] + (pos - static_cast<double>(lo)) * (pooled[hi] - pooled[lo]);
  }
  for (const auto& m : imps) {
    out.push_back((m.RankingScores().array() > threshold).cast<int>().matrix());
  }
  return out;
}

DeteriorationResult DeteriorationTest(const SequenceClassifier& model,
                                      const TimeSeriesDataset& ds,
                                      const std::vector<Eigen::MatrixXi>& selected,
                                      const Eigen::VectorXd& train_mean) {
  if (selected.size() != ds.size()) {
    throw Error(ErrorKind::kArityMismatch, "one selection mask per sample is required");
  }
  DeteriorationResult r;
  TimeSeriesDataset masked = ds;
  for (size_t i = 0; i < ds.size(); ++i) {
    r.n_selected += static_cast<size_t>(selected[i].count());
    masked.samples[i].x = ApplyCarryForwardMask(ds.samples[i].x, selected[i], train_mean);
  }
  r.original_auroc = ModelAuroc(model, ds);
  r.modified_auroc = r.n_selected == 0 ? r.original_auroc : ModelAuroc(model, masked);
  r.drop = r.original_auroc - r.modified_auroc;
  return r;
}

DeteriorationResult DeteriorationTest(const SequenceClassifier& model,
                                      const TimeSeriesDataset& ds,
                                      const std::vector<ImportanceMatrix>& imps,
                                      const DeteriorationMode& mode,
                                      const Eigen::VectorXd& train_mean) {
  return DeteriorationTest(model, ds, SelectCells(imps, mode), train_mean);
}

std::vector<AblationResult> GeneratorAblation(
    const SequenceClassifier& model, const TimeSeriesDataset& ds,
    const std::vector<const ConditionalGenerator*>& generators, int samples, const SeededRng& rng,
    const CellOptions& opts, int workers) {
  std::vector<AblationResult> out;
  for (const ConditionalGenerator* gen : generators) {
    AblationResult r;
    r.variant = std::string(VariantName(gen->variant()));
    r.imps = ExplainAll(
        model, ds,
        [&](const SequenceClassifier& m, const TimeSeriesSample& s) {
          return FitImportanceMatrix(m, *gen, s.x, samples, {},
                                     rng.Derive({static_cast<uint64_t>(s.id)}), s.id);
        },
        workers);
    r.scores = ExplanationAurocAuprc(r.imps, ds, opts);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> SanityCheck(const RecurrentClassifier& model, const Explainer& explainer,
                                const TimeSeriesDataset& ds,
                                const std::vector<PredictorParamGroup>& stages,
                                const SeededRng& rng, int workers) {
  if (ds.empty()) throw Error(ErrorKind::kInvalidArgument, "sanity check needs samples");
  const auto original = ExplainAll(model, ds, explainer, workers);
  std::vector<double> rho;
  RecurrentClassifier randomized = model;
  for (size_t k = 0; k <= stages.size(); ++k) {
    if (k > 0) {
      SeededRng stage_rng = rng.Derive({static_cast<uint64_t>(k - 1)});
      randomized.Reinitialize(stages[k - 1], stage_rng);
    }
    // Stage 0 re-runs the explainer on the untouched model as a
    // reproducibility check.
    const auto after = ExplainAll(randomized, ds, explainer, workers);
    double sum = 0.0;
    for (size_t i = 0; i < ds.size(); ++i) {
      const Eigen::MatrixXd a = original[i].RankingScores();
      const Eigen::MatrixXd b = after[i].RankingScores();
      if (a == b) {
        sum += 1.0;
        continue;
      }
      try {
        sum += Spearman({a.data(), static_cast<size_t>(a.size())},
                        {b.data(), static_cast<size_t>(b.size())});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kZeroVariance) throw;
      }
    }
    rho.push_back(sum / static_cast<double>(ds.size()));
  }
  return rho;
}

}  // namespace tsfit
