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

#include "tsfit/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsfit/error.h"

namespace tsfit {
namespace {

void CheckLabels(std::span<const double> scores, std::span<const int> labels, size_t* pos) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kInvalidArgument, "scores and labels differ in length");
  }
  *pos = 0;
  for (int l : labels) *pos += (l != 0);
  if (*pos == 0 || *pos == labels.size()) {
    throw Error(ErrorKind::kDegenerateLabels, "need at least one positive and one negative");
  }
}

}  // namespace

std::vector<double> AverageRanks(std::span<const double> v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i + 1;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  size_t pos = 0;
  CheckLabels(scores, labels, &pos);
  const size_t neg = labels.size() - pos;
  const auto ranks = AverageRanks(scores);
  double rank_sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) rank_sum += ranks[i];
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double Auprc(std::span<const double> scores, std::span<const int> labels) {
  size_t pos = 0;
  CheckLabels(scores, labels, &pos);
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  double prev_recall = 0.0;
  size_t tp = 0, seen = 0, i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      tp += (labels[order[j]] != 0);
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double Spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "spearman needs two equal-length inputs of size >= 2");
  }
  const auto ra = AverageRanks(a);
  const auto rb = AverageRanks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error(ErrorKind::kZeroVariance, "constant rank vector");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace tsfit
