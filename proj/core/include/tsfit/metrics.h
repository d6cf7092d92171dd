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

#ifndef TSFIT_METRICS_H_
#define TSFIT_METRICS_H_

#include <span>
#include <vector>

namespace tsfit {

// Area under the ROC curve via the Mann-Whitney rank statistic, ties given
// average ranks. Throws DegenerateLabels if labels are all 0 or all 1.
double Auroc(std::span<const double> scores, std::span<const int> labels);

// Average precision: sum over distinct thresholds (descending) of
// (R_k - R_{k-1}) * P_k, tied scores entering together.
double Auprc(std::span<const double> scores, std::span<const int> labels);

// Pearson correlation of average-tie ranks. Throws ZeroVariance when either
// input is constant and InvalidArgument for length < 2 or mismatch.
double Spearman(std::span<const double> a, std::span<const double> b);

// 1-based average ranks.
std::vector<double> AverageRanks(std::span<const double> v);

}  // namespace tsfit

#endif  // TSFIT_METRICS_H_
