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

#ifndef TSFIT_DATASET_H_
#define TSFIT_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsfit {

// One multivariate series. `x` is features x time (D x T); `y` holds a binary
// label per timestep; `gt`, when present, is the D x T ground-truth mask.
struct TimeSeriesSample {
  int64_t id = 0;
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
  std::optional<Eigen::MatrixXi> gt;
};

struct TimeSeriesDataset {
  std::string name;
  int d = 0;
  int t_max = 0;
  std::vector<TimeSeriesSample> samples;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  bool has_gt() const;
  // Throws InvalidArgument if any sample violates the shared-shape or
  // finiteness invariants.
  void Validate() const;
  // Samples [begin, end) as a new dataset with the same name and shape.
  TimeSeriesDataset Slice(size_t begin, size_t end) const;
};

// Per-feature statistics of a training split: mean/std/min/max and the pooled
// value reservoir used by bootstrap occlusion.
struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  std::vector<std::vector<double>> reservoir;

  int dim() const { return static_cast<int>(mean.size()); }
};

FeatureStats ComputeFeatureStats(const TimeSeriesDataset& train);

// Line-delimited JSON: a header record followed by one record per sample.
// Reals are written with 17 significant digits, so a round trip is exact.
void SaveDataset(const TimeSeriesDataset& ds, const std::filesystem::path& path);
TimeSeriesDataset LoadDataset(const std::filesystem::path& path);

// Shortest-unambiguous-enough decimal form used by every text format here.
std::string FormatReal(double v);

}  // namespace tsfit

#endif  // TSFIT_DATASET_H_
