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

#include "tsfit/dataset.h"

#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tsfit/error.h"

namespace tsfit {
namespace {

constexpr int kFormatVersion = 1;

void AppendReals(std::string& out, const double* data, Eigen::Index n) {
  out.push_back('[');
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out.push_back(',');
    out += FormatReal(data[i]);
  }
  out.push_back(']');
}

void AppendInts(std::string& out, const int* data, Eigen::Index n) {
  out.push_back('[');
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out.push_back(',');
    out += std::to_string(data[i]);
  }
  out.push_back(']');
}

[[noreturn]] void Fail(size_t line, const std::string& what) {
  throw Error(ErrorKind::kFormat, fmt::format("line {}: {}", line, what));
}

const nlohmann::json& Field(const nlohmann::json& rec, const char* key, size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) Fail(line, fmt::format("missing field '{}'", key));
  return *it;
}

}  // namespace

std::string FormatReal(double v) { return fmt::format("{:.17g}", v); }

bool TimeSeriesDataset::has_gt() const {
  return !samples.empty() && samples.front().gt.has_value();
}

void TimeSeriesDataset::Validate() const {
  for (const auto& s : samples) {
    if (s.x.rows() != d || s.x.cols() != t_max || s.y.size() != t_max) {
      throw Error(ErrorKind::kInvalidArgument,
                  fmt::format("sample {} does not have shape {}x{}", s.id, d, t_max));
    }
    if (!s.x.allFinite()) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("sample {} has non-finite x", s.id));
    }
    for (Eigen::Index t = 0; t < s.y.size(); ++t) {
      if (s.y(t) != 0 && s.y(t) != 1) {
        throw Error(ErrorKind::kInvalidArgument, fmt::format("sample {} has non-binary y", s.id));
      }
    }
    if (s.gt && (s.gt->rows() != d || s.gt->cols() != t_max)) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("sample {} gt shape mismatch", s.id));
    }
  }
}

TimeSeriesDataset TimeSeriesDataset::Slice(size_t begin, size_t end) const {
  TimeSeriesDataset out{name, d, t_max, {}};
  end = std::min(end, samples.size());
  for (size_t i = begin; i < end; ++i) out.samples.push_back(samples[i]);
  return out;
}

FeatureStats ComputeFeatureStats(const TimeSeriesDataset& train) {
  const int d = train.d;
  FeatureStats st;
  st.mean = Eigen::VectorXd::Zero(d);
  st.stddev = Eigen::VectorXd::Zero(d);
  st.min = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  st.max = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
  st.reservoir.assign(d, {});
  for (const auto& s : train.samples) {
    for (int i = 0; i < d; ++i) {
      for (Eigen::Index t = 0; t < s.x.cols(); ++t) st.reservoir[i].push_back(s.x(i, t));
    }
  }
  for (int i = 0; i < d; ++i) {
    const auto& r = st.reservoir[i];
    if (r.empty()) {
      st.min(i) = st.max(i) = 0.0;
      continue;
    }
    double sum = 0.0;
    for (double v : r) {
      sum += v;
      st.min(i) = std::min(st.min(i), v);
      st.max(i) = std::max(st.max(i), v);
    }
    const double mean = sum / static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    st.mean(i) = mean;
    st.stddev(i) = std::sqrt(ss / static_cast<double>(r.size()));
  }
  return st;
}

void SaveDataset(const TimeSeriesDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");

  nlohmann::ordered_json header;
  header["version"] = kFormatVersion;
  header["name"] = ds.name;
  header["d"] = ds.d;
  header["t_max"] = ds.t_max;
  header["n_samples"] = ds.samples.size();
  header["has_gt"] = ds.has_gt();
  out << header.dump() << '\n';

  std::string line;
  for (const auto& s : ds.samples) {
    line.clear();
    line += fmt::format("{{\"id\":{},\"x\":", s.id);
    // Row-major: all T values of feature 0, then feature 1, ...
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = s.x;
    AppendReals(line, xr.data(), xr.size());
    line += ",\"y\":";
    AppendInts(line, s.y.data(), s.y.size());
    line += ",\"gt\":";
    if (s.gt) {
      const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gr = *s.gt;
      AppendInts(line, gr.data(), gr.size());
    } else {
      line += "null";
    }
    line += "}\n";
    out << line;
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

TimeSeriesDataset LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());

  std::string line;
  size_t lineno = 1;
  if (!std::getline(in, line)) Fail(lineno, "missing header record");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    Fail(lineno, std::string("header: ") + e.what());
  }

  TimeSeriesDataset ds;
  size_t n_samples = 0;
  bool has_gt = false;
  try {
    if (Field(header, "version", lineno).get<int>() != kFormatVersion) {
      Fail(lineno, "unsupported version");
    }
    ds.name = Field(header, "name", lineno).get<std::string>();
    ds.d = Field(header, "d", lineno).get<int>();
    ds.t_max = Field(header, "t_max", lineno).get<int>();
    n_samples = Field(header, "n_samples", lineno).get<size_t>();
    has_gt = Field(header, "has_gt", lineno).get<bool>();
  } catch (const nlohmann::json::exception& e) {
    Fail(lineno, std::string("header: ") + e.what());
  }

  const auto cells = static_cast<size_t>(ds.d) * static_cast<size_t>(ds.t_max);
  ds.samples.reserve(n_samples);
  for (size_t k = 0; k < n_samples; ++k) {
    ++lineno;
    if (!std::getline(in, line)) {
      Fail(lineno, fmt::format("sample record {} of {} is missing (file truncated)", k, n_samples));
    }
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(lineno, fmt::format("sample record {}: {}", k, e.what()));
    }
    TimeSeriesSample s;
    try {
      s.id = Field(rec, "id", lineno).get<int64_t>();
      const auto x = Field(rec, "x", lineno).get<std::vector<double>>();
      const auto y = Field(rec, "y", lineno).get<std::vector<int>>();
      if (x.size() != cells) Fail(lineno, fmt::format("sample {}: field 'x' has {} values, expected {}", s.id, x.size(), cells));
      if (y.size() != static_cast<size_t>(ds.t_max)) Fail(lineno, fmt::format("sample {}: field 'y' has {} values, expected {}", s.id, y.size(), ds.t_max));
      s.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          x.data(), ds.d, ds.t_max);
      s.y = Eigen::Map<const Eigen::VectorXi>(y.data(), ds.t_max);
      const auto& gt = Field(rec, "gt", lineno);
      if (has_gt) {
        const auto g = gt.get<std::vector<int>>();
        if (g.size() != cells) Fail(lineno, fmt::format("sample {}: field 'gt' has {} values, expected {}", s.id, g.size(), cells));
        s.gt = Eigen::Map<const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            g.data(), ds.d, ds.t_max);
      } else if (!gt.is_null()) {
        Fail(lineno, fmt::format("sample {}: field 'gt' present but header says has_gt=false", s.id));
      }
    } catch (const nlohmann::json::exception& e) {
      Fail(lineno, fmt::format("sample record {}: {}", k, e.what()));
    }
    ds.samples.push_back(std::move(s));
  }
  try {
    ds.Validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
  return ds;
}

}  // namespace tsfit
