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

#include "tsfit/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tsfit/error.h"
#include "tsfit/heatmap.h"

namespace tsfit {
namespace fs = std::filesystem;
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

StageClass ClassOf(const Error& e, StageClass fallback) {
  switch (e.kind()) {
    case ErrorKind::kIo: return StageClass::kIo;
    case ErrorKind::kInvalidConfig: return StageClass::kConfig;
    default: return fallback;
  }
}

// Runs fn, re-raising failures as StageError tagged with the stage.
template <typename Fn>
auto Guard(StageClass cls, const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(ClassOf(e, cls), stage, e.what());
  } catch (const std::exception& e) {
    throw StageError(cls, stage, e.what());
  }
}

[[noreturn]] void BadField(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kInvalidConfig, fmt::format("{}: {}", path, what));
}

Eigen::MatrixXd SquareFromList(const std::string& path, const std::vector<double>& v, int k) {
  if (static_cast<int>(v.size()) != k * k) {
    BadField(path, fmt::format("expected {} values (row-major {}x{}), got {}", k * k, k, k, v.size()));
  }
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = v[static_cast<size_t>(i * k + j)];
  }
  return m;
}

std::vector<Eigen::VectorXd> MeansFromList(const std::string& path, const std::vector<double>& v,
                                           int k) {
  if (v.empty() || v.size() % static_cast<size_t>(k) != 0) {
    BadField(path, fmt::format("expected a multiple of {} values (one row per state)", k));
  }
  const int d = static_cast<int>(v.size()) / k;
  std::vector<Eigen::VectorXd> out;
  for (int s = 0; s < k; ++s) {
    out.push_back(Eigen::Map<const Eigen::VectorXd>(v.data() + static_cast<size_t>(s * d), d));
  }
  return out;
}

std::vector<int> IntsFromList(const std::vector<int64_t>& v) {
  return {v.begin(), v.end()};
}

template <typename T>
void ValidateDataset(const T& c) {
  try {
    c.Validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kInvalidConfig, fmt::format("dataset: {}", e.what()));
  }
}

SpikeConfig ParseSpike(const Config& cfg) {
  SpikeConfig c;
  c.n_samples = static_cast<int>(cfg.GetInt("dataset.n_samples", c.n_samples));
  c.t = static_cast<int>(cfg.GetInt("dataset.t", c.t));
  c.d = static_cast<int>(cfg.GetInt("dataset.d", c.d));
  c.narma_order = static_cast<int>(cfg.GetInt("dataset.narma_order", c.narma_order));
  if (cfg.Has("dataset.narma_coeffs")) {
    const auto v = cfg.GetDoubleList("dataset.narma_coeffs");
    if (v.size() != 4) BadField("dataset.narma_coeffs", "expected 4 values");
    std::copy(v.begin(), v.end(), c.narma_coeffs.begin());
  }
  c.noise_std = cfg.GetDouble("dataset.noise_std", c.noise_std);
  c.trend = cfg.GetDoubleList("dataset.trend", c.trend);
  c.spike_prob = cfg.GetDouble("dataset.spike_prob", c.spike_prob);
  c.spike_rate = cfg.GetDouble("dataset.spike_rate", c.spike_rate);
  c.spike_magnitude = cfg.GetDouble("dataset.spike_magnitude", c.spike_magnitude);
  ValidateDataset(c);
  return c;
}

template <typename T>
void ParseHmmCommon(const Config& cfg, T* c) {
  c->n_samples = static_cast<int>(cfg.GetInt("dataset.n_samples", c->n_samples));
  c->t = static_cast<int>(cfg.GetInt("dataset.t", c->t));
  c->initial = cfg.GetDoubleList("dataset.initial", c->initial);
  const int k = static_cast<int>(c->initial.size());
  if (cfg.Has("dataset.trans")) {
    c->trans = SquareFromList("dataset.trans", cfg.GetDoubleList("dataset.trans"), k);
  }
  if (cfg.Has("dataset.means")) {
    c->means = MeansFromList("dataset.means", cfg.GetDoubleList("dataset.means"), k);
  }
  c->marginal_var = cfg.GetDouble("dataset.marginal_var", c->marginal_var);
  if (cfg.Has("dataset.driver")) c->driver = IntsFromList(cfg.GetIntList("dataset.driver"));
}

StateConfig ParseState(const Config& cfg) {
  StateConfig c;
  ParseHmmCommon(cfg, &c);
  c.cross_cov = cfg.GetDouble("dataset.cross_cov", c.cross_cov);
  if (cfg.Has("dataset.cross_pairs")) {
    const auto v = cfg.GetIntList("dataset.cross_pairs");
    if (v.size() != 2 * c.initial.size()) {
      BadField("dataset.cross_pairs", "expected one feature pair per state");
    }
    c.cross_pairs.clear();
    for (size_t i = 0; i < v.size(); i += 2) {
      c.cross_pairs.push_back({static_cast<int>(v[i]), static_cast<int>(v[i + 1])});
    }
  }
  ValidateDataset(c);
  return c;
}

SwitchConfig ParseSwitch(const Config& cfg) {
  SwitchConfig c;
  ParseHmmCommon(cfg, &c);
  c.rbf_gamma = cfg.GetDouble("dataset.rbf_gamma", c.rbf_gamma);
  ValidateDataset(c);
  return c;
}

PredictorParamGroup ParseGroup(const std::string& s) {
  if (s == "head") return PredictorParamGroup::kHead;
  if (s == "candidate") return PredictorParamGroup::kCandidate;
  if (s == "gates") return PredictorParamGroup::kGates;
  BadField("sanity.stages", fmt::format("unknown parameter group '{}'", s));
}

const std::vector<std::string>& AllMethods() {
  static const std::vector<std::string> m = {"FIT", "FO", "AFO", "IG", "LIME"};
  return m;
}

std::string ReadText(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot open {}", p.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteText(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, fmt::format("cannot write {}", p.string()));
  out << text;
  if (!out) throw Error(ErrorKind::kIo, fmt::format("write failed for {}", p.string()));
}

void MakeDirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::kIo, fmt::format("cannot create {}: {}", p.string(), ec.message()));
}

fs::path MetaPath(const fs::path& artifact) {
  return artifact.parent_path() / (artifact.filename().string() + ".meta.json");
}

}  // namespace

int ExitCode(StageClass c) {
  switch (c) {
    case StageClass::kConfig: return 2;
    case StageClass::kData: return 3;
    case StageClass::kTrain: return 4;
    case StageClass::kExplain: return 5;
    case StageClass::kEval: return 6;
    case StageClass::kIo: return 7;
  }
  return 1;
}

std::string_view StageClassName(StageClass c) {
  switch (c) {
    case StageClass::kConfig: return "config";
    case StageClass::kData: return "data";
    case StageClass::kTrain: return "train";
    case StageClass::kExplain: return "explain";
    case StageClass::kEval: return "eval";
    case StageClass::kIo: return "io";
  }
  return "unknown";
}

StageError::StageError(StageClass cls, std::string stage, const std::string& message)
    : std::runtime_error(fmt::format("[{}] {}", stage, message)), cls_(cls), stage_(std::move(stage)) {}

const std::vector<std::string>& ExperimentConfig::KnownKeys() {
  static const std::vector<std::string> keys = {
      "seed",
      "dataset.type", "dataset.n_samples", "dataset.t", "dataset.d", "dataset.narma_order",
      "dataset.narma_coeffs", "dataset.noise_std", "dataset.trend", "dataset.spike_prob",
      "dataset.spike_rate", "dataset.spike_magnitude", "dataset.initial", "dataset.trans",
      "dataset.means", "dataset.marginal_var", "dataset.cross_cov", "dataset.cross_pairs",
      "dataset.driver", "dataset.rbf_gamma",
      "split.n_test",
      "predictor.hidden", "predictor.lr", "predictor.beta1", "predictor.beta2",
      "predictor.clip_norm", "predictor.epochs", "predictor.batch_size", "predictor.val_fraction",
      "generator.variant", "generator.hidden", "generator.lr", "generator.beta1",
      "generator.beta2", "generator.clip_norm", "generator.epochs", "generator.batch_size",
      "generator.val_fraction",
      "explain.methods", "explain.samples", "explain.normalization", "explain.heatmap_samples",
      "explain.n_explain",
      "baselines.occlusion_draws", "baselines.ig_steps", "baselines.lime_n_perturb",
      "baselines.lime_kernel_width", "baselines.lime_ridge",
      "evaluate.metrics", "evaluate.deterioration", "evaluate.k", "evaluate.exclude_t0",
      "evaluate.window", "evaluate.normalization",
      "sanity.method", "sanity.n_samples", "sanity.stages",
      "output.dir",
  };
  return keys;
}

ExperimentConfig ExperimentConfig::FromConfig(const Config& cfg) {
  const auto& known = KnownKeys();
  for (const auto& [key, value] : cfg.entries()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) BadField(key, "unknown field");
  }
  ExperimentConfig e;
  const int64_t seed = cfg.GetInt("seed");
  if (seed < 0) BadField("seed", "must be >= 0");
  e.seed = static_cast<uint64_t>(seed);

  e.dataset_type = cfg.GetString("dataset.type");
  int n_samples = 0;
  if (e.dataset_type == "spike") {
    auto c = ParseSpike(cfg);
    n_samples = c.n_samples;
    e.dataset = c;
  } else if (e.dataset_type == "state") {
    auto c = ParseState(cfg);
    n_samples = c.n_samples;
    e.dataset = c;
  } else if (e.dataset_type == "switch") {
    auto c = ParseSwitch(cfg);
    n_samples = c.n_samples;
    e.dataset = c;
  } else {
    BadField("dataset.type",
             fmt::format("unknown dataset type '{}' (expected spike, state or switch)",
                         e.dataset_type));
  }
  e.n_test = static_cast<int>(cfg.GetInt("split.n_test", n_samples / 5));
  if (e.n_test < 0 || e.n_test > n_samples) {
    BadField("split.n_test", fmt::format("must lie in [0, {}]", n_samples));
  }

  auto& p = e.predictor;
  p.hidden = static_cast<int>(cfg.GetInt("predictor.hidden", p.hidden));
  p.lr = cfg.GetDouble("predictor.lr", p.lr);
  p.beta1 = cfg.GetDouble("predictor.beta1", p.beta1);
  p.beta2 = cfg.GetDouble("predictor.beta2", p.beta2);
  p.clip_norm = cfg.GetDouble("predictor.clip_norm", p.clip_norm);
  p.epochs = static_cast<int>(cfg.GetInt("predictor.epochs", p.epochs));
  p.batch_size = static_cast<int>(cfg.GetInt("predictor.batch_size", p.batch_size));
  p.val_fraction = cfg.GetDouble("predictor.val_fraction", p.val_fraction);
  if (p.hidden < 1) BadField("predictor.hidden", "must be >= 1");
  if (p.epochs < 0) BadField("predictor.epochs", "must be >= 0");
  if (p.batch_size < 1) BadField("predictor.batch_size", "must be >= 1");
  if (p.val_fraction < 0 || p.val_fraction >= 1) BadField("predictor.val_fraction", "must lie in [0, 1)");

  try {
    e.generator_variant = ParseVariant(cfg.GetString("generator.variant", "recurrent_gaussian"));
  } catch (const Error&) {
    BadField("generator.variant", fmt::format("unknown variant '{}'", cfg.Raw("generator.variant")));
  }
  auto& g = e.generator;
  g.hidden = static_cast<int>(cfg.GetInt("generator.hidden", g.hidden));
  g.lr = cfg.GetDouble("generator.lr", g.lr);
  g.beta1 = cfg.GetDouble("generator.beta1", g.beta1);
  g.beta2 = cfg.GetDouble("generator.beta2", g.beta2);
  g.clip_norm = cfg.GetDouble("generator.clip_norm", g.clip_norm);
  g.epochs = static_cast<int>(cfg.GetInt("generator.epochs", g.epochs));
  g.batch_size = static_cast<int>(cfg.GetInt("generator.batch_size", g.batch_size));
  g.val_fraction = cfg.GetDouble("generator.val_fraction", g.val_fraction);
  if (g.hidden < 1) BadField("generator.hidden", "must be >= 1");
  if (g.epochs < 0) BadField("generator.epochs", "must be >= 0");
  if (g.batch_size < 1) BadField("generator.batch_size", "must be >= 1");
  if (g.val_fraction < 0 || g.val_fraction >= 1) BadField("generator.val_fraction", "must lie in [0, 1)");

  e.methods = cfg.GetStringList("explain.methods", AllMethods());
  for (const auto& m : e.methods) {
    if (std::find(AllMethods().begin(), AllMethods().end(), m) == AllMethods().end()) {
      BadField("explain.methods", fmt::format("unknown method '{}'", m));
    }
  }
  e.fit_samples = static_cast<int>(cfg.GetInt("explain.samples", e.fit_samples));
  if (e.fit_samples < 1) BadField("explain.samples", "must be >= 1");
  try {
    e.normalization = ParseNormalization(cfg.GetString("explain.normalization", "none"));
  } catch (const Error&) {
    BadField("explain.normalization", fmt::format("unknown mode '{}'", cfg.Raw("explain.normalization")));
  }
  if (cfg.Has("explain.heatmap_samples")) e.heatmap_samples = cfg.GetIntList("explain.heatmap_samples");
  e.n_explain = static_cast<int>(cfg.GetInt("explain.n_explain", 0));
  if (e.n_explain < 0) BadField("explain.n_explain", "must be >= 0");

  e.occlusion_draws = static_cast<int>(cfg.GetInt("baselines.occlusion_draws", e.occlusion_draws));
  e.ig_steps = static_cast<int>(cfg.GetInt("baselines.ig_steps", e.ig_steps));
  e.lime.n_perturb = static_cast<int>(cfg.GetInt("baselines.lime_n_perturb", e.lime.n_perturb));
  e.lime.kernel_width = cfg.GetDouble("baselines.lime_kernel_width", e.lime.kernel_width);
  e.lime.ridge = cfg.GetDouble("baselines.lime_ridge", e.lime.ridge);
  if (e.occlusion_draws < 1) BadField("baselines.occlusion_draws", "must be >= 1");
  if (e.ig_steps < 2) BadField("baselines.ig_steps", "must be >= 2");
  if (e.lime.ridge < 0) BadField("baselines.lime_ridge", "must be >= 0");

  e.metrics = cfg.GetStringList("evaluate.metrics", {"auroc", "auprc", "auroc_drop"});
  for (const auto& m : e.metrics) {
    if (m != "auroc" && m != "auprc" && m != "auroc_drop") {
      BadField("evaluate.metrics", fmt::format("unknown metric '{}'", m));
    }
  }
  const std::string det = cfg.GetString("evaluate.deterioration", "pct95");
  if (det == "pct95") {
    e.deterioration = DeteriorationMode::Percentile95();
  } else if (det == "topk") {
    const int64_t k = cfg.GetInt("evaluate.k", 1);
    if (k < 1) BadField("evaluate.k", "must be >= 1");
    e.deterioration = DeteriorationMode::TopK(static_cast<int>(k));
  } else {
    BadField("evaluate.deterioration", fmt::format("unknown mode '{}' (pct95 or topk)", det));
  }
  e.cells.exclude_t0 = cfg.GetBool("evaluate.exclude_t0", false);
  e.cells.window = cfg.GetBool("evaluate.window", false);
  try {
    e.cells.normalization =
        ParseNormalization(cfg.GetString("evaluate.normalization", "per_sample_minmax"));
  } catch (const Error&) {
    BadField("evaluate.normalization",
             fmt::format("unknown mode '{}'", cfg.Raw("evaluate.normalization")));
  }

  e.sanity_method = cfg.GetString("sanity.method", e.sanity_method);
  if (std::find(AllMethods().begin(), AllMethods().end(), e.sanity_method) == AllMethods().end()) {
    BadField("sanity.method", fmt::format("unknown method '{}'", e.sanity_method));
  }
  e.sanity_samples = static_cast<int>(cfg.GetInt("sanity.n_samples", e.sanity_samples));
  if (e.sanity_samples < 1) BadField("sanity.n_samples", "must be >= 1");
  for (const auto& s : cfg.GetStringList("sanity.stages", {"head", "candidate", "gates"})) {
    e.sanity_stages.push_back(ParseGroup(s));
  }
  e.output_dir = cfg.GetString("output.dir", e.output_dir);
  return e;
}

TimeSeriesDataset GenerateDataset(const ExperimentConfig& cfg) {
  const SeededRng rng = SeededRng(cfg.seed).Derive({1});
  return std::visit(
      [&](const auto& c) -> TimeSeriesDataset {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SpikeConfig>) {
          return GenerateSpike(c, rng);
        } else if constexpr (std::is_same_v<T, StateConfig>) {
          return GenerateState(c, rng);
        } else {
          return GenerateSwitch(c, rng);
        }
      },
      cfg.dataset);
}

void WriteImportanceCsv(const std::vector<ImportanceMatrix>& imps, const fs::path& path) {
  std::string text = "sample_id,method,normalization,row,t,score\n";
  for (const auto& m : imps) {
    for (Eigen::Index r = 0; r < m.scores.rows(); ++r) {
      for (Eigen::Index t = 0; t < m.scores.cols(); ++t) {
        text += fmt::format("{},{},{},{},{},{}\n", m.subject, m.method, m.normalization, r, t,
                            FormatReal(m.scores(r, t)));
      }
    }
  }
  WriteText(path, text);
}

std::vector<ImportanceMatrix> ReadImportanceCsv(const fs::path& path,
                                                const TimeSeriesDataset& ds) {
  std::istringstream in(ReadText(path));
  std::string line;
  if (!std::getline(in, line) || line != "sample_id,method,normalization,row,t,score") {
    throw Error(ErrorKind::kFormat, fmt::format("{}: bad importance header", path.string()));
  }
  std::map<int64_t, size_t> index;
  std::vector<ImportanceMatrix> out(ds.size());
  for (size_t i = 0; i < ds.size(); ++i) {
    index[ds.samples[i].id] = i;
    out[i].subject = ds.samples[i].id;
    out[i].scores = Eigen::MatrixXd::Constant(ds.d, ds.t_max, std::numeric_limits<double>::quiet_NaN());
    for (int r = 0; r < ds.d; ++r) out[i].row_labels.push_back(fmt::format("{{{}}}", r));
  }
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    auto bad = [&](const std::string& what) {
      return Error(ErrorKind::kFormat, fmt::format("{}:{}: {}", path.string(), line_no, what));
    };
    if (f.size() != 6) throw bad("expected 6 fields");
    try {
      const int64_t id = std::stoll(f[0]);
      const auto it = index.find(id);
      if (it == index.end()) throw bad(fmt::format("unknown sample id {}", id));
      auto& m = out[it->second];
      const int r = std::stoi(f[3]);
      const int t = std::stoi(f[4]);
      if (r < 0 || r >= m.scores.rows() || t < 0 || t >= m.scores.cols()) throw bad("cell out of range");
      m.method = f[1];
      m.normalization = f[2];
      m.scores(r, t) = std::stod(f[5]);
    } catch (const std::logic_error&) {
      throw bad("malformed number");
    }
  }
  for (const auto& m : out) {
    if (!m.scores.allFinite()) {
      throw Error(ErrorKind::kFormat, fmt::format("{}: sample {} is incomplete", path.string(), m.subject));
    }
  }
  for (auto& m : out) m.rank_by_magnitude = m.method == "IG" || m.method == "LIME";
  for (auto& m : out) {
    if (m.normalization != "none") m.rank_by_magnitude = false;
  }
  return out;
}

void WriteResultsCsv(const std::vector<ResultRow>& rows, const fs::path& path, bool with_sweep) {
  std::string text = "dataset,method,metric,mean,std,n_runs,config_hash,wall_time_s";
  text += with_sweep ? ",sweep_param,sweep_value\n" : "\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    text += fmt::format("{},{},{},{},{},{},{},{:.3f}", r.dataset, r.method, r.metric,
                        FormatReal(r.mean), FormatReal(r.std), r.n_runs, r.config_hash,
                        r.wall_time_s);
    text += with_sweep ? fmt::format(",{},{}\n", row.sweep_param, row.sweep_value) : "\n";
  }
  WriteText(path, text);
}

Pipeline::Pipeline(const Config& cfg, const RunOptions& opts, Stage recompute_from)
    : raw_(cfg), opts_(opts), recompute_from_(recompute_from) {
  Guard(StageClass::kConfig, "config", [&] {
    if (opts_.seed) raw_.Set("seed", std::to_string(*opts_.seed));
    exp_ = ExperimentConfig::FromConfig(raw_);
    out_ = opts_.out ? *opts_.out : fs::path(exp_.output_dir);
    hash_ = ConfigHash(raw_);
    return 0;
  });
}

std::string Pipeline::StageKey(Stage s) const {
  const std::string data = Fnv1aHex(fmt::format("seed = {}\n", exp_.seed) +
                                    raw_.Canonical({"dataset", "split"}));
  switch (s) {
    case Stage::kGenerate: return data;
    case Stage::kTrainPredictor: return Fnv1aHex(data + raw_.Canonical({"predictor"}));
    case Stage::kTrainGenerator: return Fnv1aHex(data + raw_.Canonical({"generator"}));
    default:
      return Fnv1aHex(StageKey(Stage::kTrainPredictor) + StageKey(Stage::kTrainGenerator) +
                      raw_.Canonical({"explain", "baselines"}));
  }
}

bool Pipeline::Reuse(Stage s, const fs::path& artifact, const std::string& key) const {
  if (static_cast<int>(s) >= static_cast<int>(recompute_from_)) return false;
  if (!fs::exists(artifact) || !fs::exists(MetaPath(artifact))) return false;
  try {
    const auto meta = nlohmann::json::parse(ReadText(MetaPath(artifact)));
    return meta.at("key").get<std::string>() == key;
  } catch (const std::exception&) {
    return false;
  }
}

void Pipeline::Stamp(const fs::path& artifact, const std::string& key, double wall) const {
  nlohmann::ordered_json meta;
  meta["key"] = key;
  meta["wall_time_s"] = wall;
  WriteText(MetaPath(artifact), meta.dump(2) + "\n");
}

double Pipeline::StampedWallTime(const fs::path& artifact) const {
  try {
    return nlohmann::json::parse(ReadText(MetaPath(artifact))).at("wall_time_s").get<double>();
  } catch (const std::exception&) {
    return 0.0;
  }
}

const TimeSeriesDataset& Pipeline::Data() {
  if (data_) return *data_;
  return Guard(StageClass::kData, "generate", [&]() -> const TimeSeriesDataset& {
    const fs::path path = out_ / "data" / "dataset.jsonl";
    const std::string key = StageKey(Stage::kGenerate);
    if (Reuse(Stage::kGenerate, path, key)) {
      data_ = LoadDataset(path);
      return *data_;
    }
    const auto start = Clock::now();
    data_ = GenerateDataset(exp_);
    MakeDirs(path.parent_path());
    SaveDataset(*data_, path);
    nlohmann::ordered_json manifest;
    manifest["config_hash"] = hash_;
    manifest["data_key"] = key;
    manifest["seed"] = exp_.seed;
    manifest["dataset"] = exp_.dataset_type;
    manifest["n_samples"] = data_->size();
    manifest["n_test"] = exp_.n_test;
    WriteText(path.parent_path() / "manifest.json", manifest.dump(2) + "\n");
    Stamp(path, key, Seconds(start));
    return *data_;
  });
}

const TimeSeriesDataset& Pipeline::Train() {
  if (!train_) {
    const auto& d = Data();
    train_ = d.Slice(0, d.size() - static_cast<size_t>(exp_.n_test));
  }
  return *train_;
}

const TimeSeriesDataset& Pipeline::Test() {
  if (!test_) {
    const auto& d = Data();
    test_ = d.Slice(d.size() - static_cast<size_t>(exp_.n_test), d.size());
  }
  return *test_;
}

const TimeSeriesDataset& Pipeline::Explained() {
  if (!explained_) {
    const auto& t = Test();
    explained_ = exp_.n_explain > 0 ? t.Slice(0, static_cast<size_t>(exp_.n_explain)) : t;
  }
  return *explained_;
}

const FeatureStats& Pipeline::Stats() {
  if (!stats_) {
    stats_ = Guard(StageClass::kData, "generate", [&] { return ComputeFeatureStats(Train()); });
  }
  return *stats_;
}

const RecurrentClassifier& Pipeline::Predictor() {
  if (predictor_) return *predictor_;
  const auto& train = Train();
  return Guard(StageClass::kTrain, "train-predictor", [&]() -> const RecurrentClassifier& {
    const fs::path path = out_ / "models" / "predictor.ckpt";
    const std::string key = StageKey(Stage::kTrainPredictor);
    if (Reuse(Stage::kTrainPredictor, path, key)) {
      predictor_ = RecurrentClassifier::Load(path);
      predictor_time_ = StampedWallTime(path);
      return *predictor_;
    }
    if (train.empty()) throw Error(ErrorKind::kInvalidArgument, "training split is empty");
    const auto start = Clock::now();
    auto trained = TrainPredictor(train, exp_.predictor, SeededRng(exp_.seed).Derive({2}));
    predictor_time_ = Seconds(start);
    predictor_ = std::move(trained.model);
    MakeDirs(path.parent_path());
    predictor_->Save(path);
    nlohmann::ordered_json report;
    report["train_loss"] = trained.report.train_loss;
    report["val_loss"] = trained.report.val_loss;
    nlohmann::json auroc = nlohmann::json::array();
    for (double v : trained.report.val_auroc) {
      auroc.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    }
    report["val_auroc"] = auroc;
    WriteText(path.parent_path() / "predictor_report.json", report.dump(2) + "\n");
    Stamp(path, key, predictor_time_);
    return *predictor_;
  });
}

const ConditionalGenerator& Pipeline::Generator() {
  if (generator_) return *generator_;
  const auto& train = Train();
  return Guard(StageClass::kTrain, "train-generator", [&]() -> const ConditionalGenerator& {
    const fs::path path = out_ / "models" / "generator.ckpt";
    const std::string key = StageKey(Stage::kTrainGenerator);
    if (Reuse(Stage::kTrainGenerator, path, key)) {
      generator_ = LoadGenerator(path);
      return *generator_;
    }
    if (train.empty()) throw Error(ErrorKind::kInvalidArgument, "training split is empty");
    const auto start = Clock::now();
    auto trained = TrainGenerator(train, exp_.generator_variant, exp_.generator,
                                  SeededRng(exp_.seed).Derive({3}));
    generator_ = std::move(trained.generator);
    MakeDirs(path.parent_path());
    generator_->Save(path);
    nlohmann::ordered_json report;
    report["variant"] = std::string(VariantName(generator_->variant()));
    report["train_loss"] = trained.train_loss;
    report["val_loss"] = trained.val_loss;
    WriteText(path.parent_path() / "generator_report.json", report.dump(2) + "\n");
    Stamp(path, key, Seconds(start));
    return *generator_;
  });
}

Explainer Pipeline::MakeExplainer(const std::string& method) {
  const SeededRng base = SeededRng(exp_.seed).Derive({4, Fnv1a(method)});
  const Normalization norm = exp_.normalization;
  auto finish = [norm](ImportanceMatrix m) { return NormalizeImportance(m, norm); };
  if (method == "FIT") {
    const ConditionalGenerator* gen = &Generator();
    const int samples = exp_.fit_samples;
    return [=](const SequenceClassifier& model, const TimeSeriesSample& s) {
      return finish(FitImportanceMatrix(model, *gen, s.x, samples, {},
                                        base.Derive({static_cast<uint64_t>(s.id)}), s.id));
    };
  }
  BaselineConfig bc;
  bc.stats = Stats();
  bc.occlusion_draws = exp_.occlusion_draws;
  bc.ig_steps = exp_.ig_steps;
  bc.lime = exp_.lime;
  if (method == "FO") {
    return [=](const SequenceClassifier& model, const TimeSeriesSample& s) {
      return finish(FeatureOcclusion(model, s.x, bc, base.Derive({static_cast<uint64_t>(s.id)}), s.id));
    };
  }
  if (method == "AFO") {
    return [=](const SequenceClassifier& model, const TimeSeriesSample& s) {
      return finish(AugmentedFeatureOcclusion(model, s.x, bc,
                                              base.Derive({static_cast<uint64_t>(s.id)}), s.id));
    };
  }
  if (method == "IG") {
    return [=](const SequenceClassifier& model, const TimeSeriesSample& s) {
      const auto* diff = dynamic_cast<const DifferentiableClassifier*>(&model);
      if (diff == nullptr) {
        throw Error(ErrorKind::kInvalidArgument, "integrated gradients need a differentiable model");
      }
      return finish(IntegratedGradients(*diff, s.x, bc, s.id));
    };
  }
  if (method == "LIME") {
    return [=](const SequenceClassifier& model, const TimeSeriesSample& s) {
      return finish(LocalLinearExplain(model, s.x, bc, base.Derive({static_cast<uint64_t>(s.id)}), s.id));
    };
  }
  throw Error(ErrorKind::kInvalidConfig, fmt::format("explain.methods: unknown method '{}'", method));
}

const std::vector<ImportanceMatrix>& Pipeline::Importance(const std::string& method) {
  if (auto it = imps_.find(method); it != imps_.end()) return it->second;
  const auto& ds = Explained();
  const auto& model = Predictor();
  if (method == "FIT") Generator();
  return Guard(StageClass::kExplain, "explain", [&]() -> const std::vector<ImportanceMatrix>& {
    const fs::path path = out_ / "importance" / (method + ".csv");
    const std::string key = StageKey(Stage::kExplain);
    std::vector<ImportanceMatrix> imps;
    if (Reuse(Stage::kExplain, path, key)) {
      imps = ReadImportanceCsv(path, ds);
      explain_time_[method] = StampedWallTime(path);
    } else {
      const Explainer explainer = MakeExplainer(method);
      const auto start = Clock::now();
      imps = ExplainAll(model, ds, explainer, opts_.workers);
      explain_time_[method] = Seconds(start);
      MakeDirs(path.parent_path());
      WriteImportanceCsv(imps, path);
      Stamp(path, key, explain_time_[method]);
    }
    for (const int64_t id : exp_.heatmap_samples) {
      const auto it = std::find_if(imps.begin(), imps.end(),
                                   [id](const ImportanceMatrix& m) { return m.subject == id; });
      if (it == imps.end()) {
        throw Error(ErrorKind::kInvalidConfig,
                    fmt::format("explain.heatmap_samples: sample {} is not among the explained samples", id));
      }
      MakeDirs(out_ / "heatmaps");
      WriteHeatmapSvg(*it, exp_.dataset_type,
                      out_ / "heatmaps" / fmt::format("{}_sample{}.svg", method, id));
    }
    return imps_[method] = std::move(imps);
  });
}

std::vector<EvalReport> Pipeline::Evaluate() {
  const auto& test = Test();
  const auto& model = Predictor();
  const auto& stats = Stats();
  for (const auto& m : exp_.methods) Importance(m);
  return Guard(StageClass::kEval, "evaluate", [&] {
    std::vector<EvalReport> out;
    auto add = [&](const std::string& method, const std::string& metric, double v, double wall) {
      EvalReport r = Summarize(exp_.dataset_type, method, metric, {v});
      r.config_hash = hash_;
      r.wall_time_s = wall;
      out.push_back(std::move(r));
    };
    if (!test.empty()) add("predictor", "test_auroc", ModelAuroc(model, test), predictor_time_);
    const auto& ds = Explained();
    auto want = [&](const char* name) {
      return std::find(exp_.metrics.begin(), exp_.metrics.end(), name) != exp_.metrics.end();
    };
    for (const auto& method : exp_.methods) {
      const auto& imps = imps_.at(method);
      const double wall = explain_time_[method];
      if (ds.has_gt() && (want("auroc") || want("auprc"))) {
        const auto s = ExplanationAurocAuprc(imps, ds, exp_.cells);
        if (want("auroc")) add(method, "auroc", s.auroc, wall);
        if (want("auprc")) add(method, "auprc", s.auprc, wall);
      }
      if (want("auroc_drop")) {
        add(method, "auroc_drop", DeteriorationTest(model, ds, imps, exp_.deterioration, stats.mean).drop,
            wall);
      }
    }
    std::vector<ResultRow> rows;
    for (const auto& r : out) rows.push_back({r, "", ""});
    MakeDirs(out_);
    WriteResultsCsv(rows, out_ / "results.csv", false);
    return out;
  });
}

std::vector<EvalReport> Pipeline::Sanity() {
  const auto& model = Predictor();
  const auto& ds = Explained();
  const auto sub = ds.Slice(0, static_cast<size_t>(exp_.sanity_samples));
  const Explainer explainer =
      Guard(StageClass::kExplain, "sanity-check", [&] { return MakeExplainer(exp_.sanity_method); });
  return Guard(StageClass::kEval, "sanity-check", [&] {
    const auto start = Clock::now();
    const auto rho = SanityCheck(model, explainer, sub, exp_.sanity_stages,
                                 SeededRng(exp_.seed).Derive({5}), opts_.workers);
    const double wall = Seconds(start);
    std::vector<EvalReport> out;
    std::vector<ResultRow> rows;
    for (size_t k = 0; k < rho.size(); ++k) {
      EvalReport r = Summarize(exp_.dataset_type, exp_.sanity_method,
                               fmt::format("spearman_stage{}", k), {rho[k]});
      r.config_hash = hash_;
      r.wall_time_s = wall;
      rows.push_back({r, "", ""});
      out.push_back(std::move(r));
    }
    MakeDirs(out_);
    WriteResultsCsv(rows, out_ / "sanity.csv", false);
    return out;
  });
}

void CmdGenerate(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, Stage::kGenerate);
  p.Data();
}

void CmdTrainPredictor(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, opts.resume ? Stage::kNone : Stage::kTrainPredictor);
  p.Predictor();
}

void CmdTrainGenerator(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, opts.resume ? Stage::kNone : Stage::kTrainGenerator);
  p.Generator();
}

void CmdExplain(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, opts.resume ? Stage::kNone : Stage::kExplain);
  for (const auto& m : p.config().methods) p.Importance(m);
}

std::vector<EvalReport> CmdEvaluate(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, Stage::kNone);
  return p.Evaluate();
}

std::vector<EvalReport> CmdRun(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, opts.resume ? Stage::kNone : Stage::kGenerate);
  return p.Evaluate();
}

std::vector<EvalReport> CmdSanityCheck(const Config& cfg, const RunOptions& opts) {
  Pipeline p(cfg, opts, Stage::kNone);
  return p.Sanity();
}

std::vector<ResultRow> CmdSweep(const Config& cfg, const std::string& param,
                                const std::vector<std::string>& values, const RunOptions& opts) {
  const auto& known = ExperimentConfig::KnownKeys();
  if (std::find(known.begin(), known.end(), param) == known.end()) {
    throw StageError(StageClass::kConfig, "sweep",
                     fmt::format("InvalidConfig: {}: not a configurable field", param));
  }
  if (values.empty()) {
    throw StageError(StageClass::kConfig, "sweep", "InvalidConfig: sweep value list is empty");
  }
  Config base = cfg;
  if (opts.seed) base.Set("seed", std::to_string(*opts.seed));
  const fs::path root =
      opts.out ? *opts.out : fs::path(Guard(StageClass::kConfig, "sweep", [&] {
        return base.GetString("output.dir", "out");
      }));
  std::vector<ResultRow> rows;
  for (size_t i = 0; i < values.size(); ++i) {
    Config c = base;
    c.Set(param, values[i]);
    RunOptions o = opts;
    o.seed.reset();
    o.out = root / "sweep" / std::to_string(i);
    for (auto& r : CmdRun(c, o)) rows.push_back({std::move(r), param, values[i]});
  }
  Guard(StageClass::kIo, "sweep", [&] {
    MakeDirs(root);
    WriteResultsCsv(rows, root / "sweep_results.csv", true);
    return 0;
  });
  return rows;
}

}  // namespace tsfit
