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

#ifndef TSFIT_PIPELINE_H_
#define TSFIT_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tsfit/baselines.h"
#include "tsfit/config.h"
#include "tsfit/dataset.h"
#include "tsfit/evalkit.h"
#include "tsfit/fit.h"
#include "tsfit/generator.h"
#include "tsfit/predictor.h"
#include "tsfit/simdata.h"

namespace tsfit {

// Failure classes, each with its own process exit code.
enum class StageClass { kConfig, kData, kTrain, kExplain, kEval, kIo };

int ExitCode(StageClass c);
std::string_view StageClassName(StageClass c);

class StageError : public std::runtime_error {
 public:
  StageError(StageClass cls, std::string stage, const std::string& message);
  StageClass stage_class() const { return cls_; }
  const std::string& stage() const { return stage_; }

 private:
  StageClass cls_;
  std::string stage_;
};

// Typed view of a Config. Unknown keys are rejected.
struct ExperimentConfig {
  uint64_t seed = 0;
  std::string dataset_type;
  std::variant<SpikeConfig, StateConfig, SwitchConfig> dataset;
  int n_test = 0;
  PredictorHyper predictor;
  GeneratorVariant generator_variant = GeneratorVariant::kRecurrentGaussian;
  GeneratorHyper generator;
  std::vector<std::string> methods;
  int fit_samples = 10;
  Normalization normalization = Normalization::kNone;
  std::vector<int64_t> heatmap_samples;
  int n_explain = 0;  // 0 = the whole test split
  int occlusion_draws = 10;
  int ig_steps = 256;
  LimeOptions lime;
  std::vector<std::string> metrics;
  DeteriorationMode deterioration;
  CellOptions cells;
  std::string sanity_method = "FIT";
  int sanity_samples = 20;
  std::vector<PredictorParamGroup> sanity_stages;
  std::string output_dir = "out";

  static ExperimentConfig FromConfig(const Config& cfg);
  static const std::vector<std::string>& KnownKeys();
};

TimeSeriesDataset GenerateDataset(const ExperimentConfig& cfg);

// Importance CSV: sample_id,method,normalization,row,t,score.
void WriteImportanceCsv(const std::vector<ImportanceMatrix>& imps,
                        const std::filesystem::path& path);
std::vector<ImportanceMatrix> ReadImportanceCsv(const std::filesystem::path& path,
                                                const TimeSeriesDataset& ds);

// Results CSV: dataset,method,metric,mean,std,n_runs,config_hash,wall_time_s
// with optional trailing sweep_param,sweep_value columns.
struct ResultRow {
  EvalReport report;
  std::string sweep_param;
  std::string sweep_value;
};
void WriteResultsCsv(const std::vector<ResultRow>& rows, const std::filesystem::path& path,
                     bool with_sweep);

enum class Stage { kGenerate, kTrainPredictor, kTrainGenerator, kExplain, kEvaluate, kNone };

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<uint64_t> seed;
  int workers = 1;
  bool resume = false;
};

// Lazily produces every artifact of one experiment under the output
// directory. Stages at or after `recompute_from` are always rebuilt; earlier
// ones are reloaded when their checkpoint exists and matches the config.
class Pipeline {
 public:
  Pipeline(const Config& cfg, const RunOptions& opts, Stage recompute_from);

  const ExperimentConfig& config() const { return exp_; }
  const std::filesystem::path& out_dir() const { return out_; }
  const std::string& config_hash() const { return hash_; }

  const TimeSeriesDataset& Data();
  const TimeSeriesDataset& Train();
  const TimeSeriesDataset& Test();
  // Test samples the explainers run on.
  const TimeSeriesDataset& Explained();
  const FeatureStats& Stats();
  const RecurrentClassifier& Predictor();
  const ConditionalGenerator& Generator();
  const std::vector<ImportanceMatrix>& Importance(const std::string& method);
  std::vector<EvalReport> Evaluate();
  std::vector<EvalReport> Sanity();

  // Explainer for one method name (FIT, FO, AFO, IG, LIME).
  Explainer MakeExplainer(const std::string& method);

 private:
  bool Reuse(Stage s, const std::filesystem::path& artifact, const std::string& key) const;
  void Stamp(const std::filesystem::path& artifact, const std::string& key, double wall) const;
  double StampedWallTime(const std::filesystem::path& artifact) const;
  std::string StageKey(Stage s) const;

  Config raw_;
  ExperimentConfig exp_;
  RunOptions opts_;
  Stage recompute_from_;
  std::filesystem::path out_;
  std::string hash_;

  std::optional<TimeSeriesDataset> data_, train_, test_, explained_;
  std::optional<FeatureStats> stats_;
  std::optional<RecurrentClassifier> predictor_;
  std::unique_ptr<ConditionalGenerator> generator_;
  std::map<std::string, std::vector<ImportanceMatrix>> imps_;
  std::map<std::string, double> explain_time_;
  double predictor_time_ = 0.0;
};

void CmdGenerate(const Config& cfg, const RunOptions& opts);
void CmdTrainPredictor(const Config& cfg, const RunOptions& opts);
void CmdTrainGenerator(const Config& cfg, const RunOptions& opts);
void CmdExplain(const Config& cfg, const RunOptions& opts);
std::vector<EvalReport> CmdEvaluate(const Config& cfg, const RunOptions& opts);
std::vector<EvalReport> CmdRun(const Config& cfg, const RunOptions& opts);
std::vector<EvalReport> CmdSanityCheck(const Config& cfg, const RunOptions& opts);
// One full run per value under <out>/sweep/<index>; rows carry the value.
std::vector<ResultRow> CmdSweep(const Config& cfg, const std::string& param,
                                const std::vector<std::string>& values, const RunOptions& opts);

}  // namespace tsfit

#endif  // TSFIT_PIPELINE_H_
