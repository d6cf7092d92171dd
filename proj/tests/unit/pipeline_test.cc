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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "tsfit/error.h"
#include "unit/test_util.h"

namespace tsfit {
namespace {

namespace fs = std::filesystem;

Config SmallConfig(const fs::path& out) {
  auto cfg = Config::Parse(R"(seed = 3
[dataset]
type = spike
n_samples = 40
t = 12
[split]
n_test = 10
[predictor]
hidden = 6
epochs = 2
[generator]
hidden = 4
epochs = 2
[explain]
samples = 3
heatmap_samples = 30
[baselines]
ig_steps = 8
lime_n_perturb = 20
occlusion_draws = 3
)");
  cfg.Set("output.dir", out.string());
  return cfg;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Drops the wall-time column so runs can be compared byte for byte.
std::string WithoutWallTime(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
  return out.str();
}

StageClass ClassOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const StageError& e) {
    return e.stage_class();
  }
  ADD_FAILURE() << "no StageError thrown";
  return StageClass::kIo;
}

TEST(PipelineTest, GenerateIsDeterministic) {
  const auto dir = testing::TempDir("pipe_gen");
  CmdGenerate(SmallConfig(dir / "a"), {});
  CmdGenerate(SmallConfig(dir / "b"), {});
  EXPECT_EQ(ReadFile(dir / "a/data/dataset.jsonl"), ReadFile(dir / "b/data/dataset.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "a/data/manifest.json"));
  RunOptions o;
  o.seed = 4;
  CmdGenerate(SmallConfig(dir / "c"), o);
  EXPECT_NE(ReadFile(dir / "a/data/dataset.jsonl"), ReadFile(dir / "c/data/dataset.jsonl"));
}

TEST(PipelineTest, UnknownDatasetTypeIsConfigError) {
  const auto dir = testing::TempDir("pipe_badtype");
  auto cfg = SmallConfig(dir);
  cfg.Set("dataset.type", "weather");
  try {
    CmdGenerate(cfg, {});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage_class(), StageClass::kConfig);
    EXPECT_EQ(ExitCode(e.stage_class()), 2);
    EXPECT_NE(std::string(e.what()).find("dataset.type"), std::string::npos) << e.what();
  }
}

TEST(PipelineTest, UnknownKeyRejected) {
  auto cfg = SmallConfig(testing::TempDir("pipe_badkey"));
  cfg.Set("predictor.hiden", "4");
  EXPECT_EQ(ClassOf([&] { CmdGenerate(cfg, {}); }), StageClass::kConfig);
}

TEST(PipelineTest, ZeroSamplesGivesEmptyDataset) {
  const auto dir = testing::TempDir("pipe_empty");
  auto cfg = SmallConfig(dir);
  cfg.Set("dataset.n_samples", "0");
  cfg.Set("split.n_test", "0");
  CmdGenerate(cfg, {});
  EXPECT_TRUE(LoadDataset(dir / "data/dataset.jsonl").empty());
  EXPECT_EQ(ClassOf([&] { CmdTrainPredictor(cfg, {}); }), StageClass::kTrain);
}

TEST(PipelineTest, RunIsReproducible) {
  const auto dir = testing::TempDir("pipe_run");
  const auto a = CmdRun(SmallConfig(dir / "a"), {});
  CmdRun(SmallConfig(dir / "b"), {});
  const std::string csv = ReadFile(dir / "a/results.csv");
  EXPECT_EQ(WithoutWallTime(csv), WithoutWallTime(ReadFile(dir / "b/results.csv")));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "dataset,method,metric,mean,std,n_runs,config_hash,wall_time_s");
  for (const char* m : {"FIT", "FO", "AFO", "IG", "LIME"}) {
    EXPECT_NE(csv.find(std::string("spike,") + m + ",auroc,"), std::string::npos) << m;
    EXPECT_NE(csv.find(std::string("spike,") + m + ",auroc_drop,"), std::string::npos) << m;
    EXPECT_EQ(ReadFile(dir / "a/importance" / (std::string(m) + ".csv")),
              ReadFile(dir / "b/importance" / (std::string(m) + ".csv")));
    const auto svg = dir / "a/heatmaps" / (std::string(m) + "_sample30.svg");
    ASSERT_TRUE(fs::exists(svg)) << svg;
    EXPECT_EQ(ReadFile(svg), ReadFile(dir / "b/heatmaps" / (std::string(m) + "_sample30.svg")));
  }
  EXPECT_NE(csv.find("spike,predictor,test_auroc,"), std::string::npos);
  EXPECT_EQ(a.front().config_hash.size(), 16u);
}

TEST(PipelineTest, ImportanceCsvRoundTrip) {
  const auto dir = testing::TempDir("pipe_imp");
  CmdExplain(SmallConfig(dir), {});
  Pipeline p(SmallConfig(dir), {}, Stage::kNone);
  const auto& imps = p.Importance("FIT");
  const auto back = ReadImportanceCsv(dir / "importance/FIT.csv", p.Explained());
  ASSERT_EQ(back.size(), imps.size());
  for (size_t i = 0; i < imps.size(); ++i) {
    EXPECT_TRUE(back[i].scores == imps[i].scores);
    EXPECT_EQ(back[i].subject, imps[i].subject);
  }
}

TEST(PipelineTest, ResumeReusesArtifacts) {
  const auto dir = testing::TempDir("pipe_resume");
  const auto cfg = SmallConfig(dir);
  CmdTrainPredictor(cfg, {});
  const auto ckpt = dir / "models/predictor.ckpt";
  ASSERT_TRUE(fs::exists(ckpt));
  ASSERT_TRUE(fs::exists(dir / "models/predictor.ckpt.meta.json"));
  const auto stamp = fs::last_write_time(ckpt);
  const std::string bytes = ReadFile(ckpt);
  RunOptions resume;
  resume.resume = true;
  CmdRun(cfg, resume);
  EXPECT_EQ(fs::last_write_time(ckpt), stamp);
  // A changed predictor section invalidates the checkpoint.
  auto changed = cfg;
  changed.Set("predictor.epochs", "3");
  CmdTrainPredictor(changed, resume);
  EXPECT_NE(ReadFile(ckpt), bytes);
}

TEST(PipelineTest, SweepWritesOneGroupPerValue) {
  const auto dir = testing::TempDir("pipe_sweep");
  auto cfg = SmallConfig(dir);
  cfg.Set("explain.methods", "FIT");
  const auto rows = CmdSweep(cfg, "explain.samples", {"1", "2", "4"}, {});
  const std::string csv = ReadFile(dir / "sweep_results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "dataset,method,metric,mean,std,n_runs,config_hash,wall_time_s,sweep_param,sweep_value");
  for (const char* v : {"1", "2", "4"}) {
    EXPECT_NE(csv.find(std::string(",explain.samples,") + v + "\n"), std::string::npos) << v;
  }
  EXPECT_EQ(rows.size() % 3, 0u);
  EXPECT_NE(rows.front().report.config_hash, rows.back().report.config_hash);
  EXPECT_EQ(ClassOf([&] { CmdSweep(cfg, "explain.samples", {}, {}); }), StageClass::kConfig);
  EXPECT_EQ(ClassOf([&] { CmdSweep(cfg, "explain.nothing", {"1"}, {}); }), StageClass::kConfig);
}

TEST(PipelineTest, SanityCheckWritesStages) {
  const auto dir = testing::TempDir("pipe_sanity");
  auto cfg = SmallConfig(dir);
  cfg.Set("sanity.n_samples", "4");
  const auto rows = CmdSanityCheck(cfg, {});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].metric, "spearman_stage0");
  EXPECT_DOUBLE_EQ(rows[0].mean, 1.0);
  EXPECT_TRUE(fs::exists(dir / "sanity.csv"));
}

TEST(PipelineTest, ExitCodes) {
  EXPECT_EQ(ExitCode(StageClass::kConfig), 2);
  EXPECT_EQ(ExitCode(StageClass::kData), 3);
  EXPECT_EQ(ExitCode(StageClass::kTrain), 4);
  EXPECT_EQ(ExitCode(StageClass::kExplain), 5);
  EXPECT_EQ(ExitCode(StageClass::kEval), 6);
  EXPECT_EQ(ExitCode(StageClass::kIo), 7);
}

TEST(PipelineTest, UnwritableOutputIsIoError) {
  auto cfg = SmallConfig("/proc/tsfit_cannot_write_here");
  EXPECT_EQ(ClassOf([&] { CmdGenerate(cfg, {}); }), StageClass::kIo);
}

}  // namespace
}  // namespace tsfit
