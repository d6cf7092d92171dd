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

// tsfit: generate simulated data, train models, explain and evaluate.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tsfit/config.h"
#include "tsfit/error.h"
#include "tsfit/evalkit.h"
#include "tsfit/pipeline.h"

namespace {

struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  int workers = tsfit::DefaultWorkers();
  bool resume = false;
};

void AddCommon(CLI::App* cmd, Common* c) {
  cmd->add_option("--config", c->config, "Experiment config file")->required();
  cmd->add_option("--seed", c->seed, "Override the config seed");
  cmd->add_option("--out", c->out, "Output directory (default: output.dir)");
  cmd->add_option("--workers", c->workers, "Worker threads (default: $TSFIT_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--resume", c->resume, "Reuse checkpoints that match the config");
}

tsfit::RunOptions Options(const Common& c) {
  tsfit::RunOptions o;
  if (!c.out.empty()) o.out = c.out;
  o.seed = c.seed;
  o.workers = c.workers;
  o.resume = c.resume;
  return o;
}

void Print(const std::vector<tsfit::EvalReport>& reports) {
  for (const auto& r : reports) {
    fmt::print("{:<10} {:<20} {:.4f}\n", r.method, r.metric, r.mean);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature importance for time-series classifiers"};
  app.require_subcommand(1);

  Common common;
  std::string sweep_param;
  std::vector<std::string> sweep_values;

  struct Verb {
    const char* name;
    const char* help;
  };
  const std::vector<Verb> verbs = {
      {"generate", "Simulate the configured dataset"},
      {"train-predictor", "Train the recurrent classifier"},
      {"train-generator", "Train the conditional generator"},
      {"explain", "Compute importance for every configured method"},
      {"evaluate", "Score explanations and write results.csv"},
      {"run", "Generate, train, explain and evaluate"},
      {"sweep", "Run once per value of one config field"},
      {"sanity-check", "Cascading parameter randomization"},
  };
  std::vector<CLI::App*> cmds;
  for (const auto& v : verbs) {
    CLI::App* cmd = app.add_subcommand(v.name, v.help);
    AddCommon(cmd, &common);
    cmds.push_back(cmd);
  }
  CLI::App* sweep = app.get_subcommand("sweep");
  sweep->add_option("--param", sweep_param, "Field path, e.g. explain.samples")->required();
  sweep->add_option("--values", sweep_values, "Values to try")->required()->expected(0, -1);

  CLI11_PARSE(app, argc, argv);

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    const tsfit::Config cfg = [&] {
      try {
        return tsfit::Config::Load(common.config);
      } catch (const tsfit::Error& e) {
        throw tsfit::StageError(e.kind() == tsfit::ErrorKind::kIo ? tsfit::StageClass::kIo
                                                                  : tsfit::StageClass::kConfig,
                                "config", e.what());
      }
    }();
    const tsfit::RunOptions opts = Options(common);
    if (verb == "generate") {
      tsfit::CmdGenerate(cfg, opts);
    } else if (verb == "train-predictor") {
      tsfit::CmdTrainPredictor(cfg, opts);
    } else if (verb == "train-generator") {
      tsfit::CmdTrainGenerator(cfg, opts);
    } else if (verb == "explain") {
      tsfit::CmdExplain(cfg, opts);
    } else if (verb == "evaluate") {
      Print(tsfit::CmdEvaluate(cfg, opts));
    } else if (verb == "run") {
      Print(tsfit::CmdRun(cfg, opts));
    } else if (verb == "sanity-check") {
      Print(tsfit::CmdSanityCheck(cfg, opts));
    } else if (verb == "sweep") {
      for (const auto& row : tsfit::CmdSweep(cfg, sweep_param, sweep_values, opts)) {
        fmt::print("{}={:<8} ", row.sweep_param, row.sweep_value);
        Print({row.report});
      }
    }
  } catch (const tsfit::StageError& e) {
    std::cerr << "tsfit " << verb << ": " << e.what() << "\n";
    return tsfit::ExitCode(e.stage_class());
  } catch (const std::exception& e) {
    std::cerr << "tsfit " << verb << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
