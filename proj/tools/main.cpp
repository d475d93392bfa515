// Copyright 2026 The wsnthin Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the thinning pipeline. Deliberately thin: all
// work happens behind the shared library's C interface.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsnthin.h"

namespace {

struct StageRunner {
  std::string config_path;
  std::string out_override;
  uint64_t seed_override = 0;
  bool has_seed_override = false;
  int workers = 0;

  int run(const std::vector<std::string>& stages) {
    wt_pipeline* pipeline = nullptr;
    wt_status st = wt_pipeline_open(config_path.c_str(), &pipeline);
    if (st != WT_OK) {
      std::fprintf(stderr, "error: %s\n", wt_global_error());
      return st;
    }
    if (has_seed_override) {
      st = wt_pipeline_set_seed(pipeline, seed_override);
    }
    if (st == WT_OK && workers > 0) {
      st = wt_pipeline_set_workers(pipeline, workers);
    }
    if (st == WT_OK && !out_override.empty()) {
      st = wt_pipeline_set_output_dir(pipeline, out_override.c_str());
    }
    for (const auto& stage : stages) {
      if (st != WT_OK) break;
      std::fprintf(stderr, "[wsnthin] running stage %s\n", stage.c_str());
      st = wt_pipeline_run_stage(pipeline, stage.c_str());
    }
    if (st != WT_OK) {
      std::fprintf(stderr, "error: %s\n", wt_last_error(pipeline));
    }
    wt_pipeline_close(pipeline);
    return st;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weather-station-network thinning pipeline"};
  app.set_version_flag("--version", std::string(wt_version()));

  StageRunner runner;
  app.add_option("--config", runner.config_path, "pipeline config (JSON)")
      ->required();
  app.add_option("--out", runner.out_override, "override the output directory");
  app.add_option("--workers", runner.workers, "override the worker count");
  auto* seed_opt = app.add_option("--seed-override", runner.seed_override,
                                  "replace the master seed");

  const std::vector<std::string> stage_names{
      "simulate", "qc",       "build",    "tune",   "thin",
      "fit",      "evaluate", "baseline", "report", "run-all"};
  std::string chosen;
  for (const auto& name : stage_names) {
    std::string description;
    if (name == "simulate") description = "generate the synthetic scenario data";
    else if (name == "qc") description = "quality control + 10-min resampling";
    else if (name == "build") description = "assemble the scaled wide table and CV folds";
    else if (name == "tune") description = "grid hyperparameter search per subset size";
    else if (name == "thin") description = "greedy backward station elimination";
    else if (name == "fit") description = "train final models and predict";
    else if (name == "evaluate") description = "metrics, indicators, percentiles, bias";
    else if (name == "baseline") description = "GLM and random-subset references";
    else if (name == "report") description = "assemble summary tables";
    else description = "run every stage in order";
    app.add_subcommand(name, description)->callback([&chosen, name]() {
      chosen = name;
    });
  }
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // help/version exit cleanly; anything else is a configuration error
    return code == 0 ? 0 : 2;
  }
  runner.has_seed_override = seed_opt->count() > 0;
  return runner.run({chosen});
}
