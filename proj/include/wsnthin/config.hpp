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

#ifndef WSNTHIN_CONFIG_HPP_
#define WSNTHIN_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsnthin/evaluation.hpp"
#include "wsnthin/gbt.hpp"
#include "wsnthin/qc.hpp"
#include "wsnthin/synth.hpp"
#include "wsnthin/thinning.hpp"
#include "wsnthin/tuning.hpp"

namespace wsnthin {

// Every random decision in the pipeline draws from a named seed derived from
// the master seed, so a single value reproduces the entire run while any
// stage can still be re-seeded individually.
struct Seeds {
  uint64_t master = 42;
  std::map<std::string, uint64_t> named;
  uint64_t get(const std::string& name) const;
};

struct PipelineConfig {
  std::string config_path;  // where this config was loaded from
  uint64_t config_hash = 0;

  std::string observations_path;  // defaults to <out>/observations.csv
  std::string metadata_path;      // defaults to <out>/metadata.csv
  std::string out_dir = "out";

  TimeRange train_period;
  TimeRange eval_period;
  int64_t cadence_s = 600;

  QcConfig qc;
  std::vector<ExclusionWindow> exclusions;

  int cv_folds = 10;
  std::vector<GridPoint> grid;
  GbtParams gbt;

  std::vector<int> retraining_points{35, 28, 21, 14, 10, 7, 4, 3, 2};
  int thin_step_size = 1;
  StationWeights weights;

  std::vector<int> subset_sizes{42, 35, 28, 21, 14, 10, 7, 4, 3, 2};
  std::vector<RunVariant> variants{RunVariant::TrainToTrain,
                                   RunVariant::TrainToEval,
                                   RunVariant::BothToBoth};

  std::vector<std::string> reference_stations;  // GLM predictors
  int random_repeats = 10;
  RunVariant baseline_variant = RunVariant::TrainToEval;

  SplitConfig split;
  IndicatorCriteria indicators;
  std::vector<int> bias_sizes;  // empty = largest subset size only

  Seeds seeds;
  int workers = 1;
  bool save_models = false;

  bool has_scenario = false;
  ScenarioConfig scenario;
};

// Parses the JSON config; unknown keys are rejected at the top level so a
// typo cannot silently disable a section. Throws ConfigError.
PipelineConfig load_config(const std::string& path);

// Replaces the master seed (CLI --seed-override); named seeds re-derive.
void apply_seed_override(PipelineConfig& cfg, uint64_t seed);

uint64_t fnv1a(const std::string& bytes);

}  // namespace wsnthin

#endif  // WSNTHIN_CONFIG_HPP_
