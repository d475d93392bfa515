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

#ifndef WSNTHIN_THINNING_HPP_
#define WSNTHIN_THINNING_HPP_

#include <map>
#include <string>
#include <vector>

#include "wsnthin/dataset.hpp"
#include "wsnthin/gbt.hpp"

namespace wsnthin {

// Per-station weights in the removal objective. Stations not listed weigh 1.
// Uniform weights reproduce the plain "RMSE averaged across all stations and
// both variables" objective; raising a station's weight prioritizes keeping
// it predictable.
struct StationWeights {
  std::map<std::string, double> weights;
  double of(const std::string& id) const {
    const auto it = weights.find(id);
    return it == weights.end() ? 1.0 : it->second;
  }
};

// Weighted mean over stations of the per-station RMSE, where a station's
// RMSE is the mean of its per-variable RMSEs (scaled units). Stations with
// no pairs are excluded and reported through `excluded` when given.
double removal_objective(const std::vector<double>& predictions,
                         const std::vector<double>& observations,
                         const std::vector<InstanceRef>& refs,
                         const std::vector<StationMeta>& stations,
                         const StationWeights& weights,
                         std::vector<std::string>* excluded = nullptr);

struct EliminationConfig {
  std::vector<int> retraining_points{35, 28, 21, 14, 10, 7, 4, 3, 2};
  int step_size = 1;  // stations removed per evaluation round
  StationWeights weights;
  std::map<int, GbtParams> params_by_size;  // tuned params per subset size
  GbtParams default_params;                 // used when the map is empty
  int workers = 1;
};

struct RemovalStep {
  int round = 0;  // evaluation round the removal belongs to
  std::string removed;
  int remaining_after = 0;
  double objective = 0.0;  // scaled RMSE that selected this removal
  bool retrained = false;  // model was retrained at the start of the round
};

struct RemovalSequence {
  int fold = -1;
  std::vector<std::string> initial_stations;  // sorted by id
  std::vector<RemovalStep> steps;             // length = station count - 1
};

// Optional instrumentation: every trained model (serialized), and per round
// the schema, accumulated masks, and each candidate's objective. Lets a
// test re-score candidates through an independent prediction path.
struct EliminationTrace {
  struct Round {
    size_t model_index = 0;
    std::vector<std::string> schema_ids;
    std::vector<std::string> masked_ids;  // masked since the last retraining
    std::vector<std::pair<std::string, double>> candidates;
  };
  std::vector<std::string> model_json;  // one per (re)training
  std::vector<Round> rounds;
};

// Greedy backward elimination on one CV fold: per round each remaining
// candidate's predictor columns are masked (prediction-time mask, the table
// is never mutated), all stations and both variables are predicted on the
// test fold, and the candidate with the smallest objective is removed. The
// model is retrained on the surviving schema whenever the remaining count
// reaches (or crosses) a retraining point.
// `progress`, when given, always holds the removals completed so far, so a
// failed retraining still leaves the partial sequence for persistence.
RemovalSequence eliminate(const WideTable& table, const FoldAssignment& folds,
                          int test_fold, const EliminationConfig& cfg,
                          uint64_t seed, EliminationTrace* trace = nullptr,
                          RemovalSequence* progress = nullptr);

// Subset of size k = stations remaining after (station count - k) removals.
// Subsets are nested by construction.
std::map<int, std::vector<std::string>> extract_subsets(
    const RemovalSequence& seq, const std::vector<int>& sizes);

void write_removal_sequences(const std::string& path,
                             const std::vector<RemovalSequence>& seqs,
                             const std::string& manifest_line);
std::vector<RemovalSequence> read_removal_sequences(
    const std::string& path, const std::vector<std::string>& all_station_ids);

}  // namespace wsnthin

#endif  // WSNTHIN_THINNING_HPP_
