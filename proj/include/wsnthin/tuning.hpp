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

#ifndef WSNTHIN_TUNING_HPP_
#define WSNTHIN_TUNING_HPP_

#include <map>
#include <string>
#include <vector>

#include "wsnthin/dataset.hpp"
#include "wsnthin/gbt.hpp"
#include "wsnthin/thinning.hpp"

namespace wsnthin {

struct GridPoint {
  double learning_rate;
  int max_depth;
  double subsample;
};

struct GridResultRow {
  int subset_size;
  GridPoint point;
  int fold;
  double rmse_scaled;
};

struct TuneResult {
  std::vector<GridResultRow> rows;
  std::map<int, GbtParams> best_by_size;
};

// Full grid search per predictor-subset size under cross-validation. For
// each (test fold, size) one seeded random station subset serves as the
// predictor set; every grid point trains against it and is scored on the
// test fold with the scaled network RMSE (stations and both variables
// averaged). The winner per size is the grid point with the lowest mean
// RMSE across folds.
TuneResult tune(const WideTable& table, const FoldAssignment& folds,
                const std::vector<int>& sizes,
                const std::vector<GridPoint>& grid, const GbtParams& base,
                uint64_t seed, int workers, int repeats_per_fold = 1);

void write_grid_results(const std::string& path,
                        const std::vector<GridResultRow>& rows,
                        const std::string& manifest_line);
void write_best_params(const std::string& path,
                       const std::map<int, GbtParams>& best,
                       const std::string& manifest_line);
std::map<int, GbtParams> read_best_params(const std::string& path);

}  // namespace wsnthin

#endif  // WSNTHIN_TUNING_HPP_
