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

#ifndef WSNTHIN_GBT_HPP_
#define WSNTHIN_GBT_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace wsnthin {

struct GbtParams {
  double learning_rate = 0.1;
  int max_depth = 6;
  double subsample = 1.0;        // per-round row subsampling fraction
  int early_stopping_rounds = 500;
  int max_rounds = 5000;
  double leaf_regularization = 1.0;  // lambda in the leaf value G/(n+lambda)
  double min_split_gain = 0.0;       // gamma; a split must beat this strictly
  bool histogram_mode = false;       // quantile-binned split search
  int histogram_bins = 256;
};

// A split routes value < threshold to the left child; a missing feature
// follows default_left. feature < 0 marks a leaf.
struct TreeNode {
  int32_t feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;  // leaf value, already scaled by the learning rate
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_row(const double* x) const;
  // `mask` (length = feature count, may be null) forces features to be
  // treated as missing without touching the input row.
  double predict_row_masked(const double* x, const uint8_t* mask) const;
  int max_node_depth() const;
};

// Non-owning dense row-major matrix.
struct MatrixView {
  const double* data = nullptr;
  size_t rows = 0;
  size_t cols = 0;
  const double* row(size_t i) const { return data + i * cols; }
};

struct TrainLog {
  std::vector<double> train_rmse;  // per completed round
  std::vector<double> val_rmse;
};

// Boosted squared-error ensemble over trees[0..best_round). base_score is
// the training-target mean; best_round is the validation-selected prefix
// length (0 = base score only).
class TreeEnsemble {
 public:
  GbtParams params;
  double base_score = 0.0;
  int best_round = 0;
  size_t n_features = 0;
  std::vector<Tree> trees;

  double predict(const double* x, size_t n) const;
  double predict_masked(const double* x, size_t n, const uint8_t* mask) const;

  // Versioned JSON serialization; a round trip reproduces predictions
  // bit-exactly.
  std::string to_json_string() const;
  static TreeEnsemble from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static TreeEnsemble load(const std::string& path);
};

// Trains squared-error boosting with exact greedy splits over present-valued
// rows; rows with a missing feature are tried on both sides of every
// candidate and the better side is stored as the split's default direction.
// Stops once validation RMSE has not improved for early_stopping_rounds
// rounds (or at max_rounds) and keeps the best prefix.
TreeEnsemble train_gbt(const MatrixView& x_train, const std::vector<double>& y_train,
                       const MatrixView& x_val, const std::vector<double>& y_val,
                       const GbtParams& params, uint64_t seed,
                       TrainLog* log = nullptr);

}  // namespace wsnthin

#endif  // WSNTHIN_GBT_HPP_
