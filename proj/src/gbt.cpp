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

#include "wsnthin/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "wsnthin/dataset.hpp"
#include "wsnthin/errors.hpp"
#include "wsnthin/rng.hpp"

namespace wsnthin {

double Tree::predict_row(const double* x) const {
  return predict_row_masked(x, nullptr);
}

double Tree::predict_row_masked(const double* x, const uint8_t* mask) const {
  int32_t id = 0;
  while (true) {
    const TreeNode& n = nodes[id];
    if (n.feature < 0) return n.value;
    const double v = x[n.feature];
    const bool miss = std::isnan(v) || (mask && mask[n.feature]);
    if (miss) {
      id = n.default_left ? n.left : n.right;
    } else {
      id = v < n.threshold ? n.left : n.right;
    }
  }
}

int Tree::max_node_depth() const {
  // iterative depth computation over the implicit child links
  std::vector<std::pair<int32_t, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes[id];
    best = std::max(best, d);
    if (n.feature >= 0) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

double TreeEnsemble::predict(const double* x, size_t n) const {
  return predict_masked(x, n, nullptr);
}

double TreeEnsemble::predict_masked(const double* x, size_t n,
                                    const uint8_t* mask) const {
  if (n != n_features)
    throw DataError("feature vector length " + std::to_string(n) +
                    " does not match model schema " + std::to_string(n_features));
  double sum = base_score;
  for (int t = 0; t < best_round; ++t)
    sum += trees[t].predict_row_masked(x, mask);
  return sum;
}

namespace {

constexpr int kFormatVersion = 1;

double rmse_of(const std::vector<double>& pred, const std::vector<double>& obs) {
  double sse = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - obs[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(pred.size()));
}

// Score contribution of a node holding gradient sum g over n rows.
inline double leaf_score(double g, double n, double lambda) {
  return g * g / (n + lambda);
}

struct BuildNode {
  double grad_sum = 0.0;
  double count = 0.0;
  // best candidate found so far
  double best_gain = 0.0;
  int32_t best_feature = -1;
  double best_threshold = 0.0;
  bool best_default_left = true;
  // output wiring
  int32_t out_left = -1;
  int32_t out_right = -1;
};

// Per-feature quantile bin edges for histogram mode.
struct FeatureBins {
  std::vector<double> edges;  // sorted; split thresholds are edge values
};

FeatureBins make_bins(const std::vector<double>& sorted_values, int max_bins) {
  FeatureBins fb;
  const size_t n = sorted_values.size();
  if (n == 0) return fb;
  for (int b = 1; b < max_bins; ++b) {
    const size_t idx = n * static_cast<size_t>(b) / static_cast<size_t>(max_bins);
    if (idx >= n) break;
    const double v = sorted_values[idx];
    if (fb.edges.empty() || v > fb.edges.back()) fb.edges.push_back(v);
  }
  return fb;
}

class Trainer {
 public:
  Trainer(const MatrixView& x, const std::vector<double>& y,
          const GbtParams& params, uint64_t seed)
      : x_(x), y_(y), p_(params), rng_(seed) {
    presort();
  }

  Tree build_round_tree(const std::vector<double>& margins) {
    const size_t n = x_.rows;
    grad_.resize(n);
    for (size_t i = 0; i < n; ++i) grad_[i] = y_[i] - margins[i];

    pos_.assign(n, -1);
    double root_sum = 0.0;
    size_t root_cnt = 0;
    if (p_.subsample < 1.0) {
      const size_t k = std::max<size_t>(
          1, static_cast<size_t>(p_.subsample * static_cast<double>(n)));
      for (size_t i : rng_.sample_without_replacement(n, k)) {
        pos_[i] = 0;
        root_sum += grad_[i];
        ++root_cnt;
      }
    } else {
      for (size_t i = 0; i < n; ++i) {
        pos_[i] = 0;
        root_sum += grad_[i];
      }
      root_cnt = n;
    }

    nodes_.clear();
    nodes_.push_back(BuildNode{root_sum, static_cast<double>(root_cnt)});

    size_t level_begin = 0, level_end = 1;
    for (int depth = 0; depth < p_.max_depth && level_begin < level_end; ++depth) {
      find_best_splits(level_begin, level_end);
      const size_t next_begin = apply_splits(level_begin, level_end);
      level_begin = level_end;
      level_end = next_begin;
    }

    return emit_tree();
  }

 private:
  void presort() {
    const size_t d = x_.cols;
    order_.resize(d);
    if (p_.histogram_mode) bins_.resize(d);
    for (size_t f = 0; f < d; ++f) {
      auto& ord = order_[f];
      for (size_t i = 0; i < x_.rows; ++i)
        if (!std::isnan(x_.row(i)[f])) ord.push_back(static_cast<uint32_t>(i));
      std::sort(ord.begin(), ord.end(), [&](uint32_t a, uint32_t b) {
        const double va = x_.row(a)[f], vb = x_.row(b)[f];
        if (va != vb) return va < vb;
        return a < b;
      });
      if (p_.histogram_mode) {
        std::vector<double> vals;
        vals.reserve(ord.size());
        for (uint32_t i : ord) vals.push_back(x_.row(i)[f]);
        bins_[f] = make_bins(vals, p_.histogram_bins);
      }
    }
  }

  // Evaluates one candidate threshold for `node`; keeps the first strictly
  // better candidate, so ties resolve to the lowest feature then the lowest
  // threshold (features and thresholds are scanned in ascending order).
  void consider(BuildNode& node, int32_t feature, double threshold,
                double left_g, double left_n, double present_g,
                double present_n) {
    const double lambda = p_.leaf_regularization;
    const double miss_g = node.grad_sum - present_g;
    const double miss_n = node.count - present_n;
    const double right_g = present_g - left_g;
    const double right_n = present_n - left_n;
    const double parent = leaf_score(node.grad_sum, node.count, lambda);

    const double gain_miss_left =
        leaf_score(left_g + miss_g, left_n + miss_n, lambda) +
        leaf_score(right_g, right_n, lambda) - parent;
    const double gain_miss_right =
        leaf_score(left_g, left_n, lambda) +
        leaf_score(right_g + miss_g, right_n + miss_n, lambda) - parent;

    // Ties between directions prefer left; this is also the fallback when
    // the node holds no missing rows (both gains equal then).
    const bool go_left = gain_miss_left >= gain_miss_right;
    const double gain = go_left ? gain_miss_left : gain_miss_right;
    if (gain > node.best_gain && gain > p_.min_split_gain) {
      node.best_gain = gain;
      node.best_feature = feature;
      node.best_threshold = threshold;
      node.best_default_left = go_left;
    }
  }

  void find_best_splits(size_t level_begin, size_t level_end) {
    const size_t width = level_end - level_begin;
    // per-node present-value totals for the feature under scan
    std::vector<double> present_g(width), present_n(width);
    std::vector<double> run_g(width), run_n(width), prev_val(width);
    std::vector<char> started(width);

    for (size_t f = 0; f < x_.cols; ++f) {
      std::fill(present_g.begin(), present_g.end(), 0.0);
      std::fill(present_n.begin(), present_n.end(), 0.0);
      for (uint32_t r : order_[f]) {
        const int32_t nd = pos_[r];
        if (nd < 0 || static_cast<size_t>(nd) < level_begin ||
            static_cast<size_t>(nd) >= level_end)
          continue;
        present_g[nd - level_begin] += grad_[r];
        present_n[nd - level_begin] += 1.0;
      }

      if (p_.histogram_mode && !bins_[f].edges.empty()) {
        scan_feature_binned(f, level_begin, level_end, present_g, present_n);
        continue;
      }

      std::fill(run_g.begin(), run_g.end(), 0.0);
      std::fill(run_n.begin(), run_n.end(), 0.0);
      std::fill(started.begin(), started.end(), 0);
      for (uint32_t r : order_[f]) {
        const int32_t nd = pos_[r];
        if (nd < 0 || static_cast<size_t>(nd) < level_begin ||
            static_cast<size_t>(nd) >= level_end)
          continue;
        const size_t k = nd - level_begin;
        const double v = x_.row(r)[f];
        if (started[k] && v != prev_val[k]) {
          const double thr = 0.5 * (prev_val[k] + v);
          // A midpoint that rounds down onto the lower value cannot separate
          // the two rows; skip it.
          if (thr > prev_val[k]) {
            consider(nodes_[nd], static_cast<int32_t>(f), thr, run_g[k],
                     run_n[k], present_g[k], present_n[k]);
          }
        }
        run_g[k] += grad_[r];
        run_n[k] += 1.0;
        prev_val[k] = v;
        started[k] = 1;
      }
    }
  }

  void scan_feature_binned(size_t f, size_t level_begin, size_t level_end,
                           const std::vector<double>& present_g,
                           const std::vector<double>& present_n) {
    const size_t width = level_end - level_begin;
    const auto& edges = bins_[f].edges;
    const size_t nbins = edges.size() + 1;
    hist_g_.assign(width * nbins, 0.0);
    hist_n_.assign(width * nbins, 0.0);
    for (uint32_t r : order_[f]) {
      const int32_t nd = pos_[r];
      if (nd < 0 || static_cast<size_t>(nd) < level_begin ||
          static_cast<size_t>(nd) >= level_end)
        continue;
      const double v = x_.row(r)[f];
      // bin b holds values in [edges[b-1], edges[b}); a value equal to an
      // edge therefore routes right of a split at that edge, matching the
      // v < threshold rule
      const size_t b = static_cast<size_t>(
          std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
      hist_g_[(nd - level_begin) * nbins + b] += grad_[r];
      hist_n_[(nd - level_begin) * nbins + b] += 1.0;
    }
    for (size_t k = 0; k < width; ++k) {
      BuildNode& node = nodes_[level_begin + k];
      double gl = 0.0, nl = 0.0;
      for (size_t e = 0; e < edges.size(); ++e) {
        gl += hist_g_[k * nbins + e];
        nl += hist_n_[k * nbins + e];
        if (nl == 0.0 || nl == present_n[k]) continue;
        consider(node, static_cast<int32_t>(f), edges[e], gl, nl, present_g[k],
                 present_n[k]);
      }
    }
  }

  // Turns decided nodes into leaves or splits and repartitions rows.
  // Returns the id one past the last child created.
  size_t apply_splits(size_t level_begin, size_t level_end) {
    for (size_t id = level_begin; id < level_end; ++id) {
      if (nodes_[id].best_feature < 0) continue;
      // index access throughout: push_back invalidates references
      nodes_[id].out_left = static_cast<int32_t>(nodes_.size());
      nodes_.push_back(BuildNode{});
      nodes_[id].out_right = static_cast<int32_t>(nodes_.size());
      nodes_.push_back(BuildNode{});
    }
    const size_t next_end = nodes_.size();

    for (size_t r = 0; r < x_.rows; ++r) {
      const int32_t nd = pos_[r];
      if (nd < 0 || static_cast<size_t>(nd) < level_begin ||
          static_cast<size_t>(nd) >= level_end)
        continue;
      const BuildNode& node = nodes_[nd];
      if (node.best_feature < 0) continue;
      const double v = x_.row(r)[node.best_feature];
      bool left;
      if (std::isnan(v)) {
        left = node.best_default_left;
      } else {
        left = v < node.best_threshold;
      }
      const int32_t child = left ? node.out_left : node.out_right;
      nodes_[child].grad_sum += grad_[r];
      nodes_[child].count += 1.0;
      pos_[r] = child;
    }
    return next_end;
  }

  Tree emit_tree() const {
    Tree tree;
    tree.nodes.resize(nodes_.size());
    const double lambda = p_.leaf_regularization;
    for (size_t i = 0; i < nodes_.size(); ++i) {
      const BuildNode& b = nodes_[i];
      TreeNode& out = tree.nodes[i];
      if (b.best_feature >= 0) {
        out.feature = b.best_feature;
        out.threshold = b.best_threshold;
        out.default_left = b.best_default_left;
        out.left = b.out_left;
        out.right = b.out_right;
      } else {
        out.feature = -1;
        out.value = p_.learning_rate * b.grad_sum / (b.count + lambda);
      }
    }
    return tree;
  }

  const MatrixView& x_;
  const std::vector<double>& y_;
  const GbtParams& p_;
  Rng rng_;

  std::vector<std::vector<uint32_t>> order_;  // per feature, rows sorted by value
  std::vector<FeatureBins> bins_;
  std::vector<double> grad_;
  std::vector<int32_t> pos_;
  std::vector<BuildNode> nodes_;
  std::vector<double> hist_g_, hist_n_;
};

bool is_null_root_leaf(const Tree& t) {
  return t.nodes.size() == 1 && t.nodes[0].feature < 0 && t.nodes[0].value == 0.0;
}

}  // namespace

TreeEnsemble train_gbt(const MatrixView& x_train, const std::vector<double>& y_train,
                       const MatrixView& x_val, const std::vector<double>& y_val,
                       const GbtParams& params, uint64_t seed, TrainLog* log) {
  if (x_train.rows == 0 || x_train.rows != y_train.size())
    throw DataError("gbt: empty or inconsistent training set");
  if (x_val.rows == 0 || x_val.rows != y_val.size())
    throw DataError("gbt: empty or inconsistent validation set");
  if (x_val.cols != x_train.cols)
    throw DataError("gbt: train/validation schema mismatch");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
    throw ConfigError("gbt: learning_rate must be in (0,1]");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0))
    throw ConfigError("gbt: subsample must be in (0,1]");
  if (params.max_depth < 1) throw ConfigError("gbt: max_depth must be >= 1");

  TreeEnsemble model;
  model.params = params;
  model.n_features = x_train.cols;
  double mean = 0.0;
  for (double v : y_train) mean += v;
  model.base_score = mean / static_cast<double>(y_train.size());

  std::vector<double> margin(x_train.rows, model.base_score);
  std::vector<double> val_margin(x_val.rows, model.base_score);

  double best_val = rmse_of(val_margin, y_val);
  int since_improved = 0;
  Trainer trainer(x_train, y_train, params, seed);

  for (int round = 1; round <= params.max_rounds; ++round) {
    Tree tree = trainer.build_round_tree(margin);
    for (size_t i = 0; i < x_train.rows; ++i)
      margin[i] += tree.predict_row(x_train.row(i));
    for (size_t i = 0; i < x_val.rows; ++i)
      val_margin[i] += tree.predict_row(x_val.row(i));

    const bool dead_end = is_null_root_leaf(tree) && params.subsample >= 1.0;
    model.trees.push_back(std::move(tree));

    const double val_rmse = rmse_of(val_margin, y_val);
    if (log) {
      log->train_rmse.push_back(rmse_of(margin, y_train));
      log->val_rmse.push_back(val_rmse);
    }
    if (val_rmse < best_val) {
      best_val = val_rmse;
      model.best_round = round;
      since_improved = 0;
    } else {
      ++since_improved;
    }
    if (since_improved >= params.early_stopping_rounds) break;
    if (dead_end) break;  // no residual signal left; later rounds are identical
  }

  model.trees.resize(model.best_round);
  return model;
}

std::string TreeEnsemble::to_json_string() const {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["params"] = {{"learning_rate", params.learning_rate},
                 {"max_depth", params.max_depth},
                 {"subsample", params.subsample},
                 {"early_stopping_rounds", params.early_stopping_rounds},
                 {"max_rounds", params.max_rounds},
                 {"leaf_regularization", params.leaf_regularization},
                 {"min_split_gain", params.min_split_gain},
                 {"histogram_mode", params.histogram_mode},
                 {"histogram_bins", params.histogram_bins}};
  j["base_score"] = base_score;
  j["best_round"] = best_round;
  j["n_features"] = n_features;
  auto& jt = j["trees"] = nlohmann::json::array();
  for (const auto& tree : trees) {
    nlohmann::json jn = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      if (n.feature < 0) {
        jn.push_back({{"v", n.value}});
      } else {
        jn.push_back({{"f", n.feature},
                      {"t", n.threshold},
                      {"d", n.default_left ? "l" : "r"},
                      {"l", n.left},
                      {"r", n.right}});
      }
    }
    jt.push_back(std::move(jn));
  }
  return j.dump();
}

TreeEnsemble TreeEnsemble::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw DataError("unsupported model format version");
  TreeEnsemble m;
  const auto& jp = j.at("params");
  m.params.learning_rate = jp.at("learning_rate").get<double>();
  m.params.max_depth = jp.at("max_depth").get<int>();
  m.params.subsample = jp.at("subsample").get<double>();
  m.params.early_stopping_rounds = jp.at("early_stopping_rounds").get<int>();
  m.params.max_rounds = jp.at("max_rounds").get<int>();
  m.params.leaf_regularization = jp.at("leaf_regularization").get<double>();
  m.params.min_split_gain = jp.at("min_split_gain").get<double>();
  m.params.histogram_mode = jp.at("histogram_mode").get<bool>();
  m.params.histogram_bins = jp.at("histogram_bins").get<int>();
  m.base_score = j.at("base_score").get<double>();
  m.best_round = j.at("best_round").get<int>();
  m.n_features = j.at("n_features").get<size_t>();
  for (const auto& jtree : j.at("trees")) {
    Tree tree;
    for (const auto& jn : jtree) {
      TreeNode n;
      if (jn.contains("v")) {
        n.value = jn.at("v").get<double>();
      } else {
        n.feature = jn.at("f").get<int32_t>();
        n.threshold = jn.at("t").get<double>();
        n.default_left = jn.at("d").get<std::string>() == "l";
        n.left = jn.at("l").get<int32_t>();
        n.right = jn.at("r").get<int32_t>();
      }
      tree.nodes.push_back(n);
    }
    m.trees.push_back(std::move(tree));
  }
  if (m.best_round > static_cast<int>(m.trees.size()))
    throw DataError("model best_round exceeds stored tree count");
  return m;
}

void TreeEnsemble::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << to_json_string() << "\n";
  if (!out) throw DataError("write failed: " + path);
}

TreeEnsemble TreeEnsemble::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace wsnthin
