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

#include "wsnthin/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"
#include "wsnthin/threadpool.hpp"

namespace wsnthin {

double removal_objective(const std::vector<double>& predictions,
                         const std::vector<double>& observations,
                         const std::vector<InstanceRef>& refs,
                         const std::vector<StationMeta>& stations,
                         const StationWeights& weights,
                         std::vector<std::string>* excluded) {
  if (predictions.size() != observations.size() ||
      predictions.size() != refs.size())
    throw DataError("removal_objective: misaligned prediction/observation sets");

  const size_t ns = stations.size();
  std::vector<double> sse(ns * 2, 0.0);
  std::vector<size_t> cnt(ns * 2, 0);
  for (size_t i = 0; i < refs.size(); ++i) {
    const size_t slot =
        refs[i].station * 2 + (refs[i].variable == Variable::E ? 1 : 0);
    const double d = predictions[i] - observations[i];
    sse[slot] += d * d;
    ++cnt[slot];
  }

  double weighted_sum = 0.0, weight_total = 0.0;
  for (size_t s = 0; s < ns; ++s) {
    double rmse_sum = 0.0;
    int nvars = 0;
    for (int v = 0; v < 2; ++v) {
      if (cnt[s * 2 + v] == 0) continue;
      rmse_sum += std::sqrt(sse[s * 2 + v] / static_cast<double>(cnt[s * 2 + v]));
      ++nvars;
    }
    if (nvars == 0) {
      if (excluded) excluded->push_back(stations[s].id);
      continue;
    }
    const double w = weights.of(stations[s].id);
    weighted_sum += w * rmse_sum / nvars;
    weight_total += w;
  }
  if (weight_total <= 0.0)
    throw DataError("removal_objective: no station carries positive weight");
  return weighted_sum / weight_total;
}

namespace {

GbtParams params_for_size(const EliminationConfig& cfg, size_t size) {
  if (cfg.params_by_size.empty()) return cfg.default_params;
  // nearest tuned size; ties prefer the larger (more conservative) model
  auto best = cfg.params_by_size.begin();
  long best_d = -1;
  for (auto it = cfg.params_by_size.begin(); it != cfg.params_by_size.end(); ++it) {
    const long d = std::labs(static_cast<long>(it->first) - static_cast<long>(size));
    if (best_d < 0 || d < best_d || (d == best_d && it->first > best->first)) {
      best_d = d;
      best = it;
    }
  }
  return best->second;
}

struct FoldDays {
  std::vector<int64_t> train, val, test;
};

FoldDays split_fold_days(const FoldAssignment& folds, int test_fold) {
  if (test_fold < 0 || test_fold >= folds.k)
    throw ConfigError("test fold out of range");
  const int val_fold = (test_fold + 1) % folds.k;
  FoldDays fd;
  fd.train = folds.days_not_in({test_fold, val_fold});
  fd.val = folds.days_of_fold(val_fold);
  fd.test = folds.days_of_fold(test_fold);
  if (fd.train.empty() || fd.val.empty() || fd.test.empty())
    throw DataError("fold split produced an empty train/val/test day set");
  return fd;
}

}  // namespace

RemovalSequence eliminate(const WideTable& table, const FoldAssignment& folds,
                          int test_fold, const EliminationConfig& cfg,
                          uint64_t seed, EliminationTrace* trace,
                          RemovalSequence* progress) {
  const size_t nstations = table.stations.size();
  if (nstations < 2) throw ConfigError("eliminate: need at least 2 stations");
  if (cfg.step_size < 1) throw ConfigError("eliminate: step_size must be >= 1");

  const FoldDays days = split_fold_days(folds, test_fold);
  Rng rng(seed);

  RemovalSequence seq;
  seq.fold = test_fold;
  for (const auto& s : table.stations) seq.initial_stations.push_back(s.id);
  if (progress) *progress = seq;

  std::vector<size_t> current(nstations);
  for (size_t i = 0; i < nstations; ++i) current[i] = i;

  // Retraining points, descending, restricted to reachable counts.
  std::vector<int> points;
  for (int p : cfg.retraining_points)
    if (p >= 2 && static_cast<size_t>(p) <= nstations) points.push_back(p);
  std::sort(points.rbegin(), points.rend());
  size_t next_point = 0;

  FeatureSchema schema;
  InstanceSet test_set;
  TreeEnsemble model;
  std::vector<size_t> masked_since_retrain;  // indices into table.stations
  bool model_ready = false;
  int retrain_count = 0;

  const auto retrain = [&]() {
    schema.predictor_stations = current;
    Rng inst_rng = rng.fork(1000 + retrain_count);
    InstanceSet train_set =
        build_masked_instances(table, days.train, schema, inst_rng);
    InstanceSet val_set = build_masked_instances(table, days.val, schema, inst_rng);
    const GbtParams params = params_for_size(cfg, current.size());
    const MatrixView xt{train_set.features.data(), train_set.count,
                        schema.nfeatures()};
    const MatrixView xv{val_set.features.data(), val_set.count, schema.nfeatures()};
    model = train_gbt(xt, train_set.target, xv, val_set.target, params,
                      rng.fork(2000 + retrain_count).seed());
    test_set = build_test_instances(table, days.test, schema);
    masked_since_retrain.clear();
    model_ready = true;
    ++retrain_count;
    if (trace) trace->model_json.push_back(model.to_json_string());
  };

  int round = 0;
  while (current.size() > 1) {
    ++round;
    bool retrained = false;
    // Trigger once the remaining count reaches or crosses the next point
    // (step_size > 1 can jump over a point).
    if (next_point < points.size() &&
        static_cast<size_t>(points[next_point]) >= current.size()) {
      retrain();
      retrained = true;
      while (next_point < points.size() &&
             static_cast<size_t>(points[next_point]) >= current.size())
        ++next_point;
    } else if (!model_ready) {
      retrain();  // initial full model; not a scheduled retraining
    }

    // Mask layout shared by every candidate: stations removed since the
    // last retraining are invisible to the model.
    std::vector<uint8_t> base_mask(schema.nfeatures(), 0);
    for (size_t i = 0; i < schema.predictor_stations.size(); ++i) {
      const size_t st = schema.predictor_stations[i];
      if (std::find(masked_since_retrain.begin(), masked_since_retrain.end(),
                    st) != masked_since_retrain.end()) {
        base_mask[i * 2] = 1;
        base_mask[i * 2 + 1] = 1;
      }
    }

    const std::vector<size_t> candidates = current;  // ascending = id order
    std::vector<double> objective(candidates.size());
    parallel_for(candidates.size(), cfg.workers, [&](size_t ci) {
      std::vector<uint8_t> mask = base_mask;
      for (size_t i = 0; i < schema.predictor_stations.size(); ++i) {
        if (schema.predictor_stations[i] == candidates[ci]) {
          mask[i * 2] = 1;
          mask[i * 2 + 1] = 1;
        }
      }
      std::vector<double> preds(test_set.count);
      for (size_t i = 0; i < test_set.count; ++i)
        preds[i] = model.predict_masked(test_set.row(i), schema.nfeatures(),
                                        mask.data());
      objective[ci] = removal_objective(preds, test_set.target, test_set.refs,
                                        table.stations, cfg.weights);
    });

    if (trace) {
      EliminationTrace::Round tr;
      tr.model_index = trace->model_json.size() - 1;
      for (size_t st : schema.predictor_stations)
        tr.schema_ids.push_back(table.stations[st].id);
      for (size_t st : masked_since_retrain)
        tr.masked_ids.push_back(table.stations[st].id);
      for (size_t ci = 0; ci < candidates.size(); ++ci)
        tr.candidates.emplace_back(table.stations[candidates[ci]].id,
                                   objective[ci]);
      trace->rounds.push_back(std::move(tr));
    }

    // Rank candidates by (objective, id); remove the step_size best.
    std::vector<size_t> ranked(candidates.size());
    for (size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
    std::stable_sort(ranked.begin(), ranked.end(), [&](size_t a, size_t b) {
      return objective[a] < objective[b];
    });
    const size_t nremove =
        std::min<size_t>(cfg.step_size, current.size() - 1);
    for (size_t k = 0; k < nremove; ++k) {
      const size_t victim = candidates[ranked[k]];
      current.erase(std::find(current.begin(), current.end(), victim));
      masked_since_retrain.push_back(victim);
      seq.steps.push_back(RemovalStep{round, table.stations[victim].id,
                                      static_cast<int>(current.size()),
                                      objective[ranked[k]],
                                      retrained && k == 0});
    }
    if (progress) *progress = seq;
  }
  return seq;
}

std::map<int, std::vector<std::string>> extract_subsets(
    const RemovalSequence& seq, const std::vector<int>& sizes) {
  const int total = static_cast<int>(seq.initial_stations.size());
  std::map<int, std::vector<std::string>> out;
  for (int k : sizes) {
    if (k < 2 || k > total)
      throw ConfigError("subset size " + std::to_string(k) +
                        " outside the valid range [2, " + std::to_string(total) + "]");
    std::set<std::string> remaining(seq.initial_stations.begin(),
                                    seq.initial_stations.end());
    const int removals = total - k;
    if (removals > static_cast<int>(seq.steps.size()))
      throw DataError("removal sequence too short for subset size " +
                      std::to_string(k));
    for (int i = 0; i < removals; ++i) remaining.erase(seq.steps[i].removed);
    out[k] = {remaining.begin(), remaining.end()};
  }
  return out;
}

void write_removal_sequences(const std::string& path,
                             const std::vector<RemovalSequence>& seqs,
                             const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.row({"fold", "step", "removed_station", "remaining_count",
         "objective_rmse_scaled", "retrained_flag"});
  for (const auto& seq : seqs) {
    for (const auto& st : seq.steps) {
      w.row({std::to_string(seq.fold), std::to_string(st.round), st.removed,
             std::to_string(st.remaining_after), format_double(st.objective),
             st.retrained ? "1" : "0"});
    }
  }
  w.close();
}

std::vector<RemovalSequence> read_removal_sequences(
    const std::string& path, const std::vector<std::string>& all_station_ids) {
  CsvReader r(path);
  r.read_header();
  std::map<int, RemovalSequence> by_fold;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 6) throw DataError(path + ": expected 6 fields");
    const int fold = static_cast<int>(parse_long(f[0], path));
    RemovalSequence& seq = by_fold[fold];
    seq.fold = fold;
    seq.initial_stations = all_station_ids;
    seq.steps.push_back(RemovalStep{static_cast<int>(parse_long(f[1], path)),
                                    f[2],
                                    static_cast<int>(parse_long(f[3], path)),
                                    parse_double(f[4], path), f[5] == "1"});
  }
  std::vector<RemovalSequence> out;
  out.reserve(by_fold.size());
  for (auto& [fold, seq] : by_fold) out.push_back(std::move(seq));
  return out;
}

}  // namespace wsnthin
