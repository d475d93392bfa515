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

#include "wsnthin/tuning.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"
#include "wsnthin/threadpool.hpp"

namespace wsnthin {

namespace {

struct TuneJob {
  int fold;
  int size;
  int repeat;
};

}  // namespace

TuneResult tune(const WideTable& table, const FoldAssignment& folds,
                const std::vector<int>& sizes,
                const std::vector<GridPoint>& grid, const GbtParams& base,
                uint64_t seed, int workers, int repeats_per_fold) {
  if (grid.empty()) throw ConfigError("tune: empty hyperparameter grid");
  if (repeats_per_fold < 1) throw ConfigError("tune: repeats must be >= 1");
  for (int s : sizes) {
    if (s < 1 || static_cast<size_t>(s) > table.stations.size())
      throw ConfigError("tune: subset size " + std::to_string(s) +
                        " exceeds the station count");
  }

  Rng rng(seed);
  std::vector<TuneJob> jobs;
  for (int fold = 0; fold < folds.k; ++fold)
    for (int size : sizes)
      for (int rep = 0; rep < repeats_per_fold; ++rep)
        jobs.push_back(TuneJob{fold, size, rep});

  // per job, one rmse per grid point; jobs run in parallel, grid serial
  std::vector<std::vector<double>> job_rmse(jobs.size());
  const StationWeights uniform;

  parallel_for(jobs.size(), workers, [&](size_t ji) {
    const TuneJob& job = jobs[ji];
    Rng job_rng = rng.fork(Rng::mix(job.fold * 1000003 + job.size, job.repeat));

    const int val_fold = (job.fold + 1) % folds.k;
    const auto train_days = folds.days_not_in({job.fold, val_fold});
    const auto val_days = folds.days_of_fold(val_fold);
    const auto test_days = folds.days_of_fold(job.fold);

    FeatureSchema schema;
    {
      auto picks = job_rng.sample_without_replacement(table.stations.size(),
                                                      job.size);
      std::sort(picks.begin(), picks.end());
      schema.predictor_stations = picks;
    }

    Rng inst_rng = job_rng.fork(1);
    const InstanceSet train_set =
        build_masked_instances(table, train_days, schema, inst_rng);
    const InstanceSet val_set =
        build_masked_instances(table, val_days, schema, inst_rng);
    const InstanceSet test_set = build_test_instances(table, test_days, schema);
    if (train_set.count == 0 || val_set.count == 0 || test_set.count == 0)
      throw DataError("tune: empty instance set for fold " +
                      std::to_string(job.fold));

    const MatrixView xt{train_set.features.data(), train_set.count,
                        schema.nfeatures()};
    const MatrixView xv{val_set.features.data(), val_set.count,
                        schema.nfeatures()};

    job_rmse[ji].resize(grid.size());
    for (size_t g = 0; g < grid.size(); ++g) {
      GbtParams params = base;
      params.learning_rate = grid[g].learning_rate;
      params.max_depth = grid[g].max_depth;
      params.subsample = grid[g].subsample;
      const TreeEnsemble model =
          train_gbt(xt, train_set.target, xv, val_set.target, params,
                    job_rng.fork(100 + g).seed());
      std::vector<double> preds(test_set.count);
      for (size_t i = 0; i < test_set.count; ++i)
        preds[i] = model.predict(test_set.row(i), schema.nfeatures());
      job_rmse[ji][g] = removal_objective(preds, test_set.target, test_set.refs,
                                          table.stations, uniform);
    }
  });

  TuneResult result;
  for (size_t ji = 0; ji < jobs.size(); ++ji) {
    for (size_t g = 0; g < grid.size(); ++g) {
      result.rows.push_back(GridResultRow{jobs[ji].size, grid[g], jobs[ji].fold,
                                          job_rmse[ji][g]});
    }
  }

  // winner per size: lowest mean scaled RMSE across folds (and repeats);
  // ties resolve to the earliest grid point
  for (int size : sizes) {
    std::vector<double> mean(grid.size(), 0.0);
    std::vector<size_t> n(grid.size(), 0);
    for (const auto& row : result.rows) {
      if (row.subset_size != size) continue;
      for (size_t g = 0; g < grid.size(); ++g) {
        if (grid[g].learning_rate == row.point.learning_rate &&
            grid[g].max_depth == row.point.max_depth &&
            grid[g].subsample == row.point.subsample) {
          mean[g] += row.rmse_scaled;
          ++n[g];
        }
      }
    }
    size_t best = 0;
    double best_mean = std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < grid.size(); ++g) {
      const double m = mean[g] / static_cast<double>(n[g]);
      if (m < best_mean) {
        best_mean = m;
        best = g;
      }
    }
    GbtParams params = base;
    params.learning_rate = grid[best].learning_rate;
    params.max_depth = grid[best].max_depth;
    params.subsample = grid[best].subsample;
    result.best_by_size[size] = params;
  }
  return result;
}

void write_grid_results(const std::string& path,
                        const std::vector<GridResultRow>& rows,
                        const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.row({"size", "learning_rate", "max_depth", "subsample", "fold",
         "rmse_scaled"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.subset_size), format_double(r.point.learning_rate),
           std::to_string(r.point.max_depth), format_double(r.point.subsample),
           std::to_string(r.fold), format_double(r.rmse_scaled)});
  }
  w.close();
}

void write_best_params(const std::string& path,
                       const std::map<int, GbtParams>& best,
                       const std::string& manifest_line) {
  nlohmann::json j;
  if (!manifest_line.empty()) j["manifest"] = manifest_line;
  auto& arr = j["best_by_size"] = nlohmann::json::array();
  for (const auto& [size, p] : best) {
    arr.push_back({{"size", size},
                   {"learning_rate", p.learning_rate},
                   {"max_depth", p.max_depth},
                   {"subsample", p.subsample},
                   {"early_stopping_rounds", p.early_stopping_rounds},
                   {"max_rounds", p.max_rounds},
                   {"leaf_regularization", p.leaf_regularization},
                   {"min_split_gain", p.min_split_gain},
                   {"histogram_mode", p.histogram_mode},
                   {"histogram_bins", p.histogram_bins}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

std::map<int, GbtParams> read_best_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  std::map<int, GbtParams> out;
  for (const auto& e : j.at("best_by_size")) {
    GbtParams p;
    p.learning_rate = e.at("learning_rate").get<double>();
    p.max_depth = e.at("max_depth").get<int>();
    p.subsample = e.at("subsample").get<double>();
    p.early_stopping_rounds = e.at("early_stopping_rounds").get<int>();
    p.max_rounds = e.at("max_rounds").get<int>();
    p.leaf_regularization = e.at("leaf_regularization").get<double>();
    p.min_split_gain = e.at("min_split_gain").get<double>();
    p.histogram_mode = e.at("histogram_mode").get<bool>();
    p.histogram_bins = e.at("histogram_bins").get<int>();
    out[e.at("size").get<int>()] = p;
  }
  return out;
}

}  // namespace wsnthin
