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

#ifndef WSNTHIN_EVALUATION_HPP_
#define WSNTHIN_EVALUATION_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsnthin/dataset.hpp"
#include "wsnthin/gbt.hpp"
#include "wsnthin/thinning.hpp"

namespace wsnthin {

// Train/evaluation period pairing: year1 CV (gap-filling), year1 -> year2
// (temporal extrapolation), and CV over both years.
enum class RunVariant { TrainToTrain, TrainToEval, BothToBoth };

std::string variant_name(RunVariant v);
RunVariant variant_from_name(const std::string& name);

struct PredictionRecord {
  int fold;
  int size;
  uint32_t station;  // index into table.stations
  Variable variable; // Ta or e, scaled values below
  Instant t;
  double pred_scaled;
  double obs_scaled;
};

struct FinalFitOptions {
  std::vector<int> sizes;
  std::map<int, GbtParams> params_by_size;
  GbtParams default_params;
  int folds_k = 10;
  uint64_t fold_seed = 1;
  uint64_t model_seed = 2;
  int workers = 1;
  std::string save_models_dir;  // empty = don't persist models
};

// Trains the final models per variant with freshly drawn CV folds: for each
// (fold, size) a model with only the subset stations as predictors, while
// every station (including removed ones) stays a prediction target. Subsets
// are looked up by (fold % available folds, size).
std::vector<PredictionRecord> fit_final(
    const WideTable& table, const TimeRange& train_period,
    const TimeRange& eval_period, RunVariant variant,
    const std::map<int, std::map<int, std::vector<std::string>>>& subsets_by_fold,
    const FinalFitOptions& opt);

// ---------- metric kernels ----------

struct MetricEntry {
  double rmse = 0.0;
  double mae = 0.0;
  double mbe = 0.0;
  double r2 = 0.0;
  bool r2_valid = false;
  size_t n = 0;
};

// pairs are (prediction, observation) in physical units; d = pred - obs.
MetricEntry compute_metrics(const std::vector<std::pair<double, double>>& pairs);

struct IndicatorCriteria {
  double summer_max = 25.0;   // daily max >= threshold
  double hot_max = 30.0;
  double desert_max = 35.0;
  double frost_min = 0.0;     // daily min < threshold
  double ice_max = 0.0;       // daily max < threshold
  double tropical_min = 20.0; // 18-06 UTC min >= threshold
};

struct IndicatorCounts {
  int summer = 0, hot = 0, desert = 0, frost = 0, ice = 0, tropical = 0;
  int days_covered = 0;    // days with at least one sample (00-23 UTC)
  int nights_covered = 0;  // 18-06 UTC windows with at least one sample
};

// Counts indicator days on a physical-unit Ta series. Day-based criteria use
// 00-23 UTC; tropical nights use the 18:00-06:00 UTC window attributed to
// the evening's calendar date. Windows with partial coverage are evaluated
// on the available samples.
IndicatorCounts indicator_days(const TimeSeries& ta_physical,
                               const IndicatorCriteria& criteria);

struct SplitConfig {
  int day_start_hour = 6;   // [day_start, day_end) UTC counts as daytime
  int day_end_hour = 18;
  double hot_day_threshold = 30.0;  // network-mean daily max Ta
};

struct PercentileRow {
  int size;
  std::string period;     // "day" | "night"
  std::string condition;  // "all" | "hot"
  double p1, p5, p50, p95, p99;
  size_t n;
};

// Type-7 (linear interpolation) percentile of a sorted sample.
double percentile_sorted(const std::vector<double>& sorted, double p);

// Groups Ta errors by day/night and all/hot-condition per subset size.
// `hot_days` is the set of epoch-days qualifying as hot. Empty groups are
// omitted.
std::vector<PercentileRow> error_splits(
    const std::vector<PredictionRecord>& records, const WideTable& table,
    const std::set<int64_t>& hot_days, const SplitConfig& cfg);

// Epoch-days whose network-mean per-station daily max Ta (observed,
// physical) reaches cfg.hot_day_threshold.
std::set<int64_t> find_hot_days(const WideTable& table, const SplitConfig& cfg);

struct BiasSeries {
  std::string station;
  std::vector<Instant> t;
  std::vector<double> err;  // NaN where no prediction
  std::vector<double> ma7;  // centered 7-day moving average, NaN below 10% cover
};

// Per-station raw Ta errors (mean across folds when several models predict
// the same cell) plus the centered 7-day moving average.
std::vector<BiasSeries> bias_timeseries(
    const std::vector<PredictionRecord>& records, const WideTable& table);

// ---------- persistence ----------

void write_predictions(const std::string& path, RunVariant variant,
                       const std::vector<PredictionRecord>& records,
                       const WideTable& table,
                       const std::string& manifest_line);
std::vector<PredictionRecord> read_predictions(const std::string& path,
                                               const WideTable& table,
                                               RunVariant* variant_out);

}  // namespace wsnthin

#endif  // WSNTHIN_EVALUATION_HPP_
