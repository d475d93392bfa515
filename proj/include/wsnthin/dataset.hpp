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

#ifndef WSNTHIN_DATASET_HPP_
#define WSNTHIN_DATASET_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsnthin/rng.hpp"
#include "wsnthin/series.hpp"

namespace wsnthin {

inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double x) { return std::isnan(x); }

struct ScaleParams {
  double min = 0.0;
  double max = 1.0;
  double scale(double x) const { return (x - min) / (max - min); }
  double unscale(double x) const { return min + x * (max - min); }
};

// Wide-format table: one row per 10-min timestamp, two columns per station
// (Ta then e), cells stored scaled to the training-period [0,1] mapping.
// Evaluation-period cells may legitimately fall outside [0,1].
class WideTable {
 public:
  int64_t cadence_s = 600;
  std::vector<Instant> timestamps;       // regular grid, ascending
  std::vector<StationMeta> stations;     // sorted by id
  std::vector<double> cells;             // rows x ncols, NaN = missing
  std::vector<ScaleParams> scale;        // per column
  TimeRange train_period;

  size_t nrows() const { return timestamps.size(); }
  size_t ncols() const { return stations.size() * 2; }
  static size_t col_of(size_t station_idx, Variable v) {
    return station_idx * 2 + (v == Variable::E ? 1 : 0);
  }
  double cell(size_t row, size_t col) const { return cells[row * ncols() + col]; }
  double& cell(size_t row, size_t col) { return cells[row * ncols() + col]; }
  bool present(size_t row, size_t col) const { return !is_missing(cell(row, col)); }

  // Row index of instant t, or SIZE_MAX when off-grid.
  size_t row_of(Instant t) const;
  size_t station_index(const std::string& id) const;  // throws DataError

  bool station_has_data(size_t row, size_t station_idx) const {
    return present(row, col_of(station_idx, Variable::Ta)) ||
           present(row, col_of(station_idx, Variable::E));
  }
};

// Assembles the wide table from cleaned, 10-min Ta/e series. Scaling
// parameters come from training-period rows only; a column that is constant
// (or empty) over the training period is a configuration error naming the
// column. `full_period` spans training plus evaluation.
WideTable build_wide_table(const SeriesMap& cleaned,
                           const std::vector<StationMeta>& stations,
                           const TimeRange& full_period,
                           const TimeRange& train_period,
                           int64_t cadence_s = 600);

// Day-stratified fold assignment: days ranked by network-mean daily Ta,
// consecutive rank blocks of k days each donate one day per fold.
struct FoldAssignment {
  int k = 10;
  std::map<int64_t, int> fold_of_day;  // epoch-day -> fold

  std::vector<int64_t> days_of_fold(int fold) const;
  std::vector<int64_t> days_not_in(const std::set<int>& folds) const;
  int fold_of(Instant t) const;  // -1 when the day is unassigned
};

FoldAssignment make_folds(const WideTable& table, int k, uint64_t seed);
// Same stratification over an explicit day subset (used for fold generation
// restricted to one study period).
FoldAssignment make_folds_for_days(const WideTable& table,
                                   const std::vector<int64_t>& days, int k,
                                   uint64_t seed);

// Cyclic time encodings plus the target station's static attributes.
struct ExternalPredictors {
  double tod_sin, tod_cos;  // 2*pi*minutes/1440
  double doy_sin, doy_cos;  // 2*pi*doy/365.25
};
ExternalPredictors encode_externals(Instant t);

// Uniform n in {1, ..., max(1, floor(N/4))}, then n distinct stations from
// `available` (indices into table.stations, ascending order expected).
std::vector<size_t> draw_target_stations(const std::vector<size_t>& available,
                                         Rng& rng);

// Feature layout for one model: two columns per predictor station followed
// by [tod_sin, tod_cos, doy_sin, doy_cos, svf, elevation, lat, lon, var].
struct FeatureSchema {
  std::vector<size_t> predictor_stations;  // indices into table.stations
  size_t nfeatures() const { return predictor_stations.size() * 2 + 9; }
  size_t externals_offset() const { return predictor_stations.size() * 2; }
};

struct InstanceRef {
  Instant t;
  uint32_t station;  // index into table.stations (the target)
  Variable variable;
};

struct InstanceSet {
  FeatureSchema schema;
  size_t count = 0;
  std::vector<double> features;  // count x schema.nfeatures()
  std::vector<double> target;    // scaled
  std::vector<InstanceRef> refs;

  const double* row(size_t i) const { return &features[i * schema.nfeatures()]; }
};

// Train/validation instances: per timestamp, a random draw of target
// stations; one instance per (target station, variable) with an observed
// value; predictor cells of ALL drawn targets (both variables) are masked.
InstanceSet build_masked_instances(const WideTable& table,
                                   const std::vector<int64_t>& days,
                                   const FeatureSchema& schema, Rng& rng);

// Test instances: every observed (station, variable) cell in the given days
// becomes an instance; only that station's own predictor columns are masked.
// `extra_masked` stations (indices) are masked in every instance.
InstanceSet build_test_instances(const WideTable& table,
                                 const std::vector<int64_t>& days,
                                 const FeatureSchema& schema,
                                 const std::vector<size_t>& extra_masked = {});

// Wide-table persistence (CSV cells + JSON sidecar with stations/scaling).
void save_wide_table(const WideTable& table, const std::string& cells_path,
                     const std::string& meta_path,
                     const std::string& manifest_line);
WideTable load_wide_table(const std::string& cells_path,
                          const std::string& meta_path);

void save_folds(const FoldAssignment& folds, const std::string& path,
                const std::string& manifest_line);
FoldAssignment load_folds(const std::string& path);

}  // namespace wsnthin

#endif  // WSNTHIN_DATASET_HPP_
