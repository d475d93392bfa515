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

#include "wsnthin/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"

namespace wsnthin {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

size_t WideTable::row_of(Instant t) const {
  if (timestamps.empty() || t < timestamps.front() || t > timestamps.back())
    return SIZE_MAX;
  const int64_t off = t - timestamps.front();
  if (off % cadence_s != 0) return SIZE_MAX;
  return static_cast<size_t>(off / cadence_s);
}

size_t WideTable::station_index(const std::string& id) const {
  for (size_t i = 0; i < stations.size(); ++i)
    if (stations[i].id == id) return i;
  throw DataError("unknown station id: " + id);
}

WideTable build_wide_table(const SeriesMap& cleaned,
                           const std::vector<StationMeta>& stations,
                           const TimeRange& full_period,
                           const TimeRange& train_period, int64_t cadence_s) {
  if (full_period.empty()) throw ConfigError("empty table period");
  WideTable table;
  table.cadence_s = cadence_s;
  table.stations = stations;
  std::sort(table.stations.begin(), table.stations.end(),
            [](const StationMeta& a, const StationMeta& b) { return a.id < b.id; });
  table.train_period = train_period;

  const size_t nrows =
      static_cast<size_t>((full_period.end - full_period.start) / cadence_s);
  table.timestamps.resize(nrows);
  for (size_t r = 0; r < nrows; ++r)
    table.timestamps[r] = full_period.start + static_cast<int64_t>(r) * cadence_s;
  table.cells.assign(nrows * table.ncols(), missing_value());

  for (size_t si = 0; si < table.stations.size(); ++si) {
    for (Variable v : {Variable::Ta, Variable::E}) {
      const auto it = cleaned.find(SeriesKey{table.stations[si].id, v});
      if (it == cleaned.end()) continue;
      const TimeSeries& s = it->second;
      const size_t col = WideTable::col_of(si, v);
      for (size_t i = 0; i < s.size(); ++i) {
        if (!full_period.contains(s.t[i])) continue;
        const size_t row = table.row_of(s.t[i]);
        if (row == SIZE_MAX)
          throw DataError("sample for " + table.stations[si].id +
                          " not aligned to the table cadence at " +
                          format_instant(s.t[i]));
        table.cell(row, col) = s.v[i];
      }
    }
  }

  // Scaling parameters from training rows only, then scale everything.
  table.scale.resize(table.ncols());
  for (size_t col = 0; col < table.ncols(); ++col) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < nrows; ++r) {
      if (!train_period.contains(table.timestamps[r])) continue;
      const double x = table.cell(r, col);
      if (is_missing(x)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (!(hi > lo)) {
      const auto& st = table.stations[col / 2];
      throw ConfigError("column " + st.id + "." +
                        variable_name(col % 2 ? Variable::E : Variable::Ta) +
                        " is constant or empty over the training period");
    }
    table.scale[col] = ScaleParams{lo, hi};
    for (size_t r = 0; r < nrows; ++r) {
      double& x = table.cell(r, col);
      if (!is_missing(x)) x = table.scale[col].scale(x);
    }
  }
  return table;
}

std::vector<int64_t> FoldAssignment::days_of_fold(int fold) const {
  std::vector<int64_t> out;
  for (const auto& [day, f] : fold_of_day)
    if (f == fold) out.push_back(day);
  return out;
}

std::vector<int64_t> FoldAssignment::days_not_in(const std::set<int>& folds) const {
  std::vector<int64_t> out;
  for (const auto& [day, f] : fold_of_day)
    if (!folds.count(f)) out.push_back(day);
  return out;
}

int FoldAssignment::fold_of(Instant t) const {
  const auto it = fold_of_day.find(day_index(t));
  return it == fold_of_day.end() ? -1 : it->second;
}

FoldAssignment make_folds_for_days(const WideTable& table,
                                   const std::vector<int64_t>& days, int k,
                                   uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be >= 2");
  if (days.size() < static_cast<size_t>(k))
    throw DataError("need at least " + std::to_string(k) +
                    " days with data to build folds, have " +
                    std::to_string(days.size()));

  // Network-mean daily Ta in physical units, the stratification key.
  std::vector<std::pair<double, int64_t>> keyed;
  keyed.reserve(days.size());
  for (int64_t day : days) {
    double sum = 0.0;
    size_t n = 0;
    for (size_t r = 0; r < table.nrows(); ++r) {
      if (day_index(table.timestamps[r]) != day) continue;
      for (size_t si = 0; si < table.stations.size(); ++si) {
        const size_t col = WideTable::col_of(si, Variable::Ta);
        const double x = table.cell(r, col);
        if (is_missing(x)) continue;
        sum += table.scale[col].unscale(x);
        ++n;
      }
    }
    if (n == 0) continue;  // a day with no Ta data cannot be stratified
    keyed.emplace_back(sum / static_cast<double>(n), day);
  }
  if (keyed.size() < static_cast<size_t>(k))
    throw DataError("fewer than k days with Ta data");
  std::sort(keyed.begin(), keyed.end());

  Rng rng(seed);
  FoldAssignment fa;
  fa.k = k;
  std::vector<int> labels(k);
  for (size_t start = 0; start < keyed.size(); start += k) {
    const size_t len = std::min(static_cast<size_t>(k), keyed.size() - start);
    for (int i = 0; i < k; ++i) labels[i] = i;
    rng.shuffle(labels);
    for (size_t i = 0; i < len; ++i)
      fa.fold_of_day[keyed[start + i].second] = labels[i];
  }
  return fa;
}

FoldAssignment make_folds(const WideTable& table, int k, uint64_t seed) {
  std::set<int64_t> days;
  for (size_t r = 0; r < table.nrows(); ++r) {
    for (size_t si = 0; si < table.stations.size(); ++si) {
      if (table.present(r, WideTable::col_of(si, Variable::Ta))) {
        days.insert(day_index(table.timestamps[r]));
        break;
      }
    }
  }
  return make_folds_for_days(table, {days.begin(), days.end()}, k, seed);
}

ExternalPredictors encode_externals(Instant t) {
  ExternalPredictors e{};
  const double tod = kTwoPi * minute_of_day(t) / 1440.0;
  const double doy = kTwoPi * static_cast<double>(day_of_year(t)) / 365.25;
  e.tod_sin = std::sin(tod);
  e.tod_cos = std::cos(tod);
  e.doy_sin = std::sin(doy);
  e.doy_cos = std::cos(doy);
  return e;
}

std::vector<size_t> draw_target_stations(const std::vector<size_t>& available,
                                         Rng& rng) {
  if (available.empty()) return {};
  const uint64_t cap = std::max<uint64_t>(1, available.size() / 4);
  const size_t n = static_cast<size_t>(1 + rng.below(cap));
  std::vector<size_t> picks = rng.sample_without_replacement(available.size(), n);
  std::vector<size_t> out;
  out.reserve(picks.size());
  for (size_t p : picks) out.push_back(available[p]);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void append_features(const WideTable& table, size_t row,
                     const FeatureSchema& schema,
                     const std::vector<char>& masked_station,
                     const ExternalPredictors& ext, const StationMeta& target,
                     Variable target_var, std::vector<double>& out) {
  for (size_t p : schema.predictor_stations) {
    if (masked_station[p]) {
      out.push_back(missing_value());
      out.push_back(missing_value());
    } else {
      out.push_back(table.cell(row, WideTable::col_of(p, Variable::Ta)));
      out.push_back(table.cell(row, WideTable::col_of(p, Variable::E)));
    }
  }
  out.push_back(ext.tod_sin);
  out.push_back(ext.tod_cos);
  out.push_back(ext.doy_sin);
  out.push_back(ext.doy_cos);
  out.push_back(target.svf);
  out.push_back(target.elevation);
  out.push_back(target.latitude);
  out.push_back(target.longitude);
  out.push_back(target_var == Variable::E ? 1.0 : 0.0);
}

std::vector<size_t> rows_of_days(const WideTable& table,
                                 const std::vector<int64_t>& days) {
  std::set<int64_t> dayset(days.begin(), days.end());
  std::vector<size_t> rows;
  for (size_t r = 0; r < table.nrows(); ++r)
    if (dayset.count(day_index(table.timestamps[r]))) rows.push_back(r);
  return rows;
}

}  // namespace

InstanceSet build_masked_instances(const WideTable& table,
                                   const std::vector<int64_t>& days,
                                   const FeatureSchema& schema, Rng& rng) {
  InstanceSet set;
  set.schema = schema;
  std::vector<char> masked(table.stations.size(), 0);

  for (size_t row : rows_of_days(table, days)) {
    std::vector<size_t> available;
    for (size_t si = 0; si < table.stations.size(); ++si)
      if (table.station_has_data(row, si)) available.push_back(si);
    if (available.empty()) continue;

    const std::vector<size_t> targets = draw_target_stations(available, rng);
    std::fill(masked.begin(), masked.end(), 0);
    for (size_t s : targets) masked[s] = 1;
    const ExternalPredictors ext = encode_externals(table.timestamps[row]);

    for (size_t s : targets) {
      for (Variable v : {Variable::Ta, Variable::E}) {
        const double y = table.cell(row, WideTable::col_of(s, v));
        if (is_missing(y)) continue;
        append_features(table, row, schema, masked, ext, table.stations[s], v,
                        set.features);
        set.target.push_back(y);
        set.refs.push_back(InstanceRef{table.timestamps[row],
                                       static_cast<uint32_t>(s), v});
        ++set.count;
      }
    }
  }
  return set;
}

InstanceSet build_test_instances(const WideTable& table,
                                 const std::vector<int64_t>& days,
                                 const FeatureSchema& schema,
                                 const std::vector<size_t>& extra_masked) {
  InstanceSet set;
  set.schema = schema;
  std::vector<char> masked(table.stations.size(), 0);

  for (size_t row : rows_of_days(table, days)) {
    const ExternalPredictors ext = encode_externals(table.timestamps[row]);
    for (size_t s = 0; s < table.stations.size(); ++s) {
      bool any = false;
      for (Variable v : {Variable::Ta, Variable::E})
        if (!is_missing(table.cell(row, WideTable::col_of(s, v)))) any = true;
      if (!any) continue;

      std::fill(masked.begin(), masked.end(), 0);
      for (size_t m : extra_masked) masked[m] = 1;
      masked[s] = 1;

      for (Variable v : {Variable::Ta, Variable::E}) {
        const double y = table.cell(row, WideTable::col_of(s, v));
        if (is_missing(y)) continue;
        append_features(table, row, schema, masked, ext, table.stations[s], v,
                        set.features);
        set.target.push_back(y);
        set.refs.push_back(InstanceRef{table.timestamps[row],
                                       static_cast<uint32_t>(s), v});
        ++set.count;
      }
    }
  }
  return set;
}

void save_wide_table(const WideTable& table, const std::string& cells_path,
                     const std::string& meta_path,
                     const std::string& manifest_line) {
  nlohmann::json meta;
  meta["cadence_s"] = table.cadence_s;
  meta["train_period"] = {{"start", format_instant(table.train_period.start)},
                          {"end", format_instant(table.train_period.end)}};
  if (!manifest_line.empty()) meta["manifest"] = manifest_line;
  auto& stations = meta["stations"] = nlohmann::json::array();
  for (const auto& s : table.stations) {
    stations.push_back({{"id", s.id},
                        {"lat", s.latitude},
                        {"lon", s.longitude},
                        {"elevation", s.elevation},
                        {"svf", s.svf},
                        {"class", station_class_name(s.cls)}});
  }
  auto& scale = meta["scale"] = nlohmann::json::array();
  for (const auto& sp : table.scale)
    scale.push_back({{"min", sp.min}, {"max", sp.max}});

  std::ofstream mf(meta_path);
  if (!mf) throw DataError("cannot open for writing: " + meta_path);
  mf << meta.dump(2) << "\n";

  CsvWriter w(cells_path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  std::vector<std::string> header{"timestamp"};
  for (const auto& s : table.stations) {
    header.push_back(s.id + ".Ta");
    header.push_back(s.id + ".e");
  }
  w.row(header);
  std::vector<std::string> fields;
  for (size_t r = 0; r < table.nrows(); ++r) {
    fields.clear();
    fields.push_back(format_instant(table.timestamps[r]));
    for (size_t c = 0; c < table.ncols(); ++c) {
      const double x = table.cell(r, c);
      fields.push_back(is_missing(x) ? std::string() : format_double(x));
    }
    w.row(fields);
  }
  w.close();
}

WideTable load_wide_table(const std::string& cells_path,
                          const std::string& meta_path) {
  std::ifstream mf(meta_path);
  if (!mf) throw DataError("cannot open: " + meta_path);
  nlohmann::json meta = nlohmann::json::parse(mf);

  WideTable table;
  table.cadence_s = meta.at("cadence_s").get<int64_t>();
  table.train_period.start =
      parse_instant(meta.at("train_period").at("start").get<std::string>());
  table.train_period.end =
      parse_instant(meta.at("train_period").at("end").get<std::string>());
  for (const auto& j : meta.at("stations")) {
    StationMeta s;
    s.id = j.at("id").get<std::string>();
    s.latitude = j.at("lat").get<double>();
    s.longitude = j.at("lon").get<double>();
    s.elevation = j.at("elevation").get<double>();
    s.svf = j.at("svf").get<double>();
    s.cls = station_class_from_name(j.at("class").get<std::string>());
    table.stations.push_back(std::move(s));
  }
  for (const auto& j : meta.at("scale"))
    table.scale.push_back(ScaleParams{j.at("min").get<double>(), j.at("max").get<double>()});
  if (table.scale.size() != table.ncols())
    throw DataError(meta_path + ": scale/station count mismatch");

  CsvReader r(cells_path);
  r.read_header();
  if (r.header().size() != table.ncols() + 1)
    throw DataError(cells_path + ": column count mismatch with metadata");
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != table.ncols() + 1)
      throw DataError(cells_path + ": ragged row at line " +
                      std::to_string(r.line_number()));
    table.timestamps.push_back(parse_instant(f[0]));
    for (size_t c = 0; c < table.ncols(); ++c) {
      table.cells.push_back(f[c + 1].empty()
                                ? missing_value()
                                : parse_double(f[c + 1], cells_path));
    }
  }
  return table;
}

void save_folds(const FoldAssignment& folds, const std::string& path,
                const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.comment("k=" + std::to_string(folds.k));
  w.row({"date", "fold"});
  for (const auto& [day, f] : folds.fold_of_day)
    w.row({format_date(day * kSecondsPerDay), std::to_string(f)});
  w.close();
}

FoldAssignment load_folds(const std::string& path) {
  // k is recovered from the data; every fold is non-empty by construction.
  FoldAssignment fa;
  CsvReader r(path);
  r.read_header();
  std::vector<std::string> f;
  int maxf = 0;
  while (r.next(f)) {
    if (f.size() != 2) throw DataError(path + ": expected date,fold");
    const int fold = static_cast<int>(parse_long(f[1], path));
    fa.fold_of_day[day_index(parse_instant(f[0]))] = fold;
    maxf = std::max(maxf, fold);
  }
  fa.k = maxf + 1;
  return fa;
}

}  // namespace wsnthin
