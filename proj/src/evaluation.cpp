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

#include "wsnthin/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"
#include "wsnthin/threadpool.hpp"

namespace wsnthin {

std::string variant_name(RunVariant v) {
  switch (v) {
    case RunVariant::TrainToTrain: return "1->1";
    case RunVariant::TrainToEval: return "1->2";
    case RunVariant::BothToBoth: return "1,2->1,2";
  }
  return "?";
}

RunVariant variant_from_name(const std::string& name) {
  if (name == "1->1") return RunVariant::TrainToTrain;
  if (name == "1->2") return RunVariant::TrainToEval;
  if (name == "1,2->1,2") return RunVariant::BothToBoth;
  throw ConfigError("unknown run variant: '" + name + "'");
}

namespace {

std::vector<int64_t> days_with_data(const WideTable& table,
                                    const TimeRange& range) {
  std::set<int64_t> days;
  for (size_t r = 0; r < table.nrows(); ++r) {
    if (!range.contains(table.timestamps[r])) continue;
    for (size_t si = 0; si < table.stations.size(); ++si) {
      if (table.station_has_data(r, si)) {
        days.insert(day_index(table.timestamps[r]));
        break;
      }
    }
  }
  return {days.begin(), days.end()};
}

GbtParams final_params_for_size(const FinalFitOptions& opt, int size) {
  const auto it = opt.params_by_size.find(size);
  if (it != opt.params_by_size.end()) return it->second;
  if (opt.params_by_size.empty()) return opt.default_params;
  // nearest tuned size, ties to the larger
  auto best = opt.params_by_size.begin();
  long best_d = -1;
  for (auto jt = opt.params_by_size.begin(); jt != opt.params_by_size.end(); ++jt) {
    const long d = std::labs(static_cast<long>(jt->first) - size);
    if (best_d < 0 || d < best_d || (d == best_d && jt->first > best->first)) {
      best_d = d;
      best = jt;
    }
  }
  return best->second;
}

}  // namespace

std::vector<PredictionRecord> fit_final(
    const WideTable& table, const TimeRange& train_period,
    const TimeRange& eval_period, RunVariant variant,
    const std::map<int, std::map<int, std::vector<std::string>>>& subsets_by_fold,
    const FinalFitOptions& opt) {
  if (subsets_by_fold.empty()) throw DataError("fit_final: no subsets given");

  const TimeRange fold_range =
      variant == RunVariant::BothToBoth
          ? TimeRange{std::min(train_period.start, eval_period.start),
                      std::max(train_period.end, eval_period.end)}
          : train_period;
  const FoldAssignment folds = make_folds_for_days(
      table, days_with_data(table, fold_range), opt.folds_k, opt.fold_seed);

  const std::vector<int64_t> eval_days = days_with_data(table, eval_period);

  struct Job {
    int fold;
    int size;
  };
  std::vector<Job> jobs;
  for (int fold = 0; fold < folds.k; ++fold)
    for (int size : opt.sizes) jobs.push_back(Job{fold, size});

  std::vector<std::vector<PredictionRecord>> job_records(jobs.size());
  Rng rng(opt.model_seed);

  parallel_for(jobs.size(), opt.workers, [&](size_t ji) {
    const Job& job = jobs[ji];
    const int subset_fold =
        static_cast<int>(job.fold % static_cast<int>(subsets_by_fold.size()));
    const auto fold_it = subsets_by_fold.find(subset_fold);
    if (fold_it == subsets_by_fold.end())
      throw DataError("fit_final: no subsets for fold " +
                      std::to_string(subset_fold));
    const auto size_it = fold_it->second.find(job.size);
    if (size_it == fold_it->second.end())
      throw DataError("fit_final: no subset of size " + std::to_string(job.size));

    FeatureSchema schema;
    for (const auto& id : size_it->second)
      schema.predictor_stations.push_back(table.station_index(id));
    std::sort(schema.predictor_stations.begin(), schema.predictor_stations.end());

    const int val_fold = (job.fold + 1) % folds.k;
    const auto train_days = folds.days_not_in({job.fold, val_fold});
    const auto val_days = folds.days_of_fold(val_fold);

    Rng job_rng = rng.fork(Rng::mix(job.fold, job.size));
    Rng inst_rng = job_rng.fork(1);
    const InstanceSet train_set =
        build_masked_instances(table, train_days, schema, inst_rng);
    const InstanceSet val_set =
        build_masked_instances(table, val_days, schema, inst_rng);
    if (train_set.count == 0 || val_set.count == 0)
      throw DataError("fit_final: empty training instances");

    const MatrixView xt{train_set.features.data(), train_set.count,
                        schema.nfeatures()};
    const MatrixView xv{val_set.features.data(), val_set.count,
                        schema.nfeatures()};
    const GbtParams params = final_params_for_size(opt, job.size);
    const TreeEnsemble model = train_gbt(xt, train_set.target, xv,
                                         val_set.target, params,
                                         job_rng.fork(2).seed());
    if (!opt.save_models_dir.empty()) {
      model.save(opt.save_models_dir + "/model_f" + std::to_string(job.fold) +
                 "_s" + std::to_string(job.size) + ".json");
    }

    // Evaluation scope: held-out test fold for CV-style variants, the whole
    // evaluation period for temporal extrapolation.
    const std::vector<int64_t> test_days =
        variant == RunVariant::TrainToEval ? eval_days
                                           : folds.days_of_fold(job.fold);
    const InstanceSet test_set = build_test_instances(table, test_days, schema);

    auto& out = job_records[ji];
    out.reserve(test_set.count);
    for (size_t i = 0; i < test_set.count; ++i) {
      const double pred = model.predict(test_set.row(i), schema.nfeatures());
      out.push_back(PredictionRecord{job.fold, job.size, test_set.refs[i].station,
                                     test_set.refs[i].variable, test_set.refs[i].t,
                                     pred, test_set.target[i]});
    }
  });

  std::vector<PredictionRecord> records;
  for (auto& jr : job_records)
    records.insert(records.end(), jr.begin(), jr.end());
  return records;
}

MetricEntry compute_metrics(const std::vector<std::pair<double, double>>& pairs) {
  MetricEntry m;
  m.n = pairs.size();
  if (pairs.empty()) return m;
  double sse = 0.0, sae = 0.0, sd = 0.0, obs_sum = 0.0;
  for (const auto& [pred, obs] : pairs) {
    const double d = pred - obs;
    sse += d * d;
    sae += std::fabs(d);
    sd += d;
    obs_sum += obs;
  }
  const double n = static_cast<double>(pairs.size());
  m.rmse = std::sqrt(sse / n);
  m.mae = sae / n;
  m.mbe = sd / n;
  if (pairs.size() >= 2) {
    const double obs_mean = obs_sum / n;
    double ss_tot = 0.0;
    for (const auto& [pred, obs] : pairs) {
      (void)pred;
      ss_tot += (obs - obs_mean) * (obs - obs_mean);
    }
    if (ss_tot > 0.0) {
      m.r2 = 1.0 - sse / ss_tot;
      m.r2_valid = true;
    }
  }
  return m;
}

IndicatorCounts indicator_days(const TimeSeries& ta_physical,
                               const IndicatorCriteria& c) {
  struct DayAgg {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
  };
  std::map<int64_t, DayAgg> days;
  std::map<int64_t, double> night_min;  // keyed by the evening's date

  for (size_t i = 0; i < ta_physical.size(); ++i) {
    const Instant t = ta_physical.t[i];
    const double v = ta_physical.v[i];
    auto& d = days[day_index(t)];
    d.mn = std::min(d.mn, v);
    d.mx = std::max(d.mx, v);

    const int sod = second_of_day(t);
    bool in_night = false;
    int64_t night_day = 0;
    if (sod >= 18 * 3600) {
      in_night = true;
      night_day = day_index(t);
    } else if (sod < 6 * 3600) {
      in_night = true;
      night_day = day_index(t) - 1;  // window spans midnight
    }
    if (in_night) {
      auto [it, inserted] = night_min.emplace(night_day, v);
      if (!inserted) it->second = std::min(it->second, v);
    }
  }

  IndicatorCounts out;
  out.days_covered = static_cast<int>(days.size());
  out.nights_covered = static_cast<int>(night_min.size());
  for (const auto& [day, agg] : days) {
    if (agg.mx >= c.summer_max) ++out.summer;
    if (agg.mx >= c.hot_max) ++out.hot;
    if (agg.mx >= c.desert_max) ++out.desert;
    if (agg.mn < c.frost_min) ++out.frost;
    if (agg.mx < c.ice_max) ++out.ice;
  }
  for (const auto& [day, mn] : night_min) {
    if (mn >= c.tropical_min) ++out.tropical;
  }
  return out;
}

double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DataError("percentile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p / 100.0;
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::set<int64_t> find_hot_days(const WideTable& table, const SplitConfig& cfg) {
  // per (day, station) daily max of observed physical Ta
  std::map<int64_t, std::map<size_t, double>> daily_max;
  for (size_t r = 0; r < table.nrows(); ++r) {
    const int64_t day = day_index(table.timestamps[r]);
    for (size_t si = 0; si < table.stations.size(); ++si) {
      const size_t col = WideTable::col_of(si, Variable::Ta);
      const double x = table.cell(r, col);
      if (is_missing(x)) continue;
      const double phys = table.scale[col].unscale(x);
      auto [it, inserted] = daily_max[day].emplace(si, phys);
      if (!inserted) it->second = std::max(it->second, phys);
    }
  }
  std::set<int64_t> hot;
  for (const auto& [day, per_station] : daily_max) {
    if (per_station.empty()) continue;
    double sum = 0.0;
    for (const auto& [si, mx] : per_station) sum += mx;
    if (sum / static_cast<double>(per_station.size()) >= cfg.hot_day_threshold)
      hot.insert(day);
  }
  return hot;
}

std::vector<PercentileRow> error_splits(
    const std::vector<PredictionRecord>& records, const WideTable& table,
    const std::set<int64_t>& hot_days, const SplitConfig& cfg) {
  // group key: (size, day?, hot?) -> Ta errors in physical units
  std::map<std::tuple<int, bool, bool>, std::vector<double>> groups;
  for (const auto& rec : records) {
    if (rec.variable != Variable::Ta) continue;
    const size_t col = WideTable::col_of(rec.station, Variable::Ta);
    const double span = table.scale[col].max - table.scale[col].min;
    const double err = (rec.pred_scaled - rec.obs_scaled) * span;
    const int hour = hour_of_day(rec.t);
    const bool is_day = hour >= cfg.day_start_hour && hour < cfg.day_end_hour;
    const bool is_hot = hot_days.count(day_index(rec.t)) > 0;
    groups[{rec.size, is_day, false}].push_back(err);
    if (is_hot) groups[{rec.size, is_day, true}].push_back(err);
  }

  std::vector<PercentileRow> rows;
  for (auto& [key, errs] : groups) {
    std::sort(errs.begin(), errs.end());
    PercentileRow row;
    row.size = std::get<0>(key);
    row.period = std::get<1>(key) ? "day" : "night";
    row.condition = std::get<2>(key) ? "hot" : "all";
    row.p1 = percentile_sorted(errs, 1.0);
    row.p5 = percentile_sorted(errs, 5.0);
    row.p50 = percentile_sorted(errs, 50.0);
    row.p95 = percentile_sorted(errs, 95.0);
    row.p99 = percentile_sorted(errs, 99.0);
    row.n = errs.size();
    rows.push_back(row);
  }
  return rows;
}

std::vector<BiasSeries> bias_timeseries(
    const std::vector<PredictionRecord>& records, const WideTable& table) {
  // accumulate mean Ta error per (station, row) across folds
  std::map<size_t, std::map<size_t, std::pair<double, size_t>>> acc;
  for (const auto& rec : records) {
    if (rec.variable != Variable::Ta) continue;
    const size_t row = table.row_of(rec.t);
    if (row == SIZE_MAX) continue;
    const size_t col = WideTable::col_of(rec.station, Variable::Ta);
    const double span = table.scale[col].max - table.scale[col].min;
    const double err = (rec.pred_scaled - rec.obs_scaled) * span;
    auto& slot = acc[rec.station][row];
    slot.first += err;
    slot.second += 1;
  }

  // centered 7-day window on the 10-min grid
  const int64_t half_slots = (7 * kSecondsPerDay / 2) / table.cadence_s;
  const double denom = static_cast<double>(2 * half_slots + 1);

  std::vector<BiasSeries> out;
  for (const auto& [station, rows] : acc) {
    BiasSeries bs;
    bs.station = table.stations[station].id;
    const size_t first = rows.begin()->first;
    const size_t last = rows.rbegin()->first;
    const size_t n = last - first + 1;
    bs.t.resize(n);
    bs.err.assign(n, missing_value());
    for (size_t i = 0; i < n; ++i) bs.t[i] = table.timestamps[first + i];
    for (const auto& [row, sum_cnt] : rows)
      bs.err[row - first] = sum_cnt.first / static_cast<double>(sum_cnt.second);

    // prefix sums over available errors for O(1) windows
    std::vector<double> csum(n + 1, 0.0);
    std::vector<size_t> ccnt(n + 1, 0);
    for (size_t i = 0; i < n; ++i) {
      csum[i + 1] = csum[i] + (is_missing(bs.err[i]) ? 0.0 : bs.err[i]);
      ccnt[i + 1] = ccnt[i] + (is_missing(bs.err[i]) ? 0 : 1);
    }
    bs.ma7.assign(n, missing_value());
    for (size_t i = 0; i < n; ++i) {
      const size_t lo = i >= static_cast<size_t>(half_slots)
                            ? i - static_cast<size_t>(half_slots)
                            : 0;
      const size_t hi = std::min(n - 1, i + static_cast<size_t>(half_slots));
      const size_t cnt = ccnt[hi + 1] - ccnt[lo];
      if (static_cast<double>(cnt) >= 0.1 * denom)
        bs.ma7[i] = (csum[hi + 1] - csum[lo]) / static_cast<double>(cnt);
    }
    out.push_back(std::move(bs));
  }
  return out;
}

void write_predictions(const std::string& path, RunVariant variant,
                       const std::vector<PredictionRecord>& records,
                       const WideTable& table,
                       const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.comment("variant=" + variant_name(variant));
  w.row({"fold", "size", "station", "variable", "timestamp", "pred_scaled",
         "obs_scaled"});
  for (const auto& r : records) {
    w.row({std::to_string(r.fold), std::to_string(r.size),
           table.stations[r.station].id, variable_name(r.variable),
           format_instant(r.t), format_double(r.pred_scaled),
           format_double(r.obs_scaled)});
  }
  w.close();
}

std::vector<PredictionRecord> read_predictions(const std::string& path,
                                               const WideTable& table,
                                               RunVariant* variant_out) {
  // the variant comment is a '#' line; recover it by scanning the raw file
  if (variant_out) {
    std::ifstream probe(path);
    std::string line;
    *variant_out = RunVariant::TrainToEval;
    while (std::getline(probe, line)) {
      const std::string tag = "# variant=";
      if (line.rfind(tag, 0) == 0) {
        *variant_out = variant_from_name(line.substr(tag.size()));
        break;
      }
      if (!line.empty() && line[0] != '#') break;
    }
  }
  CsvReader r(path);
  r.read_header();
  std::vector<PredictionRecord> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 7) throw DataError(path + ": expected 7 fields");
    PredictionRecord rec;
    rec.fold = static_cast<int>(parse_long(f[0], path));
    rec.size = static_cast<int>(parse_long(f[1], path));
    rec.station = static_cast<uint32_t>(table.station_index(f[2]));
    rec.variable = variable_from_name(f[3]);
    rec.t = parse_instant(f[4]);
    rec.pred_scaled = parse_double(f[5], path);
    rec.obs_scaled = parse_double(f[6], path);
    out.push_back(rec);
  }
  return out;
}

}  // namespace wsnthin
