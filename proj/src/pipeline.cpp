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

#include "wsnthin/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "wsnthin/baselines.hpp"
#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"

namespace wsnthin {

namespace fs = std::filesystem;

std::string version_string() { return "0.1.0"; }

namespace {

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string variant_slug(RunVariant v) {
  switch (v) {
    case RunVariant::TrainToTrain: return "1to1";
    case RunVariant::TrainToEval: return "1to2";
    case RunVariant::BothToBoth: return "12to12";
  }
  return "x";
}

// running metric accumulator; closed forms match compute_metrics()
struct MetricAcc {
  size_t n = 0;
  double sse = 0, sae = 0, sd = 0, obs_sum = 0, obs_sq = 0;
  void add(double pred, double obs) {
    const double d = pred - obs;
    ++n;
    sse += d * d;
    sae += std::fabs(d);
    sd += d;
    obs_sum += obs;
    obs_sq += obs * obs;
  }
  MetricEntry finish() const {
    MetricEntry m;
    m.n = n;
    if (n == 0) return m;
    const double dn = static_cast<double>(n);
    m.rmse = std::sqrt(sse / dn);
    m.mae = sae / dn;
    m.mbe = sd / dn;
    if (n >= 2) {
      const double ss_tot = obs_sq - obs_sum * obs_sum / dn;
      if (ss_tot > 0) {
        m.r2 = 1.0 - sse / ss_tot;
        m.r2_valid = true;
      }
    }
    return m;
  }
};

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {}

const std::vector<std::string>& Pipeline::stage_names() {
  static const std::vector<std::string> names{
      "simulate", "qc",       "build",    "tune",   "thin",
      "fit",      "evaluate", "baseline", "report"};
  return names;
}

std::string Pipeline::manifest_line() const {
  return "config_hash=" + hex64(cfg_.config_hash) +
         " master_seed=" + std::to_string(cfg_.seeds.master) +
         " version=" + version_string();
}

std::string Pipeline::out(const std::string& file) const {
  return cfg_.out_dir + "/" + file;
}

void Pipeline::require(const std::string& path,
                       const std::string& producing_stage) const {
  if (!fs::exists(path))
    throw DataError("missing artifact " + path + "; run stage '" +
                    producing_stage + "' first");
}

void Pipeline::run_stage(const std::string& name) {
  fs::create_directories(cfg_.out_dir);
  if (name == "simulate") {
    stage_simulate();
  } else if (name == "qc") {
    stage_qc();
  } else if (name == "build") {
    stage_build();
  } else if (name == "tune") {
    stage_tune();
  } else if (name == "thin") {
    stage_thin();
  } else if (name == "fit") {
    stage_fit();
  } else if (name == "evaluate") {
    stage_evaluate();
  } else if (name == "baseline") {
    stage_baseline();
  } else if (name == "report") {
    stage_report();
  } else if (name == "run-all") {
    if (cfg_.has_scenario) stage_simulate();
    stage_qc();
    stage_build();
    stage_tune();
    stage_thin();
    stage_fit();
    stage_evaluate();
    if (cfg_.reference_stations.size() == 2 || cfg_.random_repeats > 0)
      stage_baseline();
    stage_report();
  } else {
    throw ConfigError("unknown stage '" + name + "'");
  }
}

void Pipeline::stage_simulate() {
  if (!cfg_.has_scenario)
    throw ConfigError("stage 'simulate' needs a scenario section in the config");
  const SynthOutput synth =
      generate_scenario(cfg_.scenario, cfg_.seeds.get("simulate"));
  write_observations_csv(cfg_.observations_path, synth.observed, manifest_line());
  write_observations_csv(out("truth.csv"), synth.truth, manifest_line());
  write_station_csv(cfg_.metadata_path, cfg_.scenario.stations, manifest_line());
}

void Pipeline::stage_qc() {
  require(cfg_.observations_path, "simulate");
  require(cfg_.metadata_path, "simulate");
  const SeriesMap raw = read_observations_csv(cfg_.observations_path);
  const std::vector<StationMeta> stations = read_station_csv(cfg_.metadata_path);

  SeriesMap cleaned;  // Ta and e at 10-min cadence
  std::vector<QcReportRow> report;
  for (const auto& st : stations) {
    TimeSeries ta_clean, rh_clean;
    for (Variable v : {Variable::Ta, Variable::RH}) {
      const auto it = raw.find(SeriesKey{st.id, v});
      const TimeSeries empty;
      const TimeSeries& s = it == raw.end() ? empty : it->second;
      const QcResult res = apply_qc(s, v, cfg_.qc, cfg_.exclusions, st.id);
      const double total = std::max<size_t>(1, res.counts.total);
      report.push_back({st.id, v, "range", res.counts.range,
                        res.counts.range / total});
      report.push_back({st.id, v, "rate", res.counts.rate, res.counts.rate / total});
      report.push_back({st.id, v, "persistence", res.counts.persistence,
                        res.counts.persistence / total});
      report.push_back({st.id, v, "manual", res.counts.manual,
                        res.counts.manual / total});
      (v == Variable::Ta ? ta_clean : rh_clean) = res.cleaned;
    }

    // vapor pressure where both cleaned samples coincide, then 10-min means
    TimeSeries e_raw;
    size_t i = 0, k = 0;
    while (i < ta_clean.size() && k < rh_clean.size()) {
      if (ta_clean.t[i] < rh_clean.t[k]) {
        ++i;
      } else if (ta_clean.t[i] > rh_clean.t[k]) {
        ++k;
      } else {
        e_raw.push(ta_clean.t[i], rh_to_e(rh_clean.v[k], ta_clean.v[i]));
        ++i;
        ++k;
      }
    }
    if (!ta_clean.empty())
      cleaned[SeriesKey{st.id, Variable::Ta}] = resample_10min(ta_clean);
    if (!e_raw.empty())
      cleaned[SeriesKey{st.id, Variable::E}] = resample_10min(e_raw);
  }
  write_observations_csv(out("cleaned.csv"), cleaned, manifest_line());
  write_qc_report(out("qc_report.csv"), report, manifest_line());
}

void Pipeline::stage_build() {
  require(out("cleaned.csv"), "qc");
  require(cfg_.metadata_path, "simulate");
  const SeriesMap cleaned = read_observations_csv(out("cleaned.csv"));
  const std::vector<StationMeta> stations = read_station_csv(cfg_.metadata_path);
  const TimeRange full{std::min(cfg_.train_period.start, cfg_.eval_period.start),
                       std::max(cfg_.train_period.end, cfg_.eval_period.end)};
  const WideTable table =
      build_wide_table(cleaned, stations, full, cfg_.train_period, cfg_.cadence_s);

  // folds over training-period days with data
  std::set<int64_t> train_days;
  for (size_t r = 0; r < table.nrows(); ++r) {
    if (!cfg_.train_period.contains(table.timestamps[r])) continue;
    for (size_t si = 0; si < table.stations.size(); ++si) {
      if (table.station_has_data(r, si)) {
        train_days.insert(day_index(table.timestamps[r]));
        break;
      }
    }
  }
  const FoldAssignment folds = make_folds_for_days(
      table, {train_days.begin(), train_days.end()}, cfg_.cv_folds,
      cfg_.seeds.get("folds"));

  save_wide_table(table, out("wide_table.csv"), out("wide_table_meta.json"),
                  manifest_line());
  save_folds(folds, out("folds.csv"), manifest_line());
}

void Pipeline::stage_tune() {
  require(out("wide_table.csv"), "build");
  require(out("folds.csv"), "build");
  const WideTable table =
      load_wide_table(out("wide_table.csv"), out("wide_table_meta.json"));
  const FoldAssignment folds = load_folds(out("folds.csv"));
  const TuneResult result =
      tune(table, folds, cfg_.subset_sizes, cfg_.grid, cfg_.gbt,
           cfg_.seeds.get("tuning"), cfg_.workers);
  write_grid_results(out("grid_results.csv"), result.rows, manifest_line());
  write_best_params(out("best_params.json"), result.best_by_size, manifest_line());
}

void Pipeline::stage_thin() {
  require(out("wide_table.csv"), "build");
  require(out("best_params.json"), "tune");
  const WideTable table =
      load_wide_table(out("wide_table.csv"), out("wide_table_meta.json"));
  const FoldAssignment folds = load_folds(out("folds.csv"));

  EliminationConfig ecfg;
  ecfg.retraining_points = cfg_.retraining_points;
  ecfg.step_size = cfg_.thin_step_size;
  ecfg.weights = cfg_.weights;
  ecfg.params_by_size = read_best_params(out("best_params.json"));
  ecfg.default_params = cfg_.gbt;
  ecfg.workers = cfg_.workers;

  // stations without data on a fold's test days never enter the objective;
  // surface that up front rather than silently averaging over fewer sites
  for (int fold = 0; fold < folds.k; ++fold) {
    const std::set<int64_t> test_days = [&] {
      const auto days = folds.days_of_fold(fold);
      return std::set<int64_t>(days.begin(), days.end());
    }();
    for (size_t si = 0; si < table.stations.size(); ++si) {
      bool any = false;
      for (size_t r = 0; r < table.nrows() && !any; ++r)
        if (test_days.count(day_index(table.timestamps[r])) &&
            table.station_has_data(r, si))
          any = true;
      if (!any)
        std::fprintf(stderr,
                     "[wsnthin] warning: station %s has no observations in "
                     "fold %d's test days; it is excluded from the removal "
                     "objective there\n",
                     table.stations[si].id.c_str(), fold);
    }
  }

  const uint64_t seed = cfg_.seeds.get("thinning");
  std::vector<RemovalSequence> seqs;
  nlohmann::json subsets_json;
  subsets_json["manifest"] = manifest_line();
  auto& per_fold = subsets_json["subsets"] = nlohmann::json::object();
  for (int fold = 0; fold < folds.k; ++fold) {
    RemovalSequence partial;
    RemovalSequence seq;
    try {
      seq = eliminate(table, folds, fold, ecfg, Rng::mix(seed, fold), nullptr,
                      &partial);
    } catch (...) {
      // persist whatever was decided before the failure, then re-raise
      seqs.push_back(partial);
      write_removal_sequences(out("removal_sequence.partial.csv"), seqs,
                              manifest_line());
      throw;
    }
    const auto subsets = extract_subsets(seq, cfg_.subset_sizes);
    nlohmann::json by_size = nlohmann::json::object();
    for (const auto& [size, ids] : subsets)
      by_size[std::to_string(size)] = ids;
    per_fold[std::to_string(fold)] = std::move(by_size);
    seqs.push_back(std::move(seq));
  }
  write_removal_sequences(out("removal_sequence.csv"), seqs, manifest_line());
  std::ofstream sf(out("subsets.json"));
  if (!sf) throw DataError("cannot open for writing: " + out("subsets.json"));
  sf << subsets_json.dump(2) << "\n";
}

namespace {

std::map<int, std::map<int, std::vector<std::string>>> load_subsets(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  std::map<int, std::map<int, std::vector<std::string>>> out;
  for (const auto& [fold_key, by_size] : j.at("subsets").items()) {
    const int fold = std::stoi(fold_key);
    for (const auto& [size_key, ids] : by_size.items()) {
      out[fold][std::stoi(size_key)] = ids.get<std::vector<std::string>>();
    }
  }
  return out;
}

}  // namespace

void Pipeline::stage_fit() {
  require(out("wide_table.csv"), "build");
  require(out("subsets.json"), "thin");
  require(out("best_params.json"), "tune");
  const WideTable table =
      load_wide_table(out("wide_table.csv"), out("wide_table_meta.json"));
  const auto subsets = load_subsets(out("subsets.json"));

  FinalFitOptions opt;
  opt.sizes = cfg_.subset_sizes;
  opt.params_by_size = read_best_params(out("best_params.json"));
  opt.default_params = cfg_.gbt;
  opt.folds_k = cfg_.cv_folds;
  opt.workers = cfg_.workers;
  if (cfg_.save_models) {
    fs::create_directories(out("models"));
  }

  for (RunVariant variant : cfg_.variants) {
    opt.fold_seed = Rng::mix(cfg_.seeds.get("final_folds"),
                             static_cast<uint64_t>(variant));
    opt.model_seed = Rng::mix(cfg_.seeds.get("final_fit"),
                              static_cast<uint64_t>(variant));
    opt.save_models_dir = cfg_.save_models
                              ? out("models/" + variant_slug(variant))
                              : std::string();
    if (!opt.save_models_dir.empty()) fs::create_directories(opt.save_models_dir);
    const auto records = fit_final(table, cfg_.train_period, cfg_.eval_period,
                                   variant, subsets, opt);
    write_predictions(out("predictions_" + variant_slug(variant) + ".csv"),
                      variant, records, table, manifest_line());
  }
}

void Pipeline::stage_evaluate() {
  require(out("wide_table.csv"), "build");
  const WideTable table =
      load_wide_table(out("wide_table.csv"), out("wide_table_meta.json"));
  const std::set<int64_t> hot_days = find_hot_days(table, cfg_.split);

  for (RunVariant variant : cfg_.variants) {
    const std::string slug = variant_slug(variant);
    const std::string pred_path = out("predictions_" + slug + ".csv");
    require(pred_path, "fit");
    const std::vector<PredictionRecord> records =
        read_predictions(pred_path, table, nullptr);

    // ---- station metrics in physical units (Ta, e, and derived RH) ----
    std::map<std::tuple<int, uint32_t, Variable>, MetricAcc> acc;
    for (const auto& r : records) {
      const size_t col = WideTable::col_of(r.station, r.variable);
      const double pred = table.scale[col].unscale(r.pred_scaled);
      const double obs = table.scale[col].unscale(r.obs_scaled);
      acc[{r.size, r.station, r.variable}].add(pred, obs);
    }
    // join Ta and e per (fold,size,station,t) for relative humidity
    {
      std::map<std::tuple<int, int, uint32_t, Instant>,
               std::pair<const PredictionRecord*, const PredictionRecord*>>
          cells;
      for (const auto& r : records) {
        auto& slot = cells[{r.fold, r.size, r.station, r.t}];
        (r.variable == Variable::Ta ? slot.first : slot.second) = &r;
      }
      for (const auto& [key, pair] : cells) {
        if (!pair.first || !pair.second) continue;
        const auto& rt = *pair.first;
        const auto& re = *pair.second;
        const size_t tcol = WideTable::col_of(rt.station, Variable::Ta);
        const size_t ecol = WideTable::col_of(re.station, Variable::E);
        const double ta_p = table.scale[tcol].unscale(rt.pred_scaled);
        const double ta_o = table.scale[tcol].unscale(rt.obs_scaled);
        const double e_p = table.scale[ecol].unscale(re.pred_scaled);
        const double e_o = table.scale[ecol].unscale(re.obs_scaled);
        // model output may stray slightly outside the physical domain, so
        // the ratio is taken directly rather than through e_to_rh
        const double rh_p = 100.0 * e_p / saturation_vapor_pressure(ta_p);
        const double rh_o = 100.0 * e_o / saturation_vapor_pressure(ta_o);
        acc[{rt.size, rt.station, Variable::RH}].add(rh_p, rh_o);
      }
    }

    CsvWriter mw(out("metrics_" + slug + ".csv"));
    mw.comment(manifest_line());
    mw.comment("variant=" + variant_name(variant));
    mw.row({"size", "station", "variable", "rmse", "mae", "r2", "mbe", "n"});
    // per-station rows plus the across-station network mean ("ALL")
    std::map<std::pair<int, Variable>, std::vector<MetricEntry>> network;
    for (const auto& [key, a] : acc) {
      const auto [size, station, var] = key;
      const MetricEntry m = a.finish();
      mw.row({std::to_string(size), table.stations[station].id,
              variable_name(var), format_double(m.rmse), format_double(m.mae),
              m.r2_valid ? format_double(m.r2) : std::string(),
              format_double(m.mbe), std::to_string(m.n)});
      network[{size, var}].push_back(m);
    }
    for (const auto& [key, entries] : network) {
      double rmse = 0, mae = 0, mbe = 0, r2 = 0;
      size_t n = 0, r2n = 0;
      for (const auto& m : entries) {
        rmse += m.rmse;
        mae += m.mae;
        mbe += m.mbe;
        n += m.n;
        if (m.r2_valid) {
          r2 += m.r2;
          ++r2n;
        }
      }
      const double k = static_cast<double>(entries.size());
      mw.row({std::to_string(key.first), "ALL", variable_name(key.second),
              format_double(rmse / k), format_double(mae / k),
              r2n ? format_double(r2 / static_cast<double>(r2n)) : std::string(),
              format_double(mbe / k), std::to_string(n)});
    }
    mw.close();

    // ---- climatic indicator days ----
    {
      // per (size, fold, station): predicted and observed Ta series
      std::map<std::tuple<int, int, uint32_t>, std::pair<TimeSeries, TimeSeries>>
          series;
      for (const auto& r : records) {
        if (r.variable != Variable::Ta) continue;
        const size_t col = WideTable::col_of(r.station, Variable::Ta);
        auto& slot = series[{r.size, r.fold, r.station}];
        slot.first.push(r.t, table.scale[col].unscale(r.pred_scaled));
        slot.second.push(r.t, table.scale[col].unscale(r.obs_scaled));
      }
      struct IndAgg {
        double pred[6] = {}, obs[6] = {};
        double days_covered = 0, nights_covered = 0;
        size_t n = 0;
      };
      std::map<int, IndAgg> by_size;
      for (auto& [key, pair] : series) {
        // records arrive sorted by fold model; enforce time order
        // (stations/timestamps interleave within a fold's output)
        auto sort_series = [](TimeSeries& s) {
          std::vector<size_t> idx(s.size());
          for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
          std::sort(idx.begin(), idx.end(),
                    [&](size_t a, size_t b) { return s.t[a] < s.t[b]; });
          TimeSeries sorted;
          for (size_t i : idx) sorted.push(s.t[i], s.v[i]);
          s = std::move(sorted);
        };
        sort_series(pair.first);
        sort_series(pair.second);
        const IndicatorCounts p = indicator_days(pair.first, cfg_.indicators);
        const IndicatorCounts o = indicator_days(pair.second, cfg_.indicators);
        IndAgg& agg = by_size[std::get<0>(key)];
        const int pv[6] = {p.summer, p.hot, p.desert, p.frost, p.ice, p.tropical};
        const int ov[6] = {o.summer, o.hot, o.desert, o.frost, o.ice, o.tropical};
        for (int i = 0; i < 6; ++i) {
          agg.pred[i] += pv[i];
          agg.obs[i] += ov[i];
        }
        agg.days_covered += o.days_covered;
        agg.nights_covered += o.nights_covered;
        ++agg.n;
      }
      static const char* kNames[6] = {"summer_days", "hot_days", "desert_days",
                                      "frost_days", "ice_days",
                                      "tropical_nights"};
      CsvWriter iw(out("indicators_" + slug + ".csv"));
      iw.comment(manifest_line());
      iw.row({"size", "indicator", "predicted_mean", "observed_mean",
              "relative_error_pct", "windows_covered_mean"});
      for (const auto& [size, agg] : by_size) {
        for (int i = 0; i < 6; ++i) {
          const double pm = agg.pred[i] / static_cast<double>(agg.n);
          const double om = agg.obs[i] / static_cast<double>(agg.n);
          const double rel = om != 0.0 ? 100.0 * (pm - om) / om : 0.0;
          const double cover =
              (i == 5 ? agg.nights_covered : agg.days_covered) /
              static_cast<double>(agg.n);
          iw.row({std::to_string(size), kNames[i], format_double(pm),
                  format_double(om), format_double(rel),
                  format_double(cover)});
        }
      }
      iw.close();
    }

    // ---- day/night x all/hot error percentiles ----
    {
      const auto rows = error_splits(records, table, hot_days, cfg_.split);
      CsvWriter pw(out("percentiles_" + slug + ".csv"));
      pw.comment(manifest_line());
      pw.row({"size", "period", "condition", "p1", "p5", "p50", "p95", "p99", "n"});
      for (const auto& r : rows) {
        pw.row({std::to_string(r.size), r.period, r.condition,
                format_double(r.p1), format_double(r.p5), format_double(r.p50),
                format_double(r.p95), format_double(r.p99), std::to_string(r.n)});
      }
      pw.close();
    }

    // ---- per-station bias series with 7-day moving average ----
    {
      std::vector<int> bias_sizes = cfg_.bias_sizes;
      if (bias_sizes.empty() && !cfg_.subset_sizes.empty())
        bias_sizes.push_back(
            *std::max_element(cfg_.subset_sizes.begin(), cfg_.subset_sizes.end()));
      CsvWriter bw(out("bias_" + slug + ".csv"));
      bw.comment(manifest_line());
      bw.row({"size", "station", "timestamp", "error", "ma7"});
      for (int size : bias_sizes) {
        std::vector<PredictionRecord> subset;
        for (const auto& r : records)
          if (r.size == size) subset.push_back(r);
        for (const auto& bs : bias_timeseries(subset, table)) {
          for (size_t i = 0; i < bs.t.size(); ++i) {
            if (is_missing(bs.err[i]) && is_missing(bs.ma7[i])) continue;
            bw.row({std::to_string(size), bs.station, format_instant(bs.t[i]),
                    is_missing(bs.err[i]) ? std::string()
                                          : format_double(bs.err[i]),
                    is_missing(bs.ma7[i]) ? std::string()
                                          : format_double(bs.ma7[i])});
          }
        }
      }
      bw.close();
    }
  }
}

void Pipeline::stage_baseline() {
  require(out("cleaned.csv"), "qc");
  require(cfg_.metadata_path, "simulate");
  const SeriesMap cleaned = read_observations_csv(out("cleaned.csv"));
  const std::vector<StationMeta> stations = read_station_csv(cfg_.metadata_path);

  // ---- GLM on two reference stations ----
  if (cfg_.reference_stations.size() == 2) {
    const std::string& ref1 = cfg_.reference_stations[0];
    const std::string& ref2 = cfg_.reference_stations[1];

    // physical 10-min series per station: Ta and derived RH
    std::map<std::string, std::map<Instant, double>> ta, rh;
    for (const auto& st : stations) {
      const auto ta_it = cleaned.find(SeriesKey{st.id, Variable::Ta});
      const auto e_it = cleaned.find(SeriesKey{st.id, Variable::E});
      if (ta_it != cleaned.end()) {
        for (size_t i = 0; i < ta_it->second.size(); ++i)
          ta[st.id][ta_it->second.t[i]] = ta_it->second.v[i];
      }
      if (ta_it != cleaned.end() && e_it != cleaned.end()) {
        size_t i = 0, k = 0;
        const TimeSeries& ts = ta_it->second;
        const TimeSeries& es = e_it->second;
        while (i < ts.size() && k < es.size()) {
          if (ts.t[i] < es.t[k]) {
            ++i;
          } else if (ts.t[i] > es.t[k]) {
            ++k;
          } else {
            rh[st.id][ts.t[i]] = e_to_rh(es.v[k], ts.v[i]);
            ++i;
            ++k;
          }
        }
      }
    }
    if (!ta.count(ref1) || !ta.count(ref2))
      throw ConfigError("reference stations " + ref1 + "/" + ref2 +
                        " not found in the cleaned data");

    std::vector<GlmModel> models;
    std::map<std::tuple<std::string, Variable>, MetricAcc> acc;
    struct RhTaPred {
      double rh = 0, ta = 0;
      bool has_rh = false, has_ta = false;
    };
    std::map<std::tuple<std::string, Instant>, RhTaPred> rh_pred_cells;

    for (Variable var : {Variable::Ta, Variable::RH}) {
      const auto& source = var == Variable::Ta ? ta : rh;
      for (const auto& st : stations) {
        if (st.id == ref1 || st.id == ref2) continue;
        const auto tgt_it = source.find(st.id);
        if (tgt_it == source.end()) continue;
        std::vector<double> y, x1v, x2v;
        for (const auto& [t, v] : tgt_it->second) {
          if (!cfg_.train_period.contains(t)) continue;
          const auto a = source.at(ref1).find(t);
          const auto b = source.at(ref2).find(t);
          if (a == source.at(ref1).end() || b == source.at(ref2).end()) continue;
          y.push_back(v);
          x1v.push_back(a->second);
          x2v.push_back(b->second);
        }
        if (y.size() < 5) continue;  // not fittable, skip with no model row
        GlmModel m = fit_glm(y, x1v, x2v);
        m.target_station = st.id;
        m.variable = var;
        m.x1_station = ref1;
        m.x2_station = ref2;
        models.push_back(m);

        for (const auto& [t, v] : tgt_it->second) {
          if (!cfg_.eval_period.contains(t)) continue;
          const auto a = source.at(ref1).find(t);
          const auto b = source.at(ref2).find(t);
          if (a == source.at(ref1).end() || b == source.at(ref2).end()) continue;
          const double pred = m.predict(a->second, b->second);
          acc[{st.id, var}].add(pred, v);
          auto& cell = rh_pred_cells[{st.id, t}];
          if (var == Variable::RH) {
            cell.rh = pred;
            cell.has_rh = true;
          } else {
            cell.ta = pred;
            cell.has_ta = true;
          }
        }
      }
    }

    // derived vapor pressure where both GLM predictions exist
    for (const auto& [key, preds] : rh_pred_cells) {
      if (!preds.has_rh || !preds.has_ta) continue;
      const auto& [station, t] = key;
      const auto rh_obs_it = rh.find(station);
      const auto ta_obs_it = ta.find(station);
      if (rh_obs_it == rh.end() || ta_obs_it == ta.end()) continue;
      const auto ro = rh_obs_it->second.find(t);
      const auto to = ta_obs_it->second.find(t);
      if (ro == rh_obs_it->second.end() || to == ta_obs_it->second.end()) continue;
      const double e_pred =
          preds.rh / 100.0 * saturation_vapor_pressure(preds.ta);
      const double e_obs =
          ro->second / 100.0 * saturation_vapor_pressure(to->second);
      acc[{station, Variable::E}].add(e_pred, e_obs);
    }

    write_glm_models(out("glm_models.csv"), models, manifest_line());
    CsvWriter gw(out("glm_metrics.csv"));
    gw.comment(manifest_line());
    gw.row({"station", "variable", "rmse", "mae", "r2", "mbe", "n"});
    std::map<Variable, std::vector<MetricEntry>> network;
    for (const auto& [key, a] : acc) {
      const MetricEntry m = a.finish();
      gw.row({std::get<0>(key), variable_name(std::get<1>(key)),
              format_double(m.rmse), format_double(m.mae),
              m.r2_valid ? format_double(m.r2) : std::string(),
              format_double(m.mbe), std::to_string(m.n)});
      network[std::get<1>(key)].push_back(m);
    }
    for (const auto& [var, entries] : network) {
      double rmse = 0, mae = 0, mbe = 0;
      size_t n = 0;
      for (const auto& m : entries) {
        rmse += m.rmse;
        mae += m.mae;
        mbe += m.mbe;
        n += m.n;
      }
      const double k = static_cast<double>(entries.size());
      gw.row({"ALL", variable_name(var), format_double(rmse / k),
              format_double(mae / k), std::string(), format_double(mbe / k),
              std::to_string(n)});
    }
    gw.close();
  }

  // ---- random-subset reference models ----
  if (cfg_.random_repeats > 0) {
    require(out("wide_table.csv"), "build");
    require(out("best_params.json"), "tune");
    const WideTable table =
        load_wide_table(out("wide_table.csv"), out("wide_table_meta.json"));

    FinalFitOptions opt;
    opt.sizes = cfg_.subset_sizes;
    opt.params_by_size = read_best_params(out("best_params.json"));
    opt.default_params = cfg_.gbt;
    opt.folds_k = cfg_.cv_folds;
    opt.workers = cfg_.workers;

    std::vector<std::string> ids;
    for (const auto& s : table.stations) ids.push_back(s.id);
    Rng rng(cfg_.seeds.get("baselines"));

    CsvWriter rw(out("baseline_random.csv"));
    rw.comment(manifest_line());
    rw.comment("variant=" + variant_name(cfg_.baseline_variant));
    rw.row({"repeat", "size", "variable", "rmse_network_mean", "stations"});
    for (int rep = 0; rep < cfg_.random_repeats; ++rep) {
      std::map<int, std::map<int, std::vector<std::string>>> subsets;
      for (int fold = 0; fold < cfg_.cv_folds; ++fold) {
        for (int size : cfg_.subset_sizes) {
          Rng draw = rng.fork(Rng::mix(rep * 1000 + fold, size));
          subsets[fold][size] = random_subsets(ids, size, 1, draw)[0];
        }
      }
      opt.fold_seed = Rng::mix(cfg_.seeds.get("final_folds"),
                               static_cast<uint64_t>(cfg_.baseline_variant));
      opt.model_seed = Rng::mix(cfg_.seeds.get("baselines"), 7000 + rep);
      const auto records = fit_final(table, cfg_.train_period, cfg_.eval_period,
                                     cfg_.baseline_variant, subsets, opt);

      // network-mean RMSE per size/variable (mean of station RMSEs)
      std::map<std::tuple<int, Variable, uint32_t>, MetricAcc> acc;
      for (const auto& r : records) {
        const size_t col = WideTable::col_of(r.station, r.variable);
        acc[{r.size, r.variable, r.station}].add(
            table.scale[col].unscale(r.pred_scaled),
            table.scale[col].unscale(r.obs_scaled));
      }
      std::map<std::pair<int, Variable>, std::pair<double, size_t>> mean;
      for (const auto& [key, a] : acc) {
        auto& slot = mean[{std::get<0>(key), std::get<1>(key)}];
        slot.first += a.finish().rmse;
        ++slot.second;
      }
      for (const auto& [key, sum_n] : mean) {
        rw.row({std::to_string(rep), std::to_string(key.first),
                variable_name(key.second),
                format_double(sum_n.first / static_cast<double>(sum_n.second)),
                std::to_string(sum_n.second)});
      }
    }
    rw.close();
  }
}

void Pipeline::stage_report() {
  // Table-1 shape: variable x metric rows across subset-size columns.
  const RunVariant table_variant =
      std::find(cfg_.variants.begin(), cfg_.variants.end(),
                RunVariant::TrainToEval) != cfg_.variants.end()
          ? RunVariant::TrainToEval
          : cfg_.variants.front();
  const std::string slug = variant_slug(table_variant);
  require(out("metrics_" + slug + ".csv"), "evaluate");

  std::vector<int> sizes = cfg_.subset_sizes;
  std::sort(sizes.rbegin(), sizes.rend());

  {
    CsvReader mr(out("metrics_" + slug + ".csv"));
    mr.read_header();
    // (variable, metric, size) -> value, network rows only
    std::map<std::tuple<std::string, std::string, int>, std::string> cells;
    std::vector<std::string> f;
    while (mr.next(f)) {
      if (f[1] != "ALL") continue;
      const int size = static_cast<int>(parse_long(f[0], "metrics"));
      cells[{f[2], "rmse", size}] = f[3];
      cells[{f[2], "mae", size}] = f[4];
      cells[{f[2], "r2", size}] = f[5];
      cells[{f[2], "mbe", size}] = f[6];
    }
    CsvWriter w(out("report_table1.csv"));
    w.comment(manifest_line());
    w.comment("variant=" + variant_name(table_variant));
    std::vector<std::string> header{"variable", "metric"};
    for (int s : sizes) header.push_back(std::to_string(s));
    w.row(header);
    for (const std::string var : {"Ta", "RH", "e"}) {
      for (const std::string metric : {"rmse", "mae", "r2", "mbe"}) {
        std::vector<std::string> row{var, metric};
        for (int s : sizes) {
          const auto it = cells.find({var, metric, s});
          row.push_back(it == cells.end() ? std::string() : it->second);
        }
        w.row(row);
      }
    }
    w.close();
  }

  // Table-2 shape: indicator rows across sizes.
  {
    require(out("indicators_" + slug + ".csv"), "evaluate");
    CsvReader ir(out("indicators_" + slug + ".csv"));
    ir.read_header();
    std::map<std::pair<std::string, int>, std::pair<std::string, std::string>>
        cells;  // (indicator, size) -> (predicted, rel_err)
    std::map<std::string, std::string> observed;
    std::vector<std::string> f;
    while (ir.next(f)) {
      const int size = static_cast<int>(parse_long(f[0], "indicators"));
      cells[{f[1], size}] = {f[2], f[4]};
      observed[f[1]] = f[3];
    }
    CsvWriter w(out("report_table2.csv"));
    w.comment(manifest_line());
    std::vector<std::string> header{"indicator", "observed"};
    for (int s : sizes) {
      header.push_back("pred_" + std::to_string(s));
      header.push_back("relerr_pct_" + std::to_string(s));
    }
    w.row(header);
    static const char* kNames[6] = {"summer_days", "hot_days", "desert_days",
                                    "frost_days", "ice_days", "tropical_nights"};
    for (const char* name : kNames) {
      std::vector<std::string> row{name, observed[name]};
      for (int s : sizes) {
        const auto it = cells.find({name, s});
        row.push_back(it == cells.end() ? std::string() : it->second.first);
        row.push_back(it == cells.end() ? std::string() : it->second.second);
      }
      w.row(row);
    }
    w.close();
  }

  // Removal order: per-station rank per fold plus the mean rank.
  {
    require(out("removal_sequence.csv"), "thin");
    CsvReader rr(out("removal_sequence.csv"));
    rr.read_header();
    std::map<std::string, std::map<int, int>> ranks;  // station -> fold -> rank
    std::map<int, int> steps_per_fold;
    std::vector<std::string> f;
    while (rr.next(f)) {
      const int fold = static_cast<int>(parse_long(f[0], "seq"));
      ranks[f[2]][fold] = ++steps_per_fold[fold];
    }
    int nfolds = 0;
    for (const auto& [fold, n] : steps_per_fold) nfolds = std::max(nfolds, fold + 1);
    // survivors get rank = removals + 1 in their fold
    std::set<std::string> all_ids;
    const auto meta = read_station_csv(cfg_.metadata_path);
    for (const auto& s : meta) all_ids.insert(s.id);
    std::vector<std::pair<double, std::string>> order;
    CsvWriter w(out("report_removal_order.csv"));
    w.comment(manifest_line());
    std::vector<std::string> header{"station", "mean_rank"};
    for (int fold = 0; fold < nfolds; ++fold)
      header.push_back("rank_fold" + std::to_string(fold));
    w.row(header);
    for (const auto& id : all_ids) {
      double sum = 0;
      std::vector<std::string> cols;
      for (int fold = 0; fold < nfolds; ++fold) {
        int rank = steps_per_fold[fold] + 1;
        const auto sit = ranks.find(id);
        if (sit != ranks.end()) {
          const auto fit = sit->second.find(fold);
          if (fit != sit->second.end()) rank = fit->second;
        }
        sum += rank;
        cols.push_back(std::to_string(rank));
      }
      order.emplace_back(sum / std::max(1, nfolds), id);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [mean_rank, id] : order) {
      std::vector<std::string> row{id, format_double(mean_rank)};
      for (int fold = 0; fold < nfolds; ++fold) {
        int rank = steps_per_fold[fold] + 1;
        const auto sit = ranks.find(id);
        if (sit != ranks.end()) {
          const auto fit = sit->second.find(fold);
          if (fit != sit->second.end()) rank = fit->second;
        }
        row.push_back(std::to_string(rank));
      }
      w.row(row);
    }
    w.close();
  }
}

}  // namespace wsnthin
