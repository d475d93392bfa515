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

#include "wsnthin/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "wsnthin/errors.hpp"
#include "wsnthin/rng.hpp"

namespace wsnthin {

using nlohmann::json;

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t Seeds::get(const std::string& name) const {
  const auto it = named.find(name);
  if (it != named.end()) return it->second;
  return Rng::mix(master, fnv1a(name));
}

namespace {

TimeRange parse_range(const json& j, const std::string& what) {
  if (!j.contains("start") || !j.contains("end"))
    throw ConfigError(what + ": needs start and end");
  TimeRange r;
  r.start = parse_instant(j.at("start").get<std::string>());
  r.end = parse_instant(j.at("end").get<std::string>());
  if (r.empty()) throw ConfigError(what + ": end must be after start");
  return r;
}

std::vector<RateLimit> parse_rate_limits(const json& j) {
  std::vector<RateLimit> out;
  for (const auto& e : j)
    out.push_back(RateLimit{e.at("window_s").get<int64_t>(),
                            e.at("max_delta").get<double>()});
  if (out.empty()) throw ConfigError("rate limit list cannot be empty");
  return out;
}

void parse_qc(const json& j, PipelineConfig& cfg) {
  cfg.qc.ta_min = j.value("ta_min", cfg.qc.ta_min);
  cfg.qc.ta_max = j.value("ta_max", cfg.qc.ta_max);
  cfg.qc.rh_min = j.value("rh_min", cfg.qc.rh_min);
  cfg.qc.rh_max = j.value("rh_max", cfg.qc.rh_max);
  if (j.contains("ta_rate")) cfg.qc.ta_rate = parse_rate_limits(j.at("ta_rate"));
  if (j.contains("rh_rate")) cfg.qc.rh_rate = parse_rate_limits(j.at("rh_rate"));
  cfg.qc.ta_persistence_s = j.value("ta_persistence_s", cfg.qc.ta_persistence_s);
  cfg.qc.rh_persistence_s = j.value("rh_persistence_s", cfg.qc.rh_persistence_s);
  if (j.contains("exclusions")) {
    for (const auto& e : j.at("exclusions")) {
      ExclusionWindow w;
      w.station = e.at("station").get<std::string>();
      w.variable = variable_from_name(e.at("variable").get<std::string>());
      w.start = parse_instant(e.at("start").get<std::string>());
      w.end = parse_instant(e.at("end").get<std::string>());
      if (w.end <= w.start)
        throw ConfigError("exclusion window for " + w.station +
                          ": end must be after start");
      cfg.exclusions.push_back(w);
    }
  }
}

void parse_gbt(const json& j, GbtParams& p) {
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.subsample = j.value("subsample", p.subsample);
  p.early_stopping_rounds = j.value("early_stopping_rounds", p.early_stopping_rounds);
  p.max_rounds = j.value("max_rounds", p.max_rounds);
  p.leaf_regularization = j.value("leaf_regularization", p.leaf_regularization);
  p.min_split_gain = j.value("min_split_gain", p.min_split_gain);
  p.histogram_mode = j.value("histogram_mode", p.histogram_mode);
  p.histogram_bins = j.value("histogram_bins", p.histogram_bins);
}

void parse_grid(const json& j, PipelineConfig& cfg) {
  const std::vector<double> lrs =
      j.value("learning_rate", std::vector<double>{0.1, 0.3, 0.5});
  const std::vector<int> depths = j.value("max_depth", std::vector<int>{6, 10});
  const std::vector<double> subs =
      j.value("subsample", std::vector<double>{0.5, 1.0});
  cfg.grid.clear();
  for (double lr : lrs)
    for (int d : depths)
      for (double s : subs) cfg.grid.push_back(GridPoint{lr, d, s});
}

StationMeta parse_station(const json& j) {
  StationMeta s;
  s.id = j.at("id").get<std::string>();
  s.latitude = j.at("lat").get<double>();
  s.longitude = j.at("lon").get<double>();
  s.elevation = j.value("elevation", 0.0);
  s.svf = j.value("svf", 1.0);
  s.cls = station_class_from_name(j.value("class", std::string("open")));
  validate_station(s);
  return s;
}

void parse_scenario(const json& j, PipelineConfig& cfg) {
  ScenarioConfig& sc = cfg.scenario;
  cfg.has_scenario = true;
  if (!j.contains("stations") || j.at("stations").empty())
    throw ConfigError("scenario: needs a non-empty station list");
  for (const auto& e : j.at("stations")) sc.stations.push_back(parse_station(e));
  sc.period = j.contains("period") ? parse_range(j.at("period"), "scenario.period")
                                   : TimeRange{cfg.train_period.start,
                                               cfg.eval_period.end};
  sc.cadence_s = j.value("cadence_s", cfg.cadence_s);
  sc.base_temp_c = j.value("base_temp_c", sc.base_temp_c);
  sc.seasonal_amplitude = j.value("seasonal_amplitude", sc.seasonal_amplitude);
  sc.diurnal_amplitude = j.value("diurnal_amplitude", sc.diurnal_amplitude);
  sc.elevation_lapse_per_100m =
      j.value("elevation_lapse_per_100m", sc.elevation_lapse_per_100m);
  sc.synoptic_sigma = j.value("synoptic_sigma", sc.synoptic_sigma);
  sc.synoptic_tau_h = j.value("synoptic_tau_h", sc.synoptic_tau_h);
  sc.spatial_sigma = j.value("spatial_sigma", sc.spatial_sigma);
  sc.spatial_length_km = j.value("spatial_length_km", sc.spatial_length_km);
  sc.spatial_tau_h = j.value("spatial_tau_h", sc.spatial_tau_h);
  sc.e_base = j.value("e_base", sc.e_base);
  sc.e_seasonal_amplitude = j.value("e_seasonal_amplitude", sc.e_seasonal_amplitude);
  sc.e_sigma = j.value("e_sigma", sc.e_sigma);
  sc.e_tau_h = j.value("e_tau_h", sc.e_tau_h);
  sc.e_spatial_sigma = j.value("e_spatial_sigma", sc.e_spatial_sigma);
  sc.noise_sigma_ta = j.value("noise_sigma_ta", sc.noise_sigma_ta);
  sc.noise_sigma_e = j.value("noise_sigma_e", sc.noise_sigma_e);
  if (j.contains("class_effects")) {
    for (const auto& [key, val] : j.at("class_effects").items()) {
      ClassEffect eff;
      eff.diurnal_damping = val.value("diurnal_damping", 0.0);
      eff.night_offset = val.value("night_offset", 0.0);
      sc.class_effects[station_class_from_name(key)] = eff;
    }
  }
  if (j.contains("fronts")) {
    for (const auto& e : j.at("fronts")) {
      FrontEvent f;
      f.t0 = parse_instant(e.at("t0").get<std::string>());
      f.direction_deg = e.value("direction_deg", f.direction_deg);
      f.speed_kmh = e.value("speed_kmh", f.speed_kmh);
      f.amplitude = e.value("amplitude", f.amplitude);
      f.ramp_s = e.value("ramp_s", f.ramp_s);
      f.hold_s = e.value("hold_s", f.hold_s);
      f.recovery_s = e.value("recovery_s", f.recovery_s);
      sc.fronts.push_back(f);
    }
  }
  if (j.contains("gaps")) {
    for (const auto& e : j.at("gaps")) {
      GapWindow g;
      g.station = e.at("station").get<std::string>();
      g.variable = variable_from_name(e.at("variable").get<std::string>());
      g.start = parse_instant(e.at("start").get<std::string>());
      g.end = parse_instant(e.at("end").get<std::string>());
      sc.gaps.push_back(g);
    }
  }
  if (j.contains("drifts")) {
    for (const auto& e : j.at("drifts")) {
      DriftSpec d;
      d.station = e.at("station").get<std::string>();
      d.variable = variable_from_name(e.at("variable").get<std::string>());
      d.per_day = e.at("per_day").get<double>();
      d.start = parse_instant(e.at("start").get<std::string>());
      sc.drifts.push_back(d);
    }
  }
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }

  static const std::set<std::string> known{
      "paths",    "periods",   "cadence_s",   "qc",       "cv",
      "grid",     "gbt",       "thinning",    "subset_sizes", "variants",
      "baselines", "evaluation", "seeds",     "workers",  "save_models",
      "scenario"};
  for (const auto& [key, val] : j.items()) {
    if (!known.count(key))
      throw ConfigError(path + ": unknown top-level key '" + key + "'");
  }

  PipelineConfig cfg;
  cfg.config_path = path;
  cfg.config_hash = fnv1a(text);

  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    cfg.out_dir = p.value("out", cfg.out_dir);
    cfg.observations_path = p.value("observations", std::string());
    cfg.metadata_path = p.value("metadata", std::string());
  }
  if (!j.contains("periods"))
    throw ConfigError(path + ": missing 'periods' (train and eval)");
  cfg.train_period = parse_range(j.at("periods").at("train"), "periods.train");
  cfg.eval_period = parse_range(j.at("periods").at("eval"), "periods.eval");
  cfg.cadence_s = j.value("cadence_s", cfg.cadence_s);

  if (j.contains("qc")) parse_qc(j.at("qc"), cfg);
  if (j.contains("cv")) cfg.cv_folds = j.at("cv").value("folds", cfg.cv_folds);
  if (j.contains("grid")) {
    parse_grid(j.at("grid"), cfg);
  } else {
    parse_grid(json::object(), cfg);
  }
  if (j.contains("gbt")) parse_gbt(j.at("gbt"), cfg.gbt);

  if (j.contains("thinning")) {
    const auto& t = j.at("thinning");
    cfg.retraining_points =
        t.value("retraining_points", cfg.retraining_points);
    cfg.thin_step_size = t.value("step_size", cfg.thin_step_size);
    if (t.contains("weights")) {
      for (const auto& [id, w] : t.at("weights").items()) {
        const double wv = w.get<double>();
        if (wv < 0) throw ConfigError("station weight must be >= 0");
        cfg.weights.weights[id] = wv;
      }
    }
  }
  cfg.subset_sizes = j.value("subset_sizes", cfg.subset_sizes);
  if (j.contains("variants")) {
    cfg.variants.clear();
    for (const auto& v : j.at("variants"))
      cfg.variants.push_back(variant_from_name(v.get<std::string>()));
  }
  if (j.contains("baselines")) {
    const auto& b = j.at("baselines");
    cfg.reference_stations =
        b.value("reference_stations", cfg.reference_stations);
    cfg.random_repeats = b.value("random_repeats", cfg.random_repeats);
    if (b.contains("variant"))
      cfg.baseline_variant = variant_from_name(b.at("variant").get<std::string>());
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    cfg.split.day_start_hour = e.value("day_start_hour", cfg.split.day_start_hour);
    cfg.split.day_end_hour = e.value("day_end_hour", cfg.split.day_end_hour);
    cfg.split.hot_day_threshold =
        e.value("hot_day_threshold", cfg.split.hot_day_threshold);
    cfg.bias_sizes = e.value("bias_sizes", cfg.bias_sizes);
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    for (const auto& [key, val] : s.items()) {
      if (key == "master") {
        cfg.seeds.master = val.get<uint64_t>();
      } else {
        cfg.seeds.named[key] = val.get<uint64_t>();
      }
    }
  }
  cfg.workers = j.value("workers", cfg.workers);
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  cfg.save_models = j.value("save_models", cfg.save_models);

  if (j.contains("scenario")) parse_scenario(j.at("scenario"), cfg);

  if (cfg.observations_path.empty())
    cfg.observations_path = cfg.out_dir + "/observations.csv";
  if (cfg.metadata_path.empty())
    cfg.metadata_path = cfg.out_dir + "/metadata.csv";
  return cfg;
}

void apply_seed_override(PipelineConfig& cfg, uint64_t seed) {
  cfg.seeds.master = seed;
  cfg.seeds.named.clear();  // everything re-derives from the new master
  cfg.config_hash = Rng::mix(cfg.config_hash, seed);
}

}  // namespace wsnthin
