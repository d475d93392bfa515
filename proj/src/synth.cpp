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

#include "wsnthin/synth.hpp"

#include <algorithm>
#include <cmath>

#include "wsnthin/dataset.hpp"
#include "wsnthin/errors.hpp"
#include "wsnthin/rng.hpp"

namespace wsnthin {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

std::vector<std::pair<double, double>> station_positions_km(
    const std::vector<StationMeta>& stations) {
  double lat0 = 0.0, lon0 = 0.0;
  for (const auto& s : stations) {
    lat0 += s.latitude;
    lon0 += s.longitude;
  }
  lat0 /= static_cast<double>(stations.size());
  lon0 /= static_cast<double>(stations.size());
  const double km_per_deg_lat = 110.574;
  const double km_per_deg_lon = 111.320 * std::cos(lat0 * kPi / 180.0);
  std::vector<std::pair<double, double>> out;
  out.reserve(stations.size());
  for (const auto& s : stations) {
    out.emplace_back((s.longitude - lon0) * km_per_deg_lon,
                     (s.latitude - lat0) * km_per_deg_lat);
  }
  return out;
}

std::vector<std::vector<double>> spatial_cholesky(
    const std::vector<std::pair<double, double>>& pos, double length_km) {
  if (length_km <= 0.0) throw ConfigError("correlation length must be > 0");
  const size_t n = pos.size();
  std::vector<std::vector<double>> cov(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const double dx = pos[i].first - pos[j].first;
      const double dy = pos[i].second - pos[j].second;
      cov[i][j] = std::exp(-std::sqrt(dx * dx + dy * dy) / length_km);
    }
  }
  // semidefinite-tolerant Cholesky: a vanishing pivot (duplicate station)
  // zeroes its column so the duplicate reproduces its twin exactly
  std::vector<std::vector<double>> chol(n, std::vector<double>(n, 0.0));
  for (size_t j = 0; j < n; ++j) {
    double d = cov[j][j];
    for (size_t k = 0; k < j; ++k) d -= chol[j][k] * chol[j][k];
    chol[j][j] = d > 1e-10 ? std::sqrt(d) : 0.0;
    for (size_t i = j + 1; i < n; ++i) {
      double s = cov[i][j];
      for (size_t k = 0; k < j; ++k) s -= chol[i][k] * chol[j][k];
      chol[i][j] = chol[j][j] > 0.0 ? s / chol[j][j] : 0.0;
    }
  }
  return chol;
}

namespace {

double night_weight(double hour) {
  // full effect 22-04, linear ramps 19-22 and 04-07
  if (hour >= 22.0 || hour < 4.0) return 1.0;
  if (hour >= 19.0) return (hour - 19.0) / 3.0;
  if (hour < 7.0) return (7.0 - hour) / 3.0;
  return 0.0;
}

double front_contribution(const FrontEvent& f, Instant arrival, Instant t) {
  const double phase = static_cast<double>(t - arrival);
  const double ramp = static_cast<double>(std::max<int64_t>(1, f.ramp_s));
  double drop = -f.amplitude / (1.0 + std::exp(-phase / ramp));
  if (phase > static_cast<double>(f.hold_s)) {
    const double rec = (phase - static_cast<double>(f.hold_s)) /
                       static_cast<double>(std::max<int64_t>(1, f.recovery_s));
    drop += f.amplitude * std::min(1.0, rec);
  }
  return drop;
}

class Ar1 {
 public:
  Ar1(double sigma, double tau_s, int64_t dt, Rng& rng)
      : sigma_(sigma),
        rho_(tau_s > 0 ? std::exp(-static_cast<double>(dt) / tau_s) : 0.0),
        innov_(sigma * std::sqrt(std::max(0.0, 1.0 - rho_ * rho_))),
        rng_(rng) {
    state_ = sigma_ > 0 ? rng_.normal(0.0, sigma_) : 0.0;
  }
  double step() {
    const double out = state_;
    state_ = rho_ * state_ + (sigma_ > 0 ? rng_.normal(0.0, innov_) : 0.0);
    return out;
  }

 private:
  double sigma_, rho_, innov_;
  Rng& rng_;
  double state_;
};

}  // namespace

SynthOutput generate_scenario(const ScenarioConfig& sc, uint64_t seed) {
  if (sc.stations.empty()) throw ConfigError("scenario has no stations");
  if (sc.period.empty()) throw ConfigError("scenario period is empty");
  if (sc.cadence_s <= 0 || kSecondsPerDay % sc.cadence_s != 0)
    throw ConfigError("cadence must divide one day");
  if (sc.noise_sigma_ta < 0 || sc.noise_sigma_e < 0)
    throw ConfigError("noise sigma must be >= 0");
  for (const auto& s : sc.stations) validate_station(s);

  std::vector<StationMeta> stations = sc.stations;
  std::sort(stations.begin(), stations.end(),
            [](const StationMeta& a, const StationMeta& b) { return a.id < b.id; });
  const size_t ns = stations.size();
  const size_t nt =
      static_cast<size_t>((sc.period.end - sc.period.start) / sc.cadence_s);

  const auto pos = station_positions_km(stations);
  const auto chol = spatial_cholesky(pos, sc.spatial_length_km);

  // front arrival per (front, station)
  std::vector<std::vector<Instant>> arrivals(sc.fronts.size());
  for (size_t fi = 0; fi < sc.fronts.size(); ++fi) {
    const FrontEvent& f = sc.fronts[fi];
    const double theta = f.direction_deg * kPi / 180.0;
    const double ux = std::sin(theta), uy = std::cos(theta);
    double proj_min = std::numeric_limits<double>::infinity();
    std::vector<double> proj(ns);
    for (size_t s = 0; s < ns; ++s) {
      proj[s] = pos[s].first * ux + pos[s].second * uy;
      proj_min = std::min(proj_min, proj[s]);
    }
    arrivals[fi].resize(ns);
    for (size_t s = 0; s < ns; ++s) {
      const double delay_h = (proj[s] - proj_min) / std::max(1e-6, f.speed_kmh);
      arrivals[fi][s] = f.t0 + static_cast<Instant>(delay_h * 3600.0);
    }
  }

  double elev_mean = 0.0;
  for (const auto& s : stations) elev_mean += s.elevation;
  elev_mean /= static_cast<double>(ns);

  Rng rng(seed);
  Rng synoptic_rng = rng.fork(1);
  Rng e_level_rng = rng.fork(2);
  Rng field_rng = rng.fork(3);
  Rng noise_rng = rng.fork(4);

  Ar1 synoptic(sc.synoptic_sigma, sc.synoptic_tau_h * 3600.0, sc.cadence_s,
               synoptic_rng);
  Ar1 e_level(sc.e_sigma, sc.e_tau_h * 3600.0, sc.cadence_s, e_level_rng);

  // spatial AR(1) fields for Ta and e
  const double rho_sp =
      sc.spatial_tau_h > 0
          ? std::exp(-static_cast<double>(sc.cadence_s) / (sc.spatial_tau_h * 3600.0))
          : 0.0;
  const double innov_sp = std::sqrt(std::max(0.0, 1.0 - rho_sp * rho_sp));
  std::vector<double> z_ta(ns, 0.0), z_e(ns, 0.0), eta(ns), corr(ns);
  const auto draw_field = [&](std::vector<double>& z, bool init) {
    for (size_t i = 0; i < ns; ++i) eta[i] = field_rng.normal();
    for (size_t i = 0; i < ns; ++i) {
      double s = 0.0;
      for (size_t k = 0; k <= i; ++k) s += chol[i][k] * eta[k];
      corr[i] = s;
    }
    for (size_t i = 0; i < ns; ++i)
      z[i] = init ? corr[i] : rho_sp * z[i] + innov_sp * corr[i];
  };
  draw_field(z_ta, true);
  draw_field(z_e, true);

  // per-station noise streams, deterministic station order
  std::vector<Rng> noise(ns, Rng(0));
  for (size_t s = 0; s < ns; ++s) noise[s] = noise_rng.fork(s);

  SynthOutput out;
  std::vector<TimeSeries*> truth_ta(ns), truth_e(ns), obs_ta(ns), obs_rh(ns);
  for (size_t s = 0; s < ns; ++s) {
    truth_ta[s] = &out.truth[SeriesKey{stations[s].id, Variable::Ta}];
    truth_e[s] = &out.truth[SeriesKey{stations[s].id, Variable::E}];
    obs_ta[s] = &out.observed[SeriesKey{stations[s].id, Variable::Ta}];
    obs_rh[s] = &out.observed[SeriesKey{stations[s].id, Variable::RH}];
  }

  const auto gap_hit = [&](const std::string& id, Variable v, Instant t) {
    for (const auto& g : sc.gaps)
      if (g.station == id && g.variable == v && t >= g.start && t < g.end)
        return true;
    return false;
  };
  const auto drift_of = [&](const std::string& id, Variable v, Instant t) {
    double d = 0.0;
    for (const auto& dr : sc.drifts) {
      if (dr.station == id && dr.variable == v && t >= dr.start)
        d += dr.per_day * static_cast<double>(t - dr.start) /
             static_cast<double>(kSecondsPerDay);
    }
    return d;
  };

  for (size_t ti = 0; ti < nt; ++ti) {
    const Instant t = sc.period.start + static_cast<Instant>(ti) * sc.cadence_s;
    if (ti > 0) {
      draw_field(z_ta, false);
      draw_field(z_e, false);
    }
    const double syn = synoptic.step();
    const double e_lvl = e_level.step();

    const double doy = static_cast<double>(day_of_year(t));
    const double seasonal =
        sc.seasonal_amplitude * std::cos(kTwoPi * (doy - 204.0) / 365.25);
    const double hour = minute_of_day(t) / 60.0;
    const double diurnal_raw =
        sc.diurnal_amplitude * std::cos(kTwoPi * (minute_of_day(t) - 900.0) / 1440.0);
    const double e_seasonal =
        sc.e_seasonal_amplitude * std::cos(kTwoPi * (doy - 204.0) / 365.25);

    for (size_t s = 0; s < ns; ++s) {
      const StationMeta& st = stations[s];
      ClassEffect eff;
      const auto eff_it = sc.class_effects.find(st.cls);
      if (eff_it != sc.class_effects.end()) eff = eff_it->second;

      double ta = sc.base_temp_c + seasonal +
                  diurnal_raw * (1.0 - eff.diurnal_damping) + syn +
                  eff.night_offset * night_weight(hour) +
                  sc.elevation_lapse_per_100m * (st.elevation - elev_mean) / 100.0 +
                  sc.spatial_sigma * z_ta[s];
      for (size_t fi = 0; fi < sc.fronts.size(); ++fi)
        ta += front_contribution(sc.fronts[fi], arrivals[fi][s], t);

      const double esat = saturation_vapor_pressure(ta);
      double e = sc.e_base + e_seasonal + e_lvl + sc.e_spatial_sigma * z_e[s];
      e = std::max(0.5, std::min(e, esat));  // bounded by saturation

      truth_ta[s]->push(t, ta);
      truth_e[s]->push(t, e);

      const double ta_obs = ta + (sc.noise_sigma_ta > 0
                                      ? noise[s].normal(0.0, sc.noise_sigma_ta)
                                      : 0.0);
      double e_obs = e + (sc.noise_sigma_e > 0
                              ? noise[s].normal(0.0, sc.noise_sigma_e)
                              : 0.0);
      e_obs = std::max(0.01, e_obs);
      double rh_obs = 100.0 * e_obs / saturation_vapor_pressure(ta_obs);

      if (!gap_hit(st.id, Variable::Ta, t))
        obs_ta[s]->push(t, ta_obs + drift_of(st.id, Variable::Ta, t));
      if (!gap_hit(st.id, Variable::RH, t))
        obs_rh[s]->push(t, rh_obs + drift_of(st.id, Variable::RH, t));
    }
  }
  return out;
}

}  // namespace wsnthin
