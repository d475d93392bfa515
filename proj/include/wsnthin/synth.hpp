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

#ifndef WSNTHIN_SYNTH_HPP_
#define WSNTHIN_SYNTH_HPP_

#include <map>
#include <string>
#include <vector>

#include "wsnthin/series.hpp"

namespace wsnthin {

// A cold front sweeping across the network: a sharp sigmoid drop arriving
// at each station according to its position along the travel direction,
// followed by a slow linear recovery.
struct FrontEvent {
  Instant t0 = 0;              // arrival at the most-upwind station
  double direction_deg = 270;  // compass direction the front travels toward
  double speed_kmh = 25.0;
  double amplitude = 6.0;      // temperature drop in K
  int64_t ramp_s = 1200;
  int64_t hold_s = 6 * 3600;
  int64_t recovery_s = 12 * 3600;
};

struct GapWindow {
  std::string station;
  Variable variable = Variable::Ta;  // observed variable (Ta or RH)
  Instant start = 0, end = 0;
};

struct DriftSpec {
  std::string station;
  Variable variable = Variable::Ta;
  double per_day = 0.0;  // added linearly to the observed series
  Instant start = 0;
};

struct ClassEffect {
  double diurnal_damping = 0.0;  // fraction of the diurnal cycle removed
  double night_offset = 0.0;     // added during night hours (e.g. urban warmth)
};

struct ScenarioConfig {
  std::vector<StationMeta> stations;
  TimeRange period;
  int64_t cadence_s = 600;

  double base_temp_c = 12.0;
  double seasonal_amplitude = 8.0;  // annual cycle, peak around late July
  double diurnal_amplitude = 4.0;   // daily cycle, peak mid-afternoon
  double elevation_lapse_per_100m = -0.6;

  double synoptic_sigma = 3.0;  // shared AR(1) weather excursions
  double synoptic_tau_h = 72.0;

  double spatial_sigma = 0.8;      // station-local AR(1) field
  double spatial_length_km = 4.0;  // exponential covariance length
  double spatial_tau_h = 6.0;

  std::map<StationClass, ClassEffect> class_effects{
      {StationClass::BuiltUp, {0.10, 1.5}},
      {StationClass::Open, {0.0, 0.0}},
      {StationClass::Forest, {0.45, -0.5}},
      {StationClass::WaterAdjacent, {0.30, 0.3}},
  };

  // vapor pressure: slowly varying AR(1) level clipped at saturation
  double e_base = 10.0;
  double e_seasonal_amplitude = 4.0;
  double e_sigma = 1.2;
  double e_tau_h = 48.0;
  double e_spatial_sigma = 0.25;

  std::vector<FrontEvent> fronts;
  std::vector<GapWindow> gaps;
  std::vector<DriftSpec> drifts;

  double noise_sigma_ta = 0.3;  // observation noise, K
  double noise_sigma_e = 0.15;  // observation noise, hPa
};

struct SynthOutput {
  SeriesMap truth;     // per station: Ta (deg C) and e (hPa)
  SeriesMap observed;  // per station: Ta and RH, faults applied
};

// Deterministic under a fixed seed. Truth tables are kept separate from the
// observed (noisy, gappy, possibly drifting) tables so pipeline output can
// be scored against ground truth.
SynthOutput generate_scenario(const ScenarioConfig& scenario, uint64_t seed);

// Equirectangular local projection of station coordinates, in km.
std::vector<std::pair<double, double>> station_positions_km(
    const std::vector<StationMeta>& stations);

// Lower-triangular factor of the exponential-covariance matrix
// exp(-d_ij / length). Tolerates exact duplicates (semidefinite input).
std::vector<std::vector<double>> spatial_cholesky(
    const std::vector<std::pair<double, double>>& positions_km,
    double length_km);

}  // namespace wsnthin

#endif  // WSNTHIN_SYNTH_HPP_
