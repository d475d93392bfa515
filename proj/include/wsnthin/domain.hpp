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

#ifndef WSNTHIN_DOMAIN_HPP_
#define WSNTHIN_DOMAIN_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "wsnthin/timeutil.hpp"

namespace wsnthin {

// Canonical units everywhere: air temperature in deg C, relative humidity
// in %, vapor pressure in hPa.
enum class Variable : uint8_t { Ta = 0, RH = 1, E = 2 };

std::string variable_name(Variable v);
Variable variable_from_name(const std::string& name);

enum class StationClass : uint8_t { BuiltUp = 0, Open = 1, Forest = 2, WaterAdjacent = 3 };

std::string station_class_name(StationClass c);
StationClass station_class_from_name(const std::string& name);

struct StationMeta {
  std::string id;
  double latitude = 0.0;   // deg N
  double longitude = 0.0;  // deg E
  double elevation = 0.0;  // m a.s.l.
  double svf = 1.0;        // sky view factor, [0, 1]
  StationClass cls = StationClass::Open;
};

// Checks the documented invariants (svf in [0,1], finite elevation).
// Throws DataError on violation.
void validate_station(const StationMeta& s);

struct Observation {
  Instant timestamp = 0;
  std::string station;
  Variable variable = Variable::Ta;
  std::optional<double> value;  // empty = missing, never a sentinel number
};

// Saturation vapor pressure in hPa after Teten. The 0.61078 constant is
// kPa-based; the factor 10 converts to the canonical hPa exactly once here.
// Note the exponent coefficient 17.7 is deliberate, not the conventional
// 17.27. Throws std::domain_error for ta <= -237.3 (pole of the exponent).
double saturation_vapor_pressure(double ta_celsius);

// rh in [0, 100] -> vapor pressure in hPa. Throws std::range_error outside
// the RH range, std::domain_error from the saturation term.
double rh_to_e(double rh_percent, double ta_celsius);

// Vapor pressure (hPa) -> RH in %. May exceed 100 for supersaturated model
// output; the value is returned as-is. Throws std::domain_error for e < 0 or
// an invalid ta.
double e_to_rh(double e_hpa, double ta_celsius);

}  // namespace wsnthin

#endif  // WSNTHIN_DOMAIN_HPP_
