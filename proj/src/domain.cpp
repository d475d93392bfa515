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

#include "wsnthin/domain.hpp"

#include <cmath>
#include <stdexcept>

#include "wsnthin/errors.hpp"

namespace wsnthin {

std::string variable_name(Variable v) {
  switch (v) {
    case Variable::Ta: return "Ta";
    case Variable::RH: return "RH";
    case Variable::E: return "e";
  }
  return "?";
}

Variable variable_from_name(const std::string& name) {
  if (name == "Ta") return Variable::Ta;
  if (name == "RH") return Variable::RH;
  if (name == "e") return Variable::E;
  throw DataError("unknown variable: '" + name + "'");
}

std::string station_class_name(StationClass c) {
  switch (c) {
    case StationClass::BuiltUp: return "built-up";
    case StationClass::Open: return "open";
    case StationClass::Forest: return "forest";
    case StationClass::WaterAdjacent: return "water-adjacent";
  }
  return "?";
}

StationClass station_class_from_name(const std::string& name) {
  if (name == "built-up") return StationClass::BuiltUp;
  if (name == "open") return StationClass::Open;
  if (name == "forest") return StationClass::Forest;
  if (name == "water-adjacent") return StationClass::WaterAdjacent;
  throw DataError("unknown station class: '" + name + "'");
}

void validate_station(const StationMeta& s) {
  if (s.id.empty()) throw DataError("station with empty id");
  if (!(s.svf >= 0.0 && s.svf <= 1.0))
    throw DataError("station " + s.id + ": svf outside [0,1]");
  if (!std::isfinite(s.elevation))
    throw DataError("station " + s.id + ": non-finite elevation");
  if (!std::isfinite(s.latitude) || !std::isfinite(s.longitude))
    throw DataError("station " + s.id + ": non-finite coordinates");
}

double saturation_vapor_pressure(double ta_celsius) {
  if (!(ta_celsius > -237.3))
    throw std::domain_error("saturation_vapor_pressure: Ta <= -237.3 C");
  return 10.0 * 0.61078 * std::exp(17.7 * ta_celsius / (ta_celsius + 237.3));
}

double rh_to_e(double rh_percent, double ta_celsius) {
  if (!(rh_percent >= 0.0 && rh_percent <= 100.0))
    throw std::range_error("rh_to_e: RH outside [0,100]");
  return (rh_percent / 100.0) * saturation_vapor_pressure(ta_celsius);
}

double e_to_rh(double e_hpa, double ta_celsius) {
  if (!(e_hpa >= 0.0)) throw std::domain_error("e_to_rh: e < 0");
  return 100.0 * e_hpa / saturation_vapor_pressure(ta_celsius);
}

}  // namespace wsnthin
