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

#ifndef WSNTHIN_SERIES_HPP_
#define WSNTHIN_SERIES_HPP_

#include <map>
#include <string>
#include <vector>

#include "wsnthin/domain.hpp"
#include "wsnthin/timeutil.hpp"

namespace wsnthin {

// A single station/variable series: strictly increasing timestamps, values
// always present (gaps are simply absent timestamps).
struct TimeSeries {
  std::vector<Instant> t;
  std::vector<double> v;

  size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push(Instant time, double value) {
    t.push_back(time);
    v.push_back(value);
  }
};

struct SeriesKey {
  std::string station;
  Variable variable;
  bool operator<(const SeriesKey& o) const {
    if (station != o.station) return station < o.station;
    return variable < o.variable;
  }
  bool operator==(const SeriesKey& o) const {
    return station == o.station && variable == o.variable;
  }
};

using SeriesMap = std::map<SeriesKey, TimeSeries>;

// Long-format observation CSV: timestamp,station,variable,value
SeriesMap read_observations_csv(const std::string& path);
void write_observations_csv(const std::string& path, const SeriesMap& series,
                            const std::string& manifest_line);

// Station metadata CSV: id,lat,lon,elevation,svf,class
std::vector<StationMeta> read_station_csv(const std::string& path);
void write_station_csv(const std::string& path,
                       const std::vector<StationMeta>& stations,
                       const std::string& manifest_line);

}  // namespace wsnthin

#endif  // WSNTHIN_SERIES_HPP_
