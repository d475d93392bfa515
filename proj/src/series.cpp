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

#include "wsnthin/series.hpp"

#include <algorithm>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"

namespace wsnthin {

SeriesMap read_observations_csv(const std::string& path) {
  CsvReader r(path);
  r.read_header();
  if (r.header().size() < 4 || r.header()[0] != "timestamp")
    throw DataError(path + ": expected header timestamp,station,variable,value");

  SeriesMap out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 4)
      throw DataError(path + ":" + std::to_string(r.line_number()) +
                      ": expected 4 fields");
    if (f[3].empty()) continue;  // explicitly missing
    const SeriesKey key{f[1], variable_from_name(f[2])};
    const Instant t = parse_instant(f[0]);
    const double v = parse_double(f[3], path);
    out[key].push(t, v);
  }
  // Enforce strictly increasing timestamps per series.
  for (auto& [key, s] : out) {
    for (size_t i = 1; i < s.size(); ++i) {
      if (s.t[i] <= s.t[i - 1])
        throw DataError(path + ": series " + key.station + "/" +
                        variable_name(key.variable) +
                        " has non-increasing timestamps");
    }
  }
  return out;
}

void write_observations_csv(const std::string& path, const SeriesMap& series,
                            const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.row({"timestamp", "station", "variable", "value"});
  for (const auto& [key, s] : series) {
    for (size_t i = 0; i < s.size(); ++i) {
      w.row({format_instant(s.t[i]), key.station, variable_name(key.variable),
             format_double(s.v[i])});
    }
  }
  w.close();
}

std::vector<StationMeta> read_station_csv(const std::string& path) {
  CsvReader r(path);
  r.read_header();
  std::vector<StationMeta> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 6)
      throw DataError(path + ":" + std::to_string(r.line_number()) +
                      ": expected id,lat,lon,elevation,svf,class");
    StationMeta s;
    s.id = f[0];
    s.latitude = parse_double(f[1], path);
    s.longitude = parse_double(f[2], path);
    s.elevation = parse_double(f[3], path);
    s.svf = parse_double(f[4], path);
    s.cls = station_class_from_name(f[5]);
    validate_station(s);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const StationMeta& a, const StationMeta& b) { return a.id < b.id; });
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id)
      throw DataError(path + ": duplicate station id " + out[i].id);
  }
  return out;
}

void write_station_csv(const std::string& path,
                       const std::vector<StationMeta>& stations,
                       const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.row({"id", "lat", "lon", "elevation", "svf", "class"});
  for (const auto& s : stations) {
    w.row({s.id, format_double(s.latitude), format_double(s.longitude),
           format_double(s.elevation), format_double(s.svf),
           station_class_name(s.cls)});
  }
  w.close();
}

}  // namespace wsnthin
