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

#ifndef WSNTHIN_TIMEUTIL_HPP_
#define WSNTHIN_TIMEUTIL_HPP_

#include <cstdint>
#include <string>

namespace wsnthin {

// All instants are UTC seconds since the Unix epoch.
using Instant = int64_t;

constexpr int64_t kSecondsPerDay = 86400;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

int64_t days_from_civil(int y, int m, int d);
CivilDate civil_from_days(int64_t z);

// Floor division, correct for negative instants.
inline int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

inline int64_t day_index(Instant t) { return floor_div(t, kSecondsPerDay); }

inline int second_of_day(Instant t) {
  return static_cast<int>(t - day_index(t) * kSecondsPerDay);
}

inline double minute_of_day(Instant t) { return second_of_day(t) / 60.0; }

inline int hour_of_day(Instant t) { return second_of_day(t) / 3600; }

// 1-based day of year (1..366).
int day_of_year(Instant t);

// Accepts "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SSZ" (a trailing 'Z' is
// optional, a space separator is accepted). Throws DataError on junk.
Instant parse_instant(const std::string& s);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_instant(Instant t);

// "YYYY-MM-DD" of the UTC day containing t.
std::string format_date(Instant t);

struct TimeRange {
  Instant start = 0;
  Instant end = 0;  // half-open: [start, end)
  bool contains(Instant t) const { return t >= start && t < end; }
  bool empty() const { return end <= start; }
  int64_t num_days() const { return (end - start) / kSecondsPerDay; }
};

}  // namespace wsnthin

#endif  // WSNTHIN_TIMEUTIL_HPP_
