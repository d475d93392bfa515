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

#ifndef WSNTHIN_QC_HPP_
#define WSNTHIN_QC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wsnthin/series.hpp"

namespace wsnthin {

struct RateLimit {
  int64_t window_s;
  double max_delta;
};

// Defaults are the operational limits for a mid-latitude urban network:
// Ta in [-35, 45] C, RH in [10, 100] %, step limits of 5/10/15 K and
// 10/30/50 % over 1/10/60 minutes, persistence thresholds of 6 h (Ta) and
// 72 h (RH).
struct QcConfig {
  double ta_min = -35.0, ta_max = 45.0;
  double rh_min = 10.0, rh_max = 100.0;
  std::vector<RateLimit> ta_rate{{60, 5.0}, {600, 10.0}, {3600, 15.0}};
  std::vector<RateLimit> rh_rate{{60, 10.0}, {600, 30.0}, {3600, 50.0}};
  int64_t ta_persistence_s = 6 * 3600;
  int64_t rh_persistence_s = 72 * 3600;
};

struct ExclusionWindow {
  std::string station;
  Variable variable = Variable::Ta;
  Instant start = 0;
  Instant end = 0;  // half-open
};

// Flag sets are sorted sample indices into the input series.
using FlagSet = std::vector<size_t>;

// Flags samples strictly outside the closed physical interval for `var`.
FlagSet range_test(const TimeSeries& s, Variable var, const QcConfig& cfg);

// For every window length w with limit L, flags the later sample of any pair
// at most w apart whose absolute difference exceeds L. Equality passes.
FlagSet rate_of_change_test(const TimeSeries& s, Variable var,
                            const QcConfig& cfg);

// Flags every sample inside a maximal run of exactly equal consecutive
// values whose first-to-last duration strictly exceeds the variable's
// threshold.
FlagSet persistence_test(const TimeSeries& s, Variable var,
                         const QcConfig& cfg);

struct QcCounts {
  size_t total = 0;
  size_t range = 0;
  size_t rate = 0;
  size_t persistence = 0;
  size_t manual = 0;
  size_t removed = 0;  // size of the union
};

struct QcResult {
  TimeSeries cleaned;
  QcCounts counts;
};

// Runs the three tests independently on the raw series, unions the flags
// with any exclusion windows, and deletes the flagged samples. Surviving
// samples are bit-identical to the input.
QcResult apply_qc(const TimeSeries& s, Variable var, const QcConfig& cfg,
                  const std::vector<ExclusionWindow>& exclusions,
                  const std::string& station);

// Arithmetic mean over left-closed 10-minute bins aligned to the epoch;
// bins with no samples are absent from the output.
TimeSeries resample_10min(const TimeSeries& s);

struct QcReportRow {
  std::string station;
  Variable variable;
  std::string test;  // range | rate | persistence | manual
  size_t flagged = 0;
  double flagged_fraction = 0.0;
};

void write_qc_report(const std::string& path,
                     const std::vector<QcReportRow>& rows,
                     const std::string& manifest_line);

}  // namespace wsnthin

#endif  // WSNTHIN_QC_HPP_
