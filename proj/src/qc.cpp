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

#include "wsnthin/qc.hpp"

#include <algorithm>
#include <cmath>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"

namespace wsnthin {

namespace {

void bounds_for(Variable var, const QcConfig& cfg, double* lo, double* hi) {
  if (var == Variable::Ta) {
    *lo = cfg.ta_min;
    *hi = cfg.ta_max;
  } else {
    *lo = cfg.rh_min;
    *hi = cfg.rh_max;
  }
}

const std::vector<RateLimit>& rates_for(Variable var, const QcConfig& cfg) {
  return var == Variable::Ta ? cfg.ta_rate : cfg.rh_rate;
}

int64_t persistence_for(Variable var, const QcConfig& cfg) {
  return var == Variable::Ta ? cfg.ta_persistence_s : cfg.rh_persistence_s;
}

}  // namespace

FlagSet range_test(const TimeSeries& s, Variable var, const QcConfig& cfg) {
  double lo, hi;
  bounds_for(var, cfg, &lo, &hi);
  FlagSet flags;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.v[i] < lo || s.v[i] > hi) flags.push_back(i);
  }
  return flags;
}

FlagSet rate_of_change_test(const TimeSeries& s, Variable var,
                            const QcConfig& cfg) {
  const auto& limits = rates_for(var, cfg);
  if (limits.empty() || s.size() < 2) return {};
  int64_t max_window = 0;
  for (const auto& rl : limits) max_window = std::max(max_window, rl.window_s);

  std::vector<char> flagged(s.size(), 0);
  for (size_t i = 1; i < s.size(); ++i) {
    for (size_t j = i; j-- > 0;) {
      const int64_t dt = s.t[i] - s.t[j];
      if (dt > max_window) break;
      const double dv = std::fabs(s.v[i] - s.v[j]);
      for (const auto& rl : limits) {
        if (dt <= rl.window_s && dv > rl.max_delta) {
          flagged[i] = 1;
          break;
        }
      }
      if (flagged[i]) break;
    }
  }
  FlagSet flags;
  for (size_t i = 0; i < s.size(); ++i)
    if (flagged[i]) flags.push_back(i);
  return flags;
}

FlagSet persistence_test(const TimeSeries& s, Variable var,
                         const QcConfig& cfg) {
  const int64_t threshold = persistence_for(var, cfg);
  FlagSet flags;
  size_t run_start = 0;
  for (size_t i = 1; i <= s.size(); ++i) {
    const bool run_ends = i == s.size() || s.v[i] != s.v[run_start];
    if (!run_ends) continue;
    const size_t run_end = i;  // exclusive
    if (run_end - run_start >= 2 &&
        s.t[run_end - 1] - s.t[run_start] > threshold) {
      for (size_t k = run_start; k < run_end; ++k) flags.push_back(k);
    }
    run_start = i;
  }
  return flags;
}

QcResult apply_qc(const TimeSeries& s, Variable var, const QcConfig& cfg,
                  const std::vector<ExclusionWindow>& exclusions,
                  const std::string& station) {
  const FlagSet range_flags = range_test(s, var, cfg);
  const FlagSet rate_flags = rate_of_change_test(s, var, cfg);
  const FlagSet persist_flags = persistence_test(s, var, cfg);

  std::vector<char> drop(s.size(), 0);
  for (size_t i : range_flags) drop[i] = 1;
  for (size_t i : rate_flags) drop[i] = 1;
  for (size_t i : persist_flags) drop[i] = 1;

  // Counts are per-test (overlaps allowed); `removed` is the union.
  std::vector<char> manual_flag(s.size(), 0);
  for (const auto& w : exclusions) {
    if (w.station != station || w.variable != var) continue;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s.t[i] >= w.start && s.t[i] < w.end) {
        manual_flag[i] = 1;
        drop[i] = 1;
      }
    }
  }
  size_t manual = 0;
  for (char f : manual_flag) manual += f;

  QcResult out;
  out.counts.total = s.size();
  out.counts.range = range_flags.size();
  out.counts.rate = rate_flags.size();
  out.counts.persistence = persist_flags.size();
  out.counts.manual = manual;
  for (size_t i = 0; i < s.size(); ++i) {
    if (drop[i]) {
      ++out.counts.removed;
    } else {
      out.cleaned.push(s.t[i], s.v[i]);
    }
  }
  return out;
}

TimeSeries resample_10min(const TimeSeries& s) {
  constexpr int64_t kBin = 600;
  TimeSeries out;
  size_t i = 0;
  while (i < s.size()) {
    const int64_t bin = floor_div(s.t[i], kBin);
    double sum = 0.0;
    size_t n = 0;
    while (i < s.size() && floor_div(s.t[i], kBin) == bin) {
      sum += s.v[i];
      ++n;
      ++i;
    }
    out.push(bin * kBin, sum / static_cast<double>(n));
  }
  return out;
}

void write_qc_report(const std::string& path,
                     const std::vector<QcReportRow>& rows,
                     const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.row({"station", "variable", "test", "flagged_count", "flagged_fraction"});
  for (const auto& r : rows) {
    w.row({r.station, variable_name(r.variable), r.test,
           std::to_string(r.flagged), format_double(r.flagged_fraction)});
  }
  w.close();
}

}  // namespace wsnthin
