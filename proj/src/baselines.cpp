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

#include "wsnthin/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "wsnthin/csv.hpp"
#include "wsnthin/errors.hpp"

namespace wsnthin {

namespace {

// Gaussian elimination with partial pivoting on a 4x4 system.
void solve_4x4(double a[4][4], double b[4], double* out) {
  int perm[4] = {0, 1, 2, 3};
  double max_pivot = 0.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(a[perm[r]][col]) > std::fabs(a[perm[pivot]][col])) pivot = r;
    std::swap(perm[col], perm[pivot]);
    const double p = a[perm[col]][col];
    max_pivot = std::max(max_pivot, std::fabs(p));
    if (std::fabs(p) <= 1e-12 * std::max(1.0, max_pivot)) {
      throw NumericError(
          "rank-deficient regression design (pivot " + format_double(p) +
          " at column " + std::to_string(col) +
          ", largest pivot " + format_double(max_pivot) +
          "); are the two reference series collinear?");
    }
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[perm[r]][col] / p;
      for (int c = col; c < 4; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  for (int col = 3; col >= 0; --col) {
    double s = b[perm[col]];
    for (int c = col + 1; c < 4; ++c) s -= a[perm[col]][c] * out[c];
    out[col] = s / a[perm[col]][col];
  }
}

}  // namespace

GlmModel fit_glm(const std::vector<double>& y, const std::vector<double>& x1,
                 const std::vector<double>& x2) {
  if (y.size() != x1.size() || y.size() != x2.size())
    throw DataError("fit_glm: misaligned inputs");
  if (y.size() < 5)
    throw DataError("fit_glm: need at least 5 complete-case rows, have " +
                    std::to_string(y.size()));

  // normal equations over the design [1, x1, x2, x1*x2]
  double xtx[4][4] = {};
  double xty[4] = {};
  for (size_t i = 0; i < y.size(); ++i) {
    const double row[4] = {1.0, x1[i], x2[i], x1[i] * x2[i]};
    for (int a = 0; a < 4; ++a) {
      xty[a] += row[a] * y[i];
      for (int b = 0; b < 4; ++b) xtx[a][b] += row[a] * row[b];
    }
  }

  GlmModel m;
  solve_4x4(xtx, xty, m.beta);
  m.n_obs = y.size();

  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(y.size());
  double sse = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double d = m.predict(x1[i], x2[i]) - y[i];
    sse += d * d;
    ss_tot += (y[i] - y_mean) * (y[i] - y_mean);
  }
  m.r2_train = ss_tot > 0.0 ? 1.0 - sse / ss_tot : 0.0;

  for (double b : m.beta) {
    if (!std::isfinite(b)) throw NumericError("fit_glm: non-finite coefficient");
  }
  return m;
}

std::vector<std::vector<std::string>> random_subsets(
    const std::vector<std::string>& stations, int size, int repeats, Rng& rng) {
  if (size < 1 || static_cast<size_t>(size) > stations.size())
    throw ConfigError("random_subsets: size " + std::to_string(size) +
                      " outside [1, " + std::to_string(stations.size()) + "]");
  std::vector<std::vector<std::string>> out;
  out.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    auto picks = rng.sample_without_replacement(stations.size(),
                                                static_cast<size_t>(size));
    std::sort(picks.begin(), picks.end());
    std::vector<std::string> ids;
    ids.reserve(picks.size());
    for (size_t p : picks) ids.push_back(stations[p]);
    out.push_back(std::move(ids));
  }
  return out;
}

void write_glm_models(const std::string& path,
                      const std::vector<GlmModel>& models,
                      const std::string& manifest_line) {
  CsvWriter w(path);
  if (!manifest_line.empty()) w.comment(manifest_line);
  w.row({"station", "variable", "b0", "b1", "b2", "b3", "n_obs", "r2_train"});
  for (const auto& m : models) {
    w.row({m.target_station, variable_name(m.variable), format_double(m.beta[0]),
           format_double(m.beta[1]), format_double(m.beta[2]),
           format_double(m.beta[3]), std::to_string(m.n_obs),
           format_double(m.r2_train)});
  }
  w.close();
}

}  // namespace wsnthin
