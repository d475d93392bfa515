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

#ifndef WSNTHIN_BASELINES_HPP_
#define WSNTHIN_BASELINES_HPP_

#include <string>
#include <vector>

#include "wsnthin/rng.hpp"
#include "wsnthin/series.hpp"

namespace wsnthin {

// Two-reference-station regression y = b0 + b1*x1 + b2*x2 + b3*x1*x2, fitted
// per target station and variable in physical units on complete cases.
struct GlmModel {
  std::string target_station;
  Variable variable = Variable::Ta;
  std::string x1_station, x2_station;
  double beta[4] = {0, 0, 0, 0};
  size_t n_obs = 0;
  double r2_train = 0.0;

  double predict(double x1, double x2) const {
    return beta[0] + beta[1] * x1 + beta[2] * x2 + beta[3] * x1 * x2;
  }
};

// Ordinary least squares on the design [1, x1, x2, x1*x2]. Inputs are
// aligned complete-case vectors. Throws DataError for fewer than 5 rows and
// NumericError (with pivot diagnostics) for a rank-deficient design such as
// x1 == x2.
GlmModel fit_glm(const std::vector<double>& y, const std::vector<double>& x1,
                 const std::vector<double>& x2);

// Seeded uniform sampling without replacement; one subset per repeat.
std::vector<std::vector<std::string>> random_subsets(
    const std::vector<std::string>& stations, int size, int repeats, Rng& rng);

void write_glm_models(const std::string& path,
                      const std::vector<GlmModel>& models,
                      const std::string& manifest_line);

}  // namespace wsnthin

#endif  // WSNTHIN_BASELINES_HPP_
