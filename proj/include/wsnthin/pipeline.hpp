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

#ifndef WSNTHIN_PIPELINE_HPP_
#define WSNTHIN_PIPELINE_HPP_

#include <string>
#include <vector>

#include "wsnthin/config.hpp"

namespace wsnthin {

// Stage runner over persisted artifacts: every stage reads its inputs from
// the output directory (or the configured external paths), writes versioned
// outputs carrying the manifest line, and is idempotent. Stage order:
// simulate, qc, build, tune, thin, fit, evaluate, baseline, report.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  // Stage names as exposed by the CLI, plus "run-all".
  void run_stage(const std::string& name);

  static const std::vector<std::string>& stage_names();

  const PipelineConfig& config() const { return cfg_; }
  PipelineConfig& config() { return cfg_; }

  // "config_hash=... master_seed=... version=..." embedded in every output.
  std::string manifest_line() const;

 private:
  void stage_simulate();
  void stage_qc();
  void stage_build();
  void stage_tune();
  void stage_thin();
  void stage_fit();
  void stage_evaluate();
  void stage_baseline();
  void stage_report();

  std::string out(const std::string& file) const;
  void require(const std::string& path, const std::string& producing_stage) const;

  PipelineConfig cfg_;
};

std::string version_string();

}  // namespace wsnthin

#endif  // WSNTHIN_PIPELINE_HPP_
