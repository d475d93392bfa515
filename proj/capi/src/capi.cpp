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

#include "wsnthin.h"

#include <exception>
#include <stdexcept>
#include <string>

#include "wsnthin/errors.hpp"
#include "wsnthin/gbt.hpp"
#include "wsnthin/pipeline.hpp"

using wsnthin::ConfigError;
using wsnthin::DataError;
using wsnthin::NumericError;

struct wt_pipeline {
  wsnthin::Pipeline impl;
  std::string last_error;
  explicit wt_pipeline(wsnthin::PipelineConfig cfg) : impl(std::move(cfg)) {}
};

struct wt_model {
  wsnthin::TreeEnsemble impl;
};

namespace {

thread_local std::string g_last_error;

wt_status classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return WT_ERR_CONFIG;
  if (dynamic_cast<const DataError*>(&e)) return WT_ERR_DATA;
  if (dynamic_cast<const NumericError*>(&e)) return WT_ERR_NUMERIC;
  if (dynamic_cast<const std::domain_error*>(&e)) return WT_ERR_NUMERIC;
  if (dynamic_cast<const std::range_error*>(&e)) return WT_ERR_NUMERIC;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return WT_ERR_CONFIG;
  return WT_ERR_INTERNAL;
}

// Runs fn, routing exceptions into the handle's (or thread's) error slot.
template <typename Fn>
wt_status guarded(std::string* error_slot, Fn&& fn) {
  std::string* slot = error_slot ? error_slot : &g_last_error;
  try {
    fn();
    slot->clear();
    return WT_OK;
  } catch (const std::exception& e) {
    *slot = e.what();
    return classify(e);
  } catch (...) {
    *slot = "unknown error";
    return WT_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* wt_version(void) {
  static const std::string v = wsnthin::version_string();
  return v.c_str();
}

wt_status wt_pipeline_open(const char* config_path, wt_pipeline** out) {
  if (!config_path || !out) return WT_ERR_CONFIG;
  *out = nullptr;
  return guarded(nullptr, [&]() {
    auto cfg = wsnthin::load_config(config_path);
    *out = new wt_pipeline(std::move(cfg));
  });
}

void wt_pipeline_close(wt_pipeline* p) { delete p; }

wt_status wt_pipeline_set_seed(wt_pipeline* p, uint64_t master_seed) {
  if (!p) return WT_ERR_CONFIG;
  return guarded(&p->last_error, [&]() {
    wsnthin::apply_seed_override(p->impl.config(), master_seed);
  });
}

wt_status wt_pipeline_set_workers(wt_pipeline* p, int workers) {
  if (!p) return WT_ERR_CONFIG;
  return guarded(&p->last_error, [&]() {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    p->impl.config().workers = workers;
  });
}

wt_status wt_pipeline_set_output_dir(wt_pipeline* p, const char* dir) {
  if (!p || !dir) return WT_ERR_CONFIG;
  return guarded(&p->last_error, [&]() {
    wsnthin::PipelineConfig& cfg = p->impl.config();
    const std::string old_out = cfg.out_dir;
    // re-point derived default paths that lived under the old directory
    if (cfg.observations_path == old_out + "/observations.csv")
      cfg.observations_path = std::string(dir) + "/observations.csv";
    if (cfg.metadata_path == old_out + "/metadata.csv")
      cfg.metadata_path = std::string(dir) + "/metadata.csv";
    cfg.out_dir = dir;
  });
}

wt_status wt_pipeline_run_stage(wt_pipeline* p, const char* stage) {
  if (!p || !stage) return WT_ERR_CONFIG;
  return guarded(&p->last_error, [&]() { p->impl.run_stage(stage); });
}

const char* wt_last_error(const wt_pipeline* p) {
  return p ? p->last_error.c_str() : g_last_error.c_str();
}

const char* wt_global_error(void) { return g_last_error.c_str(); }

wt_status wt_saturation_vapor_pressure(double ta_celsius, double* out) {
  if (!out) return WT_ERR_CONFIG;
  return guarded(nullptr,
                 [&]() { *out = wsnthin::saturation_vapor_pressure(ta_celsius); });
}

wt_status wt_rh_to_e(double rh_percent, double ta_celsius, double* out) {
  if (!out) return WT_ERR_CONFIG;
  return guarded(nullptr, [&]() { *out = wsnthin::rh_to_e(rh_percent, ta_celsius); });
}

wt_status wt_e_to_rh(double e_hpa, double ta_celsius, double* out) {
  if (!out) return WT_ERR_CONFIG;
  return guarded(nullptr, [&]() { *out = wsnthin::e_to_rh(e_hpa, ta_celsius); });
}

wt_status wt_model_load(const char* path, wt_model** out) {
  if (!path || !out) return WT_ERR_CONFIG;
  *out = nullptr;
  return guarded(nullptr, [&]() {
    auto* m = new wt_model{wsnthin::TreeEnsemble::load(path)};
    *out = m;
  });
}

void wt_model_free(wt_model* m) { delete m; }

wt_status wt_model_num_features(const wt_model* m, size_t* out) {
  if (!m || !out) return WT_ERR_CONFIG;
  *out = m->impl.n_features;
  return WT_OK;
}

wt_status wt_model_predict(const wt_model* m, const double* features, size_t n,
                           double* out) {
  if (!m || !features || !out) return WT_ERR_CONFIG;
  return guarded(nullptr, [&]() { *out = m->impl.predict(features, n); });
}

}  // extern "C"
