/* Copyright 2026 The wsnthin Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the station-network thinning pipeline. All functions
 * return wt_status; 0 is success. Handles are opaque and must be released
 * with their matching free/close call. Error messages for the most recent
 * failure are available via wt_last_error() (per pipeline handle) or
 * wt_global_error() (handle-free calls). */

#ifndef WSNTHIN_C_API_H_
#define WSNTHIN_C_API_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WT_API __declspec(dllexport)
#else
#define WT_API __attribute__((visibility("default")))
#endif

typedef enum wt_status {
  WT_OK = 0,
  WT_ERR_INTERNAL = 1, /* unexpected failure */
  WT_ERR_CONFIG = 2,   /* bad configuration or arguments */
  WT_ERR_DATA = 3,     /* missing/invalid data or artifacts */
  WT_ERR_NUMERIC = 4   /* numerical failure (domain, rank deficiency, ...) */
} wt_status;

typedef struct wt_pipeline wt_pipeline;
typedef struct wt_model wt_model;

WT_API const char* wt_version(void);

/* ---- pipeline ---- */

/* Loads a JSON config and returns a pipeline handle through *out. */
WT_API wt_status wt_pipeline_open(const char* config_path, wt_pipeline** out);
WT_API void wt_pipeline_close(wt_pipeline* p);

/* Overrides applied before running stages. */
WT_API wt_status wt_pipeline_set_seed(wt_pipeline* p, uint64_t master_seed);
WT_API wt_status wt_pipeline_set_workers(wt_pipeline* p, int workers);
WT_API wt_status wt_pipeline_set_output_dir(wt_pipeline* p, const char* dir);

/* Stage names: simulate, qc, build, tune, thin, fit, evaluate, baseline,
 * report, run-all. */
WT_API wt_status wt_pipeline_run_stage(wt_pipeline* p, const char* stage);

/* Message for the last failing call on this handle; empty string if none. */
WT_API const char* wt_last_error(const wt_pipeline* p);
/* Message for the last failing handle-free call on this thread. */
WT_API const char* wt_global_error(void);

/* ---- humidity conversions (canonical units: deg C, %, hPa) ---- */

WT_API wt_status wt_saturation_vapor_pressure(double ta_celsius, double* out);
WT_API wt_status wt_rh_to_e(double rh_percent, double ta_celsius, double* out);
WT_API wt_status wt_e_to_rh(double e_hpa, double ta_celsius, double* out);

/* ---- trained imputation models ---- */

WT_API wt_status wt_model_load(const char* path, wt_model** out);
WT_API void wt_model_free(wt_model* m);
WT_API wt_status wt_model_num_features(const wt_model* m, size_t* out);
/* features has length n; pass NaN for missing values. */
WT_API wt_status wt_model_predict(const wt_model* m, const double* features,
                                  size_t n, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WSNTHIN_C_API_H_ */
