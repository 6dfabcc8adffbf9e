// Copyright 2026 The pvqflow Authors
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

#ifndef PVQFLOW_H
#define PVQFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PVQ_API __declspec(dllexport)
#else
#define PVQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; details via pvq_last_error(). */
typedef enum pvq_status {
  PVQ_OK = 0,
  PVQ_ERR_INVALID_ARGUMENT = 1, /* null pointer, wrong length, unknown enum */
  PVQ_ERR_CONFIG = 2,
  PVQ_ERR_IO = 3,
  PVQ_ERR_NUMERICAL = 4,
  PVQ_ERR_DOMAIN = 5,
  PVQ_ERR_INTERNAL = 6
} pvq_status;

/* Message for the last failing call on this thread; empty after success. */
PVQ_API const char* pvq_last_error(void);
PVQ_API const char* pvq_status_name(pvq_status status);
PVQ_API const char* pvq_version(void);

/* ---- run configuration ------------------------------------------------ */

typedef struct pvq_config pvq_config;

PVQ_API pvq_status pvq_config_new(pvq_config** out);
PVQ_API pvq_status pvq_config_load(const char* path, pvq_config** out);
PVQ_API pvq_status pvq_config_parse(const char* text, pvq_config** out);
PVQ_API pvq_status pvq_config_set(pvq_config* cfg, const char* key, const char* value);
/* Writes a NUL-terminated value into buf when it fits; *needed gets the
   length including the terminator. buf may be NULL when capacity is 0. */
PVQ_API pvq_status pvq_config_get(const pvq_config* cfg, const char* key, char* buf,
                                  size_t capacity, size_t* needed);
PVQ_API pvq_status pvq_config_validate(const pvq_config* cfg);
PVQ_API void pvq_config_free(pvq_config* cfg);

/* ---- model ------------------------------------------------------------ */

typedef struct pvq_model pvq_model;

PVQ_API pvq_status pvq_model_new(size_t dim, size_t hidden, size_t hidden_layers, uint64_t seed,
                                 double output_scale, pvq_model** out);
PVQ_API pvq_status pvq_model_load(const char* path, pvq_model** out);
PVQ_API pvq_status pvq_model_save(const pvq_model* model, const char* path);
PVQ_API size_t pvq_model_dim(const pvq_model* model);
PVQ_API size_t pvq_model_num_params(const pvq_model* model);
PVQ_API pvq_status pvq_model_get_params(const pvq_model* model, double* out, size_t count);
PVQ_API pvq_status pvq_model_set_params(pvq_model* model, const double* values, size_t count);
PVQ_API void pvq_model_free(pvq_model* model);

typedef enum pvq_method { PVQ_METHOD_RK4 = 0, PVQ_METHOD_DOPRI5 = 1 } pvq_method;

typedef struct pvq_solver_options {
  pvq_method method;
  uint32_t n_steps;   /* RK4 */
  double rtol;        /* DOPRI5 */
  double atol;        /* DOPRI5 */
  uint64_t max_steps; /* DOPRI5 trial steps */
} pvq_solver_options;

typedef enum pvq_trace_mode { PVQ_TRACE_EXACT = 0, PVQ_TRACE_HUTCHINSON = 1 } pvq_trace_mode;

typedef struct pvq_trace_options {
  pvq_trace_mode mode;
  uint32_t n_probes;
  uint64_t seed;
} pvq_trace_options;

PVQ_API pvq_solver_options pvq_solver_defaults(void);
PVQ_API pvq_trace_options pvq_trace_defaults(void);

/* Vectors have length dim == pvq_model_dim(model). */
PVQ_API pvq_status pvq_vector_field(const pvq_model* model, const double* z, size_t dim, double t,
                                    double a, double* out);
PVQ_API pvq_status pvq_divergence(const pvq_model* model, const double* z, size_t dim, double t,
                                  double a, const pvq_trace_options* trace, uint64_t stream,
                                  double* out);
PVQ_API pvq_status pvq_transform_to_base(const pvq_model* model, const double* s, size_t dim,
                                         double a, const pvq_solver_options* solver,
                                         const pvq_trace_options* trace, uint64_t stream,
                                         double* z0_out, double* logdet_out);
PVQ_API pvq_status pvq_transform_from_base(const pvq_model* model, const double* z0, size_t dim,
                                           double a_target, const pvq_solver_options* solver,
                                           double* s_out);
PVQ_API pvq_status pvq_log_likelihood(const pvq_model* model, const double* s, size_t dim, double a,
                                      const pvq_solver_options* solver,
                                      const pvq_trace_options* trace, uint64_t stream, double* out);
PVQ_API pvq_status pvq_manipulate(const pvq_model* model, const double* s, size_t dim, double a,
                                  double delta, const pvq_solver_options* solver, double* out);

/* ---- datasets ---------------------------------------------------------- */

typedef struct pvq_dataset pvq_dataset;

/* attributes_path may be NULL, leaving the attributes empty. */
PVQ_API pvq_status pvq_dataset_load(const char* embeddings_path, const char* attributes_path,
                                    pvq_dataset** out);
PVQ_API size_t pvq_dataset_size(const pvq_dataset* data);
PVQ_API size_t pvq_dataset_dim(const pvq_dataset* data);
PVQ_API pvq_status pvq_dataset_row(const pvq_dataset* data, size_t index, double* out, size_t dim);
PVQ_API pvq_status pvq_dataset_attribute(const pvq_dataset* data, size_t index, double* out);
PVQ_API void pvq_dataset_free(pvq_dataset* data);

/* ---- pipeline ---------------------------------------------------------- */

typedef struct pvq_gen_summary {
  size_t n;
  size_t n_heldout;
  size_t dim;
  uint64_t seed;
} pvq_gen_summary;

typedef struct pvq_grad_check_summary {
  size_t points;
  size_t parameters_checked;
  double max_relative_error;
  double tolerance;
  int passed;
} pvq_grad_check_summary;

typedef struct pvq_train_summary {
  uint64_t first_iteration;
  uint64_t iterations;
  double initial_loss; /* NaN when no iterations ran */
  double final_loss;
  int grad_checked;
  pvq_grad_check_summary grad_check;
} pvq_train_summary;

typedef struct pvq_manipulate_summary {
  size_t embeddings;
  size_t factors;
} pvq_manipulate_summary;

typedef struct pvq_analyze_summary {
  size_t records;
  int has_correlation; /* ã against the recovered attribute */
  double r;
  double slope;
  size_t n;
} pvq_analyze_summary;

/* Output arguments may be NULL. */
PVQ_API pvq_status pvq_run_gen(const pvq_config* cfg, pvq_gen_summary* out);
PVQ_API pvq_status pvq_run_train(const pvq_config* cfg, int resume, pvq_train_summary* out);
PVQ_API pvq_status pvq_run_manipulate(const pvq_config* cfg, pvq_manipulate_summary* out);
PVQ_API pvq_status pvq_run_analyze(const pvq_config* cfg, pvq_analyze_summary* out);
PVQ_API pvq_status pvq_run_grad_check(const pvq_config* cfg, pvq_grad_check_summary* out);

/* Global attribute of a frame-feature DSV (frame_index,energy,creak_probability)
   using the configuration's VAD settings. */
PVQ_API pvq_status pvq_estimate_attribute(const pvq_config* cfg, const char* features_path,
                                          double* out, size_t* active_frames);

#ifdef __cplusplus
}
#endif

#endif /* PVQFLOW_H */
