// Copyright 2026 The MaskAudit Authors. All Rights Reserved.
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

#ifndef MASKAUDIT_MASKAUDIT_H_
#define MASKAUDIT_MASKAUDIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MASKAUDIT_BUILDING_LIBRARY)
#define MKA_API __attribute__((visibility("default")))
#else
#define MKA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure the message is available
   from mka_last_error() on the same thread until the next API call there. */
typedef enum mka_status {
  MKA_OK = 0,
  MKA_INVALID_ARGUMENT = 1,
  MKA_EMPTY_MASK = 2,
  MKA_SHAPE_MISMATCH = 3,
  MKA_INVALID_IMAGE = 4,
  MKA_SCHEMA_ERROR = 5,
  MKA_STRATIFICATION_ERROR = 6,
  MKA_MISSING_MASK = 7,
  MKA_TRAINING_DIVERGED = 8,
  MKA_DEGENERATE_LABELS = 9,
  MKA_NUMERICAL_DEGENERACY = 10,
  MKA_INCOMPLETE_RUN = 11,
  MKA_UNSUPPORTED_BACKBONE = 12,
  MKA_MODEL_OUTPUT_ERROR = 13,
  MKA_INSUFFICIENT_IMAGES = 14,
  MKA_NOT_FOUND = 15,
  MKA_PHASE_CLOSED = 16,
  MKA_IO_ERROR = 17,
  MKA_CONFIG_ERROR = 18,
  MKA_INTERNAL = 99
} mka_status;

MKA_API const char* mka_version(void);
MKA_API const char* mka_status_name(mka_status status);
/* Empty string when the last call on this thread succeeded. */
MKA_API const char* mka_last_error(void);

/* Strings returned through char** out-parameters. */
MKA_API void mka_string_free(char* s);

/* Log levels: 0 debug, 1 info, 2 warning, 3 error. A NULL callback restores
   the stderr default. The callback may run on worker threads. */
typedef void (*mka_log_fn)(int level, const char* message, void* user);
MKA_API void mka_set_log_callback(mka_log_fn fn, void* user);
MKA_API void mka_set_log_level(int level);

/* ---- experiments ---- */

typedef struct mka_experiment mka_experiment;

typedef struct mka_stage_result {
  int units_run;
  int units_skipped;
} mka_stage_result;

/* Reads a JSON config file. Relative paths resolve against its directory;
   MASKAUDIT_DATA_ROOT overrides the data root. */
MKA_API mka_status mka_experiment_open(const char* config_path, mka_experiment** out);
/* Same, from a JSON string; relative paths resolve against base_dir. */
MKA_API mka_status mka_experiment_open_json(const char* config_json, const char* base_dir,
                                            mka_experiment** out);
MKA_API void mka_experiment_free(mka_experiment* experiment);

/* 0 uses every core. Applies to later stages. */
MKA_API mka_status mka_experiment_set_max_parallel(mka_experiment* experiment, int n);

/* Stage names: generate, prepare, train, evaluate, sweep, embed, attribute,
   report. `result` may be NULL. */
MKA_API mka_status mka_experiment_run_stage(mka_experiment* experiment, const char* stage,
                                            mka_stage_result* result);

MKA_API mka_status mka_experiment_output_root(const mka_experiment* experiment, char** out);
/* Fully resolved configuration. */
MKA_API mka_status mka_experiment_config_json(const mka_experiment* experiment, char** out);
/* Contents of summary.json; MKA_NOT_FOUND before the first export. */
MKA_API mka_status mka_experiment_summary_json(const mka_experiment* experiment, char** out);

/* ---- reader study server ---- */

typedef struct mka_study_server mka_study_server;

/* Needs the study plans written by `evaluate`. */
MKA_API mka_status mka_study_server_create(mka_experiment* experiment, mka_study_server** out);
/* host NULL means 127.0.0.1, port 0 picks a free port, static_dir may be
   NULL. The bound port is written to *bound_port when non-NULL. */
MKA_API mka_status mka_study_server_start(mka_study_server* server, const char* host, int port,
                                          const char* static_dir, int* bound_port);
/* Blocks until mka_study_server_stop is called from another thread. */
MKA_API mka_status mka_study_server_wait(mka_study_server* server);
MKA_API void mka_study_server_stop(mka_study_server* server);
/* Stops the server if needed. The experiment must outlive the server. */
MKA_API void mka_study_server_free(mka_study_server* server);

/* ---- statistics ---- */

/* Mid-rank AUC. *degenerate is set to 1 (and the AUC to 0.5) when the labels
   hold one class; it may be NULL. Labels are 0/1. */
MKA_API mka_status mka_auc(const double* scores, const uint8_t* labels, size_t n,
                           double* auc, int* degenerate);

typedef struct mka_delong_result {
  double auc_a;
  double auc_b;
  double variance_diff;
  double z;
  double p_value;
} mka_delong_result;

MKA_API mka_status mka_delong(const double* scores_a, const double* scores_b,
                              const uint8_t* labels, size_t n, mka_delong_result* out);

/* *significant = 1 iff at least min_folds p-values are below alpha. */
MKA_API mka_status mka_significant_across_folds(const double* p_values, size_t n, double alpha,
                                                int min_folds, int* significant);

#ifdef __cplusplus
}
#endif

#endif  /* MASKAUDIT_MASKAUDIT_H_ */
