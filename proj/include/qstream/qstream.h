/*
 * Copyright 2026 The qstream Authors
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

/* C interface of libqstream. Every function returns a qs_status; on failure
 * qs_last_error() describes the problem (per thread, valid until the next
 * failing call on that thread). Handles are opaque and owned by the caller. */

#ifndef QSTREAM_QSTREAM_H_
#define QSTREAM_QSTREAM_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#if defined(QSTREAM_BUILDING_LIBRARY)
#define QS_API __declspec(dllexport)
#else
#define QS_API __declspec(dllimport)
#endif
#else
#define QS_API __attribute__((visibility("default")))
#endif

/* Codes 2..4 double as process exit codes of the command-line tool. */
typedef enum qs_status {
  QS_OK = 0,
  QS_ERR_CONFIG = 2,
  QS_ERR_NUMERICAL = 3,
  QS_ERR_IO = 4,
  QS_ERR_CONTRACT = 5,
  QS_ERR_USAGE = 6,
  QS_ERR_FORMAT = 7,
  QS_ERR_SHAPE = 8,
  QS_ERR_INTERNAL = 9
} qs_status;

#define QS_STATE_SIZE 7

QS_API const char* qs_version(void);
QS_API const char* qs_last_error(void);
QS_API const char* qs_status_name(qs_status status);

/* ---- Environment ------------------------------------------------------- */

typedef struct qs_env qs_env;

typedef struct qs_step_result {
  double state[QS_STATE_SIZE];
  double reward;
  int done;
  double fidelity;
  int q0;
  double omega_applied;
} qs_step_result;

/* `preset` is one of none|detuning|dephasing|relaxation|hybrid.
 * `env_json` (nullable) is a JSON object of environment fields that override
 * the preset, e.g. {"pointer_sigma": 5, "noise": {"dephasing_rate": 0.1}}. */
QS_API qs_status qs_env_create(const char* preset, const char* env_json, qs_env** out);
QS_API void qs_env_destroy(qs_env* env);
QS_API qs_status qs_env_reset(qs_env* env, uint64_t seed, double state_out[QS_STATE_SIZE]);
QS_API qs_status qs_env_step(qs_env* env, double action_norm, qs_step_result* out);
/* Row-major 2x2 density matrix. */
QS_API qs_status qs_env_density_matrix(const qs_env* env, double re[4], double im[4]);
/* Writes the current episode log as trajectory CSV. */
QS_API qs_status qs_env_write_log(const qs_env* env, const char* path);

/* ---- Agent ------------------------------------------------------------- */

typedef struct qs_agent qs_agent;

QS_API qs_status qs_agent_load(const char* checkpoint_path, qs_agent** out);
QS_API void qs_agent_destroy(qs_agent* agent);
QS_API qs_status qs_agent_act(const qs_agent* agent, const double state[QS_STATE_SIZE], double* action_mean,
                              double* value);

/* ---- Experiments ------------------------------------------------------- */

typedef struct qs_fidelity_summary {
  int episode_count;
  double mean;
  double std;
  double min;
  double max;
} qs_fidelity_summary;

/* Called after each PPO batch. `validation_mean` is NaN unless a periodic
 * validation ran at this point. */
typedef void (*qs_progress_fn)(int episodes_done, double validation_mean, void* user_data);

typedef struct qs_simulate_options {
  double dt_ratio;
  int ensemble;
  double sigma;
  uint64_t seed;
  const char* checkpoint; /* nullable: resonant flip pulse when NULL */
  int workers;
} qs_simulate_options;

typedef struct qs_train_options {
  const char* noise; /* preset name */
  int episodes;
  uint64_t seed;
  const char* config_path; /* nullable */
  int workers;             /* 0 keeps the configured value */
  qs_progress_fn progress; /* nullable */
  void* progress_user_data;
} qs_train_options;

typedef struct qs_evaluate_options {
  const char* checkpoint;
  const char* noise;
  int episodes;
  uint64_t seed;
  int workers;
} qs_evaluate_options;

typedef struct qs_transfer_options {
  const char* checkpoint;
  const char* noise; /* nullable: hybrid */
  int episodes;
  uint64_t seed;
  int eval_episodes;
  const char* config_path; /* nullable */
  qs_progress_fn progress;
  void* progress_user_data;
} qs_transfer_options;

QS_API void qs_simulate_options_init(qs_simulate_options* options);
QS_API void qs_train_options_init(qs_train_options* options);
QS_API void qs_evaluate_options_init(qs_evaluate_options* options);
QS_API void qs_transfer_options_init(qs_transfer_options* options);

QS_API qs_status qs_simulate(const qs_simulate_options* options, const char* out_dir);
/* `eval` (nullable) receives the final evaluation of the saved checkpoint. */
QS_API qs_status qs_train(const qs_train_options* options, const char* out_dir, qs_fidelity_summary* eval);
QS_API qs_status qs_evaluate(const qs_evaluate_options* options, const char* out_dir, qs_fidelity_summary* eval);
QS_API qs_status qs_transfer(const qs_transfer_options* options, const char* out_dir, qs_fidelity_summary* before,
                             qs_fidelity_summary* after);
/* `what` is trajectories|learning-curve|stats. Writes CSV to `out_path`, or
 * to standard output when it is NULL. */
QS_API qs_status qs_export(const char* run_dir, const char* what, const char* out_path);
QS_API qs_status qs_replay(const char* manifest_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* QSTREAM_QSTREAM_H_ */
