// Copyright 2026 The qstream Authors
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

#include "qstream/qstream.h"

#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "qstream/checkpoint.hpp"
#include "qstream/config.hpp"
#include "qstream/csv.hpp"
#include "qstream/errors.hpp"
#include "qstream/experiments.hpp"
#include "qstream/stream_env.hpp"

struct qs_env {
  qstream::StreamEnv env;
};

struct qs_agent {
  qstream::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

qs_status fail(qs_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating library exceptions into status codes.
template <typename Fn>
qs_status guarded(Fn&& fn) {
  try {
    fn();
    return QS_OK;
  } catch (const qstream::ConfigError& e) {
    return fail(QS_ERR_CONFIG, e.what());
  } catch (const qstream::NumericalError& e) {
    return fail(QS_ERR_NUMERICAL, e.what());
  } catch (const qstream::IoError& e) {
    return fail(QS_ERR_IO, e.what());
  } catch (const qstream::ContractViolation& e) {
    return fail(QS_ERR_CONTRACT, e.what());
  } catch (const qstream::UsageError& e) {
    return fail(QS_ERR_USAGE, e.what());
  } catch (const qstream::FormatError& e) {
    return fail(QS_ERR_FORMAT, e.what());
  } catch (const qstream::ShapeError& e) {
    return fail(QS_ERR_SHAPE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(QS_ERR_CONFIG, std::string("JSON: ") + e.what());
  } catch (const std::exception& e) {
    return fail(QS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QS_ERR_INTERNAL, "unknown error");
  }
}

void require_arg(const void* p, const char* name) {
  if (!p) throw qstream::ContractViolation(std::string(name) + " must not be NULL");
}

void copy_state(const qstream::RLState& s, double out[QS_STATE_SIZE]) {
  const auto a = s.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
}

void fill_summary(const nlohmann::json& stats, qs_fidelity_summary* out) {
  if (!out) return;
  out->episode_count = stats.at("episode_count").get<int>();
  out->mean = stats.at("mean").get<double>();
  out->std = stats.at("std").get<double>();
  out->min = stats.at("min").get<double>();
  out->max = stats.at("max").get<double>();
}

qstream::ProgressFn wrap_progress(qs_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](int done, const qstream::FidelityStats* val) {
    fn(done, val ? val->mean : std::numeric_limits<double>::quiet_NaN(), user);
  };
}

}  // namespace

extern "C" {

const char* qs_version(void) { return QSTREAM_VERSION; }

const char* qs_last_error(void) { return g_last_error.c_str(); }

const char* qs_status_name(qs_status status) {
  switch (status) {
    case QS_OK: return "ok";
    case QS_ERR_CONFIG: return "config error";
    case QS_ERR_NUMERICAL: return "numerical error";
    case QS_ERR_IO: return "I/O error";
    case QS_ERR_CONTRACT: return "contract violation";
    case QS_ERR_USAGE: return "usage error";
    case QS_ERR_FORMAT: return "format error";
    case QS_ERR_SHAPE: return "shape error";
    case QS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

qs_status qs_env_create(const char* preset, const char* env_json, qs_env** out) {
  return guarded([&] {
    require_arg(preset, "preset");
    require_arg(out, "out");
    qstream::EnvConfig config = qstream::EnvConfig::for_preset(qstream::parse_noise_preset(preset));
    if (env_json && *env_json) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(env_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw qstream::ConfigError(std::string("env_json: ") + e.what());
      }
      qstream::merge_json(j, config);
    }
    *out = new qs_env{qstream::StreamEnv(config)};
  });
}

void qs_env_destroy(qs_env* env) { delete env; }

qs_status qs_env_reset(qs_env* env, uint64_t seed, double state_out[QS_STATE_SIZE]) {
  return guarded([&] {
    require_arg(env, "env");
    const qstream::RLState s = env->env.reset(seed);
    if (state_out) copy_state(s, state_out);
  });
}

qs_status qs_env_step(qs_env* env, double action_norm, qs_step_result* out) {
  return guarded([&] {
    require_arg(env, "env");
    const qstream::StepResult r = env->env.step(action_norm);
    if (out) {
      copy_state(r.state, out->state);
      out->reward = r.reward;
      out->done = r.done ? 1 : 0;
      out->fidelity = r.info.fidelity;
      out->q0 = r.info.q0;
      out->omega_applied = r.info.omega_applied;
    }
  });
}

qs_status qs_env_density_matrix(const qs_env* env, double re[4], double im[4]) {
  return guarded([&] {
    require_arg(env, "env");
    require_arg(re, "re");
    require_arg(im, "im");
    const auto& m = env->env.rho().matrix();
    for (int i = 0; i < 4; ++i) {
      re[i] = m(i / 2, i % 2).real();
      im[i] = m(i / 2, i % 2).imag();
    }
  });
}

qs_status qs_env_write_log(const qs_env* env, const char* path) {
  return guarded([&] {
    require_arg(env, "env");
    require_arg(path, "path");
    qstream::write_csv(path, qstream::episode_log_table(env->env.log()));
  });
}

qs_status qs_agent_load(const char* checkpoint_path, qs_agent** out) {
  return guarded([&] {
    require_arg(checkpoint_path, "checkpoint_path");
    require_arg(out, "out");
    *out = new qs_agent{qstream::load_checkpoint(checkpoint_path)};
  });
}

void qs_agent_destroy(qs_agent* agent) { delete agent; }

qs_status qs_agent_act(const qs_agent* agent, const double state[QS_STATE_SIZE], double* action_mean, double* value) {
  return guarded([&] {
    require_arg(agent, "agent");
    require_arg(state, "state");
    const auto& params = agent->checkpoint.params;
    if (params.actor.input_size() != QS_STATE_SIZE) throw qstream::ShapeError("checkpoint input size is not 7");
    Eigen::VectorXd features(QS_STATE_SIZE);
    for (int i = 0; i < QS_STATE_SIZE; ++i) features[i] = state[i];
    const qstream::PolicyOutput o = qstream::forward(params, features);
    if (action_mean) *action_mean = o.action_mean;
    if (value) *value = o.value;
  });
}

void qs_simulate_options_init(qs_simulate_options* o) {
  if (!o) return;
  *o = qs_simulate_options{0.01, 20, 10.0, 0, nullptr, 1};
}

void qs_train_options_init(qs_train_options* o) {
  if (!o) return;
  *o = qs_train_options{"detuning", 5000, 0, nullptr, 0, nullptr, nullptr};
}

void qs_evaluate_options_init(qs_evaluate_options* o) {
  if (!o) return;
  *o = qs_evaluate_options{nullptr, "detuning", 100, 0, 1};
}

void qs_transfer_options_init(qs_transfer_options* o) {
  if (!o) return;
  *o = qs_transfer_options{nullptr, "hybrid", 2000, 0, 100, nullptr, nullptr, nullptr};
}

qs_status qs_simulate(const qs_simulate_options* o, const char* out_dir) {
  return guarded([&] {
    require_arg(o, "options");
    require_arg(out_dir, "out_dir");
    qstream::SimulateArgs args;
    args.dt_ratio = o->dt_ratio;
    args.ensemble = o->ensemble;
    args.sigma = o->sigma;
    args.seed = o->seed;
    args.workers = std::max(1, o->workers);
    if (o->checkpoint) args.checkpoint = o->checkpoint;
    qstream::run_simulate(args, out_dir);
  });
}

qs_status qs_train(const qs_train_options* o, const char* out_dir, qs_fidelity_summary* eval) {
  return guarded([&] {
    require_arg(o, "options");
    require_arg(o->noise, "options->noise");
    require_arg(out_dir, "out_dir");
    qstream::TrainArgs args;
    args.preset = qstream::parse_noise_preset(o->noise);
    args.episodes = o->episodes;
    args.seed = o->seed;
    if (o->config_path) args.config_file = o->config_path;
    if (o->workers > 0) args.overrides["workers"] = o->workers;
    qstream::run_train(args, out_dir, wrap_progress(o->progress, o->progress_user_data));
    const auto stats = qstream::read_json_file(std::filesystem::path(out_dir) / "stats.json");
    fill_summary(stats.at("eval"), eval);
  });
}

qs_status qs_evaluate(const qs_evaluate_options* o, const char* out_dir, qs_fidelity_summary* eval) {
  return guarded([&] {
    require_arg(o, "options");
    require_arg(o->checkpoint, "options->checkpoint");
    require_arg(o->noise, "options->noise");
    require_arg(out_dir, "out_dir");
    qstream::EvaluateArgs args;
    args.checkpoint = o->checkpoint;
    args.preset = qstream::parse_noise_preset(o->noise);
    args.episodes = o->episodes;
    args.seed = o->seed;
    args.workers = std::max(1, o->workers);
    qstream::run_evaluate(args, out_dir);
    const auto stats = qstream::read_json_file(std::filesystem::path(out_dir) / "stats.json");
    fill_summary(stats.at("eval"), eval);
  });
}

qs_status qs_transfer(const qs_transfer_options* o, const char* out_dir, qs_fidelity_summary* before,
                      qs_fidelity_summary* after) {
  return guarded([&] {
    require_arg(o, "options");
    require_arg(o->checkpoint, "options->checkpoint");
    require_arg(out_dir, "out_dir");
    qstream::TransferArgs args;
    args.checkpoint = o->checkpoint;
    args.preset = qstream::parse_noise_preset(o->noise ? o->noise : "hybrid");
    args.episodes = o->episodes;
    args.seed = o->seed;
    args.eval_episodes = o->eval_episodes;
    if (o->config_path) args.config_file = o->config_path;
    qstream::run_transfer(args, out_dir, wrap_progress(o->progress, o->progress_user_data));
    const auto stats = qstream::read_json_file(std::filesystem::path(out_dir) / "stats.json");
    fill_summary(stats.at("before"), before);
    fill_summary(stats.at("after"), after);
  });
}

qs_status qs_export(const char* run_dir, const char* what, const char* out_path) {
  return guarded([&] {
    require_arg(run_dir, "run_dir");
    require_arg(what, "what");
    const qstream::CsvTable table = qstream::run_export(run_dir, qstream::parse_export_what(what));
    if (out_path) {
      qstream::write_csv(out_path, table);
    } else {
      std::cout << qstream::to_csv_string(table);
      std::cout.flush();
      if (!std::cout) throw qstream::IoError("failed to write to standard output");
    }
  });
}

qs_status qs_replay(const char* manifest_path, const char* out_dir) {
  return guarded([&] {
    require_arg(manifest_path, "manifest_path");
    require_arg(out_dir, "out_dir");
    qstream::replay_manifest(manifest_path, out_dir);
  });
}

}  // extern "C"
