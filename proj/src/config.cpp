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

#include "qstream/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "qstream/errors.hpp"

namespace qstream {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  ppo.validate();
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

RunConfig RunConfig::for_preset(NoisePreset preset) {
  RunConfig c;
  c.preset = preset;
  c.env = EnvConfig::for_preset(preset);
  return c;
}

void to_json(json& j, const NoiseModel& noise) {
  j = json{{"detuning_ratio", noise.detuning_ratio},
           {"detuning_mode", noise.detuning_mode == DetuningMode::kProportional ? "proportional" : "fixed"},
           {"fixed_detuning", noise.fixed_detuning},
           {"dephasing_rate", noise.dephasing_rate},
           {"relaxation_rate", noise.relaxation_rate}};
}

void to_json(json& j, const EnvConfig& env) {
  j = json{{"total_time", env.total_time},
           {"n_steps", env.n_steps},
           {"omega_max", env.omega_max},
           {"pointer_sigma", env.pointer_sigma},
           {"action_noise_std", env.action_noise_std},
           {"success_threshold", env.success_threshold},
           {"fail_threshold", env.fail_threshold},
           {"success_bonus", env.success_bonus},
           {"fail_penalty", env.fail_penalty},
           {"consecutive_success_required", env.consecutive_success_required},
           {"noise", env.noise},
           {"substeps", env.substeps},
           {"measurement_enabled", env.measurement_enabled}};
}

void to_json(json& j, const PpoHyper& h) {
  j = json{{"learning_rate", h.learning_rate},   {"batch_episodes", h.batch_episodes},
           {"clip_epsilon", h.clip_epsilon},     {"discount", h.discount},
           {"gae_lambda", h.gae_lambda},         {"update_epochs", h.update_epochs},
           {"value_coef", h.value_coef},         {"entropy_coef", h.entropy_coef},
           {"max_episodes", h.max_episodes},     {"eval_interval", h.eval_interval},
           {"minibatch_size", h.minibatch_size}, {"reward_scale", h.reward_scale},
           {"adam_beta1", h.adam_beta1},         {"adam_beta2", h.adam_beta2},
           {"adam_epsilon", h.adam_epsilon}};
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"preset", std::string(to_string(c.preset))},
           {"env", c.env},
           {"ppo", c.ppo},
           {"eval_episodes", c.eval_episodes},
           {"curve_threshold", c.curve_threshold},
           {"workers", c.workers},
           {"keep_best", c.keep_best}};
}

void merge_json(const json& j, NoiseModel& noise) {
  reject_unknown(j, {"detuning_ratio", "detuning_mode", "fixed_detuning", "dephasing_rate", "relaxation_rate"},
                 "noise");
  take(j, "detuning_ratio", noise.detuning_ratio);
  if (j.contains("detuning_mode")) {
    std::string mode;
    take(j, "detuning_mode", mode);
    if (mode == "proportional") {
      noise.detuning_mode = DetuningMode::kProportional;
    } else if (mode == "fixed") {
      noise.detuning_mode = DetuningMode::kFixed;
    } else {
      throw ConfigError("noise.detuning_mode must be 'proportional' or 'fixed'");
    }
  }
  take(j, "fixed_detuning", noise.fixed_detuning);
  take(j, "dephasing_rate", noise.dephasing_rate);
  take(j, "relaxation_rate", noise.relaxation_rate);
}

void merge_json(const json& j, EnvConfig& env) {
  reject_unknown(j,
                 {"total_time", "n_steps", "omega_max", "pointer_sigma", "action_noise_std", "success_threshold",
                  "fail_threshold", "success_bonus", "fail_penalty", "consecutive_success_required", "noise",
                  "substeps", "measurement_enabled", "dt"},
                 "env");
  take(j, "total_time", env.total_time);
  take(j, "n_steps", env.n_steps);
  take(j, "omega_max", env.omega_max);
  take(j, "pointer_sigma", env.pointer_sigma);
  take(j, "action_noise_std", env.action_noise_std);
  take(j, "success_threshold", env.success_threshold);
  take(j, "fail_threshold", env.fail_threshold);
  take(j, "success_bonus", env.success_bonus);
  take(j, "fail_penalty", env.fail_penalty);
  take(j, "consecutive_success_required", env.consecutive_success_required);
  if (j.contains("noise")) merge_json(j.at("noise"), env.noise);
  take(j, "substeps", env.substeps);
  take(j, "measurement_enabled", env.measurement_enabled);
  if (j.contains("dt")) {
    // dt is derived; accept it only when consistent.
    double dt = 0.0;
    take(j, "dt", dt);
    if (std::abs(dt * env.n_steps - env.total_time) > 1e-12) throw ConfigError("env: n_steps * dt must equal total_time");
  }
}

void merge_json(const json& j, PpoHyper& h) {
  reject_unknown(j,
                 {"learning_rate", "batch_episodes", "clip_epsilon", "discount", "gae_lambda", "update_epochs",
                  "value_coef", "entropy_coef", "max_episodes", "eval_interval", "minibatch_size", "reward_scale",
                  "adam_beta1", "adam_beta2", "adam_epsilon"},
                 "ppo");
  take(j, "learning_rate", h.learning_rate);
  take(j, "batch_episodes", h.batch_episodes);
  take(j, "clip_epsilon", h.clip_epsilon);
  take(j, "discount", h.discount);
  take(j, "gae_lambda", h.gae_lambda);
  take(j, "update_epochs", h.update_epochs);
  take(j, "value_coef", h.value_coef);
  take(j, "entropy_coef", h.entropy_coef);
  take(j, "max_episodes", h.max_episodes);
  take(j, "eval_interval", h.eval_interval);
  take(j, "minibatch_size", h.minibatch_size);
  take(j, "reward_scale", h.reward_scale);
  take(j, "adam_beta1", h.adam_beta1);
  take(j, "adam_beta2", h.adam_beta2);
  take(j, "adam_epsilon", h.adam_epsilon);
}

void merge_json(const json& j, RunConfig& c) {
  reject_unknown(j, {"preset", "env", "ppo", "eval_episodes", "curve_threshold", "workers", "keep_best"}, "config");
  if (j.contains("preset")) {
    std::string name;
    take(j, "preset", name);
    c.preset = parse_noise_preset(name);
    c.env = EnvConfig::for_preset(c.preset);
  }
  if (j.contains("env")) merge_json(j.at("env"), c.env);
  if (j.contains("ppo")) merge_json(j.at("ppo"), c.ppo);
  take(j, "eval_episodes", c.eval_episodes);
  take(j, "curve_threshold", c.curve_threshold);
  take(j, "workers", c.workers);
  take(j, "keep_best", c.keep_best);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file_atomic(const std::filesystem::path& path, const json& j) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace qstream
