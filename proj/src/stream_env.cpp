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

#include "qstream/stream_env.hpp"

#include <algorithm>
#include <cmath>

#include "qstream/errors.hpp"

namespace qstream {

std::string_view to_string(NoisePreset preset) {
  switch (preset) {
    case NoisePreset::kNone: return "none";
    case NoisePreset::kDetuning: return "detuning";
    case NoisePreset::kDephasing: return "dephasing";
    case NoisePreset::kRelaxation: return "relaxation";
    case NoisePreset::kHybrid: return "hybrid";
  }
  return "none";
}

NoisePreset parse_noise_preset(std::string_view name) {
  for (auto p : {NoisePreset::kNone, NoisePreset::kDetuning, NoisePreset::kDephasing, NoisePreset::kRelaxation,
                 NoisePreset::kHybrid}) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("unknown noise preset '" + std::string(name) + "'");
}

NoiseModel noise_for(NoisePreset preset) {
  switch (preset) {
    case NoisePreset::kNone: return NoiseModel::none();
    case NoisePreset::kDetuning: return NoiseModel::detuning();
    case NoisePreset::kDephasing: return NoiseModel::dephasing();
    case NoisePreset::kRelaxation: return NoiseModel::relaxation();
    case NoisePreset::kHybrid: return NoiseModel::hybrid();
  }
  return NoiseModel::none();
}

void EnvConfig::validate() const {
  if (!(total_time > 0.0)) throw ConfigError("env: total_time must be positive");
  if (n_steps < 1) throw ConfigError("env: n_steps must be >= 1");
  if (!(omega_max > 0.0) || omega_max > kOmegaMax + 1e-12) throw ConfigError("env: omega_max must lie in (0, 3*pi]");
  if (!(pointer_sigma > 0.0)) throw ConfigError("env: pointer_sigma must be positive");
  if (!(action_noise_std >= 0.0)) throw ConfigError("env: action_noise_std must be >= 0");
  if (consecutive_success_required != 1 && consecutive_success_required != 4) {
    throw ConfigError("env: consecutive_success_required must be 1 or 4");
  }
  if (substeps < 1) throw ConfigError("env: substeps must be >= 1");
  noise.validate();
}

EnvConfig EnvConfig::for_preset(NoisePreset preset) {
  EnvConfig config;
  config.noise = noise_for(preset);
  if (preset == NoisePreset::kRelaxation || preset == NoisePreset::kHybrid) config.consecutive_success_required = 4;
  return config;
}

double apply_action_noise(double action_norm, double std, Rng& rng) {
  require(action_norm >= 0.0 && action_norm <= 1.0, "apply_action_noise: action must lie in [0, 1]");
  if (std <= 0.0) return action_norm;
  std::normal_distribution<double> noise(0.0, std);
  return std::clamp(action_norm + noise(rng), 0.0, 1.0);
}

RLState compose_state(double last_action_norm, int q0, int step_index, int n_steps, const QubitDensityMatrix& rho,
                      const PointerGrid& grid) {
  require(n_steps > 0 && step_index >= 0 && step_index <= n_steps, "compose_state: step index out of range");
  RLState s;
  s.last_action_normalized = last_action_norm;
  s.weak_value_normalized = normalize_weak_value(q0, grid);
  s.time_fraction = static_cast<double>(step_index) / n_steps;
  s.rho11_abs = std::abs(rho(0, 0));
  s.rho12_abs = std::abs(rho(0, 1));
  s.rho21_abs = std::abs(rho(1, 0));
  s.rho22_abs = std::abs(rho(1, 1));
  return s;
}

RewardOutcome compute_reward(const QubitDensityMatrix& rho, int step_index, int streak, const EnvConfig& config) {
  RewardOutcome out;
  const double p1 = rho.rho22();
  out.reward = -std::abs(p1 - 1.0);
  out.streak = std::abs(p1) > config.success_threshold ? streak + 1 : 0;
  if (out.streak >= config.consecutive_success_required) {
    out.reward += config.success_bonus;
    out.done = true;
    out.success = true;
    return out;
  }
  if (step_index >= config.n_steps) {
    out.done = true;
    if (std::abs(rho.rho11()) > config.fail_threshold) out.reward -= config.fail_penalty;
  }
  return out;
}

double target_fidelity(const QubitDensityMatrix& rho) {
  return uhlmann_fidelity(rho, QubitDensityMatrix::excited());
}

StreamEnv::StreamEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.measurement_enabled) pointer_ = make_gaussian_pointer(config_.pointer_sigma);
}

RLState StreamEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  rho_ = QubitDensityMatrix::ground();
  state_ = RLState{};
  log_ = EpisodeLog{};
  log_.terminal_fidelity = target_fidelity(rho_);
  step_ = 0;
  streak_ = 0;
  done_ = false;
  started_ = true;
  return state_;
}

StepResult StreamEnv::step(double action_norm) {
  if (!started_) throw UsageError("StreamEnv::step called before reset");
  if (done_) throw UsageError("StreamEnv::step called after the episode finished; call reset");
  require(std::isfinite(action_norm) && action_norm >= 0.0 && action_norm <= 1.0,
          "StreamEnv::step: action must lie in [0, 1]");

  const double noisy = apply_action_noise(action_norm, config_.action_noise_std, rng_);
  const double omega = noisy * config_.omega_max;
  rho_ = evolve_interval(rho_, DriveSpec{omega}, config_.noise, config_.dt(), config_.substeps);

  int q0 = 0;
  if (pointer_) {
    MeasurementOutcome m = sample_and_collapse(rho_, *pointer_, rng_);
    q0 = m.q0;
    rho_ = std::move(m.posterior);
  }
  ++step_;

  StepResult result;
  result.state = compose_state(action_norm, q0, step_, config_.n_steps, rho_);
  const RewardOutcome r = compute_reward(rho_, step_, streak_, config_);
  streak_ = r.streak;
  done_ = r.done;
  result.reward = r.reward;
  result.done = r.done;
  result.info = {target_fidelity(rho_), q0, omega};
  state_ = result.state;

  EpisodeRecord rec;
  rec.step = step_;
  rec.t = step_ * config_.dt();
  rec.action_norm = action_norm;
  rec.noisy_action = noisy;
  rec.omega = omega;
  rec.q0 = q0;
  rec.exp_x = expectation(rho_, pauli::x());
  rec.exp_y = expectation(rho_, pauli::y());
  rec.exp_z = expectation(rho_, pauli::z());
  rec.rho11 = rho_.rho11();
  rec.rho22 = rho_.rho22();
  rec.reward = r.reward;
  rec.fidelity = result.info.fidelity;
  log_.records.push_back(rec);
  log_.total_reward += r.reward;
  log_.terminal_fidelity = rec.fidelity;
  log_.success = log_.success || r.success;
  return result;
}

}  // namespace qstream
