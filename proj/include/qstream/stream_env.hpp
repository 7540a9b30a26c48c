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

#ifndef QSTREAM_STREAM_ENV_HPP_
#define QSTREAM_STREAM_ENV_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qstream/density.hpp"
#include "qstream/lindblad.hpp"
#include "qstream/rng.hpp"
#include "qstream/weak_measurement.hpp"

namespace qstream {

enum class NoisePreset { kNone, kDetuning, kDephasing, kRelaxation, kHybrid };

std::string_view to_string(NoisePreset preset);
// Throws ConfigError for unknown names.
NoisePreset parse_noise_preset(std::string_view name);
NoiseModel noise_for(NoisePreset preset);

struct EnvConfig {
  double total_time = 1.0;
  int n_steps = 100;
  double omega_max = kOmegaMax;
  double pointer_sigma = 10.0;
  double action_noise_std = 0.02;
  double success_threshold = 0.99;
  double fail_threshold = 0.05;
  double success_bonus = 1000.0;
  double fail_penalty = 100.0;
  int consecutive_success_required = 1;
  NoiseModel noise;
  int substeps = 10;
  // Test mode: when false no pointer is coupled and q0 reads as 0.
  bool measurement_enabled = true;

  double dt() const { return total_time / n_steps; }

  // Throws ConfigError.
  void validate() const;

  // Training environments. Relaxation and hybrid demand four consecutive
  // successful steps before terminating.
  static EnvConfig for_preset(NoisePreset preset);
};

struct RLState {
  double last_action_normalized = 0.0;
  double weak_value_normalized = 0.5;
  double time_fraction = 0.0;
  double rho11_abs = 1.0;
  double rho12_abs = 0.0;
  double rho21_abs = 0.0;
  double rho22_abs = 0.0;

  static constexpr std::size_t kSize = 7;
  std::array<double, kSize> to_array() const {
    return {last_action_normalized, weak_value_normalized, time_fraction, rho11_abs, rho12_abs, rho21_abs, rho22_abs};
  }
};

struct StepInfo {
  double fidelity = 0.0;
  int q0 = 0;
  double omega_applied = 0.0;
};

struct StepResult {
  RLState state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EpisodeRecord {
  int step = 0;
  double t = 0.0;
  double action_norm = 0.0;  // as requested by the controller
  double noisy_action = 0.0;
  double omega = 0.0;
  int q0 = 0;
  double exp_x = 0.0;
  double exp_y = 0.0;
  double exp_z = 0.0;
  double rho11 = 0.0;
  double rho22 = 0.0;
  double reward = 0.0;
  double fidelity = 0.0;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> records;
  double terminal_fidelity = 0.0;
  double total_reward = 0.0;
  bool success = false;
};

// Adds N(0, std^2) and clips to [0, 1].
double apply_action_noise(double action_norm, double std, Rng& rng);

RLState compose_state(double last_action_norm, int q0, int step_index, int n_steps, const QubitDensityMatrix& rho,
                      const PointerGrid& grid = {});

struct RewardOutcome {
  double reward = 0.0;
  bool done = false;
  int streak = 0;
  bool success = false;
};

// `step_index` counts completed steps (1..n_steps); `streak` is the number of
// immediately preceding steps that met the success threshold.
RewardOutcome compute_reward(const QubitDensityMatrix& rho, int step_index, int streak, const EnvConfig& config);

// Fidelity to the target |1><1|.
double target_fidelity(const QubitDensityMatrix& rho);

// Piecewise-constant pulse -> Lindblad evolution -> weak measurement ->
// reward. One instance per thread.
class StreamEnv {
 public:
  explicit StreamEnv(EnvConfig config);

  RLState reset(std::uint64_t seed);
  StepResult step(double action_norm);

  const EnvConfig& config() const { return config_; }
  const QubitDensityMatrix& rho() const { return rho_; }
  const EpisodeLog& log() const { return log_; }
  const RLState& state() const { return state_; }
  int step_index() const { return step_; }
  bool done() const { return done_; }

 private:
  EnvConfig config_;
  std::optional<GaussianPointer> pointer_;
  Rng rng_;
  QubitDensityMatrix rho_;
  RLState state_;
  EpisodeLog log_;
  int step_ = 0;
  int streak_ = 0;
  bool done_ = false;
  bool started_ = false;
};

}  // namespace qstream

#endif  // QSTREAM_STREAM_ENV_HPP_
