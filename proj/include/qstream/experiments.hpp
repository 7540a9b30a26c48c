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

#ifndef QSTREAM_EXPERIMENTS_HPP_
#define QSTREAM_EXPERIMENTS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qstream/checkpoint.hpp"
#include "qstream/config.hpp"
#include "qstream/csv.hpp"
#include "qstream/ppo.hpp"
#include "qstream/stream_env.hpp"

namespace qstream {

// Independent random streams derived from one master seed.
enum class SeedStream : std::uint64_t {
  kInit = 1,
  kEnv = 2,
  kPolicy = 3,
  kShuffle = 4,
  kEval = 5,
  kValidation = 6,
  kEnsemble = 7,
};

inline std::uint64_t stream_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) {
  return derive_seed(master, index, static_cast<std::uint64_t>(stream));
}

// ---------------------------------------------------------------------------
// Datasets and their CSV layouts.

inline const std::vector<std::string> kTrajectoryColumns = {
    "step", "t", "action_norm", "omega", "q0", "exp_x", "exp_y", "exp_z", "rho11", "rho22", "reward", "fidelity"};

CsvTable episode_log_table(const EpisodeLog& log);

struct FidelityStats {
  int episode_count = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::vector<double> per_episode;

  static FidelityStats from(std::vector<double> fidelities);
};
nlohmann::json to_json_value(const FidelityStats& stats);

struct LearningCurvePoint {
  int episode = 0;
  double total_reward = 0.0;
  double final_fidelity = 0.0;
  int steps = 0;
};
CsvTable learning_curve_table(const std::vector<LearningCurvePoint>& curve);

// First episode at which the moving mean of final fidelity over `window`
// episodes exceeds `threshold`.
std::optional<int> first_sustained_success(const std::vector<LearningCurvePoint>& curve, double threshold,
                                           int window = 10);

// ---------------------------------------------------------------------------
// Open-loop ensembles of measured trajectories.

enum class DriveMode { kPiPulse, kCheckpoint };

struct EnsembleOptions {
  double dt_ratio = 0.01;  // measurement interval / total time
  int ensemble = 20;
  double sigma = 10.0;
  std::uint64_t seed = 0;
  DriveMode drive = DriveMode::kPiPulse;
  std::optional<Checkpoint> checkpoint;  // required for kCheckpoint
  // Preset used in checkpoint mode; defaults to the checkpoint's own.
  std::optional<NoisePreset> preset;
  double total_time = 1.0;
  // RK4 sub-step length; each interval uses max(1, round(dt / this)) steps.
  double target_substep = 0.001;
  int workers = 1;
};

struct EnsembleMeanPoint {
  int step = 0;
  double t = 0.0;
  int count = 0;
  double mean_x = 0.0, mean_y = 0.0, mean_z = 0.0;
  double se_x = 0.0, se_y = 0.0, se_z = 0.0;
  double mean_q0 = 0.0, se_q0 = 0.0;
  // Outcome-averaged prediction (evolve then non-selective map per interval).
  // NaN in checkpoint mode, where the drive depends on the trajectory.
  double oracle_x = 0.0, oracle_y = 0.0, oracle_z = 0.0, oracle_q0 = 0.0;
};

struct EnsembleDataset {
  double dt = 0.0;
  int intervals = 0;
  std::vector<EpisodeLog> trajectories;
  EpisodeLog reference;  // same drive, no measurement
  std::vector<EnsembleMeanPoint> mean;
};

// Number of measurement intervals for `dt_ratio`; ConfigError when the ratio
// does not divide the total time.
int intervals_for_ratio(double dt_ratio);

EnsembleDataset run_ensemble(const EnsembleOptions& options);
CsvTable ensemble_mean_table(const EnsembleDataset& data);

// ---------------------------------------------------------------------------
// Training and evaluation.

using ProgressFn = std::function<void(int episodes_done, const FidelityStats* validation)>;

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LearningCurvePoint> curve;
  // Periodic validation: (episodes trained, stats).
  std::vector<std::pair<int, FidelityStats>> validation;
  std::optional<int> first_success_episode;
  int episodes_trained = 0;
};

// PPO training. Starts from `initial` when given (transfer) and otherwise from
// a fresh initialization derived from `seed`.
TrainResult train_agent(const RunConfig& config, int episodes, std::uint64_t seed,
                        const PolicyParams* initial = nullptr, const ProgressFn& progress = {});

struct EvaluationResult {
  FidelityStats stats;
  std::vector<EpisodeLog> logs;
};

// Policy mean as the action (no exploration); the environment's own action
// noise still applies.
EvaluationResult evaluate_policy(const PolicyParams& params, const EnvConfig& env, int episodes,
                                 std::uint64_t seed, int workers = 1);

// Runs a single episode with the deterministic policy.
EpisodeLog run_policy_episode(const PolicyParams& params, const EnvConfig& env, std::uint64_t env_seed);

// ---------------------------------------------------------------------------
// Run directories: artifacts plus manifest.json.

struct SimulateArgs {
  double dt_ratio = 0.01;
  int ensemble = 20;
  double sigma = 10.0;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> checkpoint;
  int workers = 1;
};

struct TrainArgs {
  NoisePreset preset = NoisePreset::kDetuning;
  int episodes = 5000;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> config_file;
  nlohmann::json overrides = nlohmann::json::object();  // merged after the file
};

struct EvaluateArgs {
  std::filesystem::path checkpoint;
  NoisePreset preset = NoisePreset::kDetuning;
  int episodes = 100;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct TransferArgs {
  std::filesystem::path checkpoint;
  NoisePreset preset = NoisePreset::kHybrid;
  int episodes = 2000;
  std::uint64_t seed = 0;
  int eval_episodes = 100;
  std::optional<std::filesystem::path> config_file;
};

enum class ExportWhat { kTrajectories, kLearningCurve, kStats };
ExportWhat parse_export_what(std::string_view name);

// Each returns the manifest that was written to out_dir/manifest.json.
nlohmann::json run_simulate(const SimulateArgs& args, const std::filesystem::path& out_dir);
nlohmann::json run_train(const TrainArgs& args, const std::filesystem::path& out_dir,
                         const ProgressFn& progress = {});
nlohmann::json run_evaluate(const EvaluateArgs& args, const std::filesystem::path& out_dir);
nlohmann::json run_transfer(const TransferArgs& args, const std::filesystem::path& out_dir,
                            const ProgressFn& progress = {});

// Consolidated CSV of one artifact family of a run directory.
CsvTable run_export(const std::filesystem::path& run_dir, ExportWhat what);

// Re-executes the command recorded in a manifest into `out_dir`.
nlohmann::json replay_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

}  // namespace qstream

#endif  // QSTREAM_EXPERIMENTS_HPP_
