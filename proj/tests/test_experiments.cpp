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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "qstream/checkpoint.hpp"
#include "qstream/config.hpp"
#include "qstream/csv.hpp"
#include "qstream/errors.hpp"
#include "qstream/experiments.hpp"
#include "test_util.hpp"

namespace qstream {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every CSV under `dir`, keyed by relative path.
std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

TEST(Seeds, DerivedSeedsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, 0, 0), derive_seed(1, 0, 0));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
  EXPECT_NE(stream_seed(1, SeedStream::kEnv, 3), stream_seed(1, SeedStream::kPolicy, 3));
}

TEST(Intervals, Ratios) {
  EXPECT_EQ(intervals_for_ratio(0.1), 10);
  EXPECT_EQ(intervals_for_ratio(0.01), 100);
  EXPECT_EQ(intervals_for_ratio(0.001), 1000);
  EXPECT_EQ(intervals_for_ratio(0.25), 4);
  EXPECT_THROW(intervals_for_ratio(0.3), ConfigError);
  EXPECT_THROW(intervals_for_ratio(0.0), ConfigError);
  EXPECT_THROW(intervals_for_ratio(1.5), ConfigError);
}

TEST(FidelityStats, PopulationMoments) {
  const auto s = FidelityStats::from({0.9, 1.0, 0.8, 0.9});
  EXPECT_EQ(s.episode_count, 4);
  EXPECT_NEAR(s.mean, 0.9, 1e-15);
  EXPECT_NEAR(s.std, std::sqrt(0.005), 1e-15);
  EXPECT_EQ(s.min, 0.8);
  EXPECT_EQ(s.max, 1.0);
  EXPECT_EQ(FidelityStats::from({}).episode_count, 0);
}

TEST(LearningCurve, FirstSustainedSuccess) {
  std::vector<LearningCurvePoint> curve;
  for (int i = 1; i <= 30; ++i) curve.push_back({i, 0.0, i < 12 ? 0.5 : 0.99, 50});
  // The 10-episode window ending at episode 21 is the first all-high one.
  EXPECT_EQ(first_sustained_success(curve, 0.95), 21);
  EXPECT_FALSE(first_sustained_success(curve, 0.995).has_value());
  const CsvTable t = learning_curve_table(curve);
  EXPECT_EQ(t.header, (std::vector<std::string>{"episode", "total_reward", "final_fidelity", "steps"}));
  EXPECT_EQ(t.rows.size(), 30u);
}

TEST(TrajectoryCsv, ColumnsMatchInterface) {
  StreamEnv env(EnvConfig{});
  env.reset(1);
  for (int i = 0; i < 5; ++i) env.step(0.2);
  const CsvTable t = episode_log_table(env.log());
  EXPECT_EQ(t.header, (std::vector<std::string>{"step", "t", "action_norm", "omega", "q0", "exp_x", "exp_y", "exp_z",
                                                "rho11", "rho22", "reward", "fidelity"}));
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_EQ(t.number(4, "rho22"), env.log().records[4].rho22);
  EXPECT_EQ(t.number(4, "reward"), env.log().records[4].reward);
  EXPECT_EQ(episode_log_table(EpisodeLog{}).rows.size(), 0u);
}

TEST(Ensemble, ReferenceReachesExcitedState) {
  for (double ratio : {0.1, 0.01, 0.001}) {
    EnsembleOptions opt;
    opt.dt_ratio = ratio;
    opt.ensemble = 2;
    const auto data = run_ensemble(opt);
    EXPECT_EQ(static_cast<int>(data.reference.records.size()), data.intervals);
    EXPECT_NEAR(data.reference.records.back().exp_z, -1.0, 1e-8) << ratio;
  }
}

TEST(Ensemble, DeterministicAndWorkerIndependent) {
  EnsembleOptions opt;
  opt.ensemble = 20;
  opt.seed = 77;
  const auto a = run_ensemble(opt);
  opt.workers = 3;
  const auto b = run_ensemble(opt);
  ASSERT_EQ(a.trajectories.size(), 20u);
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    EXPECT_EQ(to_csv_string(episode_log_table(a.trajectories[i])), to_csv_string(episode_log_table(b.trajectories[i])));
  }
  EXPECT_EQ(to_csv_string(ensemble_mean_table(a)), to_csv_string(ensemble_mean_table(b)));
  opt.seed = 78;
  EXPECT_NE(to_csv_string(ensemble_mean_table(run_ensemble(opt))), to_csv_string(ensemble_mean_table(a)));
}

TEST(Ensemble, MeanTracksNonselectiveComposition) {
  EnsembleOptions opt;
  opt.ensemble = 400;
  opt.seed = 5;
  const auto data = run_ensemble(opt);
  int outside = 0;
  for (const auto& p : data.mean) {
    EXPECT_EQ(p.count, 400);
    EXPECT_NEAR(p.mean_x, 0.0, 1e-12);
    if (std::abs(p.mean_y - p.oracle_y) > 3.0 * p.se_y + 1e-12) ++outside;
    if (std::abs(p.mean_z - p.oracle_z) > 3.0 * p.se_z + 1e-12) ++outside;
    if (std::abs(p.mean_q0 - p.oracle_q0) > 3.0 * p.se_q0 + 1e-12) ++outside;
  }
  EXPECT_EQ(outside, 0);
}

TEST(Ensemble, InvalidArguments) {
  EnsembleOptions opt;
  opt.dt_ratio = 0.3;
  EXPECT_THROW(run_ensemble(opt), ConfigError);
  opt = EnsembleOptions{};
  opt.ensemble = 0;
  EXPECT_THROW(run_ensemble(opt), ConfigError);
  opt = EnsembleOptions{};
  opt.drive = DriveMode::kCheckpoint;
  EXPECT_THROW(run_ensemble(opt), ConfigError);
}

class RunDirs : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(testing::scratch_dir("rundirs"));
    TrainArgs args;
    args.preset = NoisePreset::kDephasing;
    args.episodes = 40;
    args.seed = 3;
    args.overrides = json{{"eval_episodes", 5}, {"ppo", {{"eval_interval", 20}}}};
    run_train(args, *root_ / "train");
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }
  static fs::path root() { return *root_; }
  static fs::path checkpoint() { return *root_ / "train" / "checkpoint.json"; }

 private:
  static fs::path* root_;
};
fs::path* RunDirs::root_ = nullptr;

TEST_F(RunDirs, TrainWritesArtifacts) {
  const fs::path dir = root() / "train";
  for (const char* f : {"checkpoint.json", "learning_curve.csv", "validation_curve.csv", "stats.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const CsvTable curve = read_csv(dir / "learning_curve.csv");
  EXPECT_EQ(curve.rows.size(), 40u);
  const json manifest = read_json_file(dir / "manifest.json");
  EXPECT_EQ(manifest.at("command"), "train");
  EXPECT_EQ(manifest.at("master_seed"), 3);
  EXPECT_EQ(manifest.at("config").at("preset"), "dephasing");
  EXPECT_EQ(manifest.at("config").at("eval_episodes"), 5);
  EXPECT_TRUE(manifest.contains("software_version"));
  EXPECT_TRUE(manifest.at("timings").contains("total_seconds"));
  EXPECT_EQ(read_csv(dir / "validation_curve.csv").rows.size(), 2u);
}

TEST_F(RunDirs, TrainingIsReproducible) {
  TrainArgs args;
  args.preset = NoisePreset::kDephasing;
  args.episodes = 40;
  args.seed = 3;
  args.overrides = json{{"eval_episodes", 5}, {"ppo", {{"eval_interval", 20}}}};
  run_train(args, root() / "train_again");
  EXPECT_EQ(csv_files(root() / "train"), csv_files(root() / "train_again"));
  EXPECT_EQ(load_checkpoint(checkpoint()).params.actor.flatten(),
            load_checkpoint(root() / "train_again" / "checkpoint.json").params.actor.flatten());
}

TEST_F(RunDirs, ReplayOfTrainIsBitExact) {
  replay_manifest(root() / "train" / "manifest.json", root() / "train_replay");
  EXPECT_EQ(csv_files(root() / "train"), csv_files(root() / "train_replay"));
  EXPECT_EQ(checkpoint_to_json(load_checkpoint(checkpoint())).at("actor_weights"),
            checkpoint_to_json(load_checkpoint(root() / "train_replay" / "checkpoint.json")).at("actor_weights"));
}

TEST_F(RunDirs, CheckpointReproducesRecordedEvaluation) {
  const Checkpoint cp = load_checkpoint(checkpoint());
  const json eval = cp.metadata.at("eval");
  const auto again = evaluate_policy(cp.params, EnvConfig::for_preset(NoisePreset::kDephasing),
                                     eval.at("episodes").get<int>(), eval.at("seed").get<std::uint64_t>());
  EXPECT_EQ(again.stats.mean, eval.at("mean").get<double>());
}

TEST_F(RunDirs, EvaluateIsDeterministic) {
  EvaluateArgs args;
  args.checkpoint = checkpoint();
  args.preset = NoisePreset::kHybrid;
  args.episodes = 6;
  args.seed = 11;
  const json a = run_evaluate(args, root() / "eval_a");
  args.workers = 2;
  const json b = run_evaluate(args, root() / "eval_b");
  EXPECT_EQ(a.at("results"), b.at("results"));
  EXPECT_EQ(csv_files(root() / "eval_a"), csv_files(root() / "eval_b"));
  replay_manifest(root() / "eval_a" / "manifest.json", root() / "eval_replay");
  EXPECT_EQ(csv_files(root() / "eval_a"), csv_files(root() / "eval_replay"));
  EXPECT_EQ(slurp(root() / "eval_a" / "stats.json"), slurp(root() / "eval_replay" / "stats.json"));
}

TEST_F(RunDirs, ZeroEpisodeTransferEqualsEvaluation) {
  TransferArgs t;
  t.checkpoint = checkpoint();
  t.episodes = 0;
  t.seed = 9;
  t.eval_episodes = 6;
  run_transfer(t, root() / "transfer0");
  const json stats = read_json_file(root() / "transfer0" / "stats.json");
  EXPECT_EQ(stats.at("before"), stats.at("after"));

  EvaluateArgs e;
  e.checkpoint = checkpoint();
  e.preset = NoisePreset::kHybrid;
  e.episodes = 6;
  e.seed = 9;
  run_evaluate(e, root() / "eval_hybrid");
  EXPECT_EQ(read_json_file(root() / "eval_hybrid" / "stats.json").at("eval"), stats.at("after"));
}

TEST_F(RunDirs, TransferTrainsAndReplays) {
  TransferArgs t;
  t.checkpoint = checkpoint();
  t.episodes = 20;
  t.seed = 4;
  t.eval_episodes = 4;
  const json m = run_transfer(t, root() / "transfer");
  EXPECT_EQ(m.at("config").at("preset"), "hybrid");
  EXPECT_EQ(read_csv(root() / "transfer" / "learning_curve.csv").rows.size(), 20u);
  replay_manifest(root() / "transfer" / "manifest.json", root() / "transfer_replay");
  EXPECT_EQ(csv_files(root() / "transfer"), csv_files(root() / "transfer_replay"));
}

// A fresh network already oscillates through the target and early termination
// rewards that, so the poor baseline here is a policy pinned to zero drive.
TEST_F(RunDirs, IdlePolicyIsPoor) {
  Rng rng(stream_seed(123, SeedStream::kInit, 0));
  PolicyParams idle = PolicyParams::initialize(rng);
  auto& last = idle.actor.layers().back();
  last.weight.setZero();
  last.bias.setConstant(-50.0);
  const auto eval = evaluate_policy(idle, EnvConfig::for_preset(NoisePreset::kDetuning), 20, 1);
  EXPECT_LT(eval.stats.mean, 0.5);
}

TEST_F(RunDirs, SimulateAndReplayAreByteIdentical) {
  SimulateArgs s;
  s.ensemble = 20;
  s.seed = 21;
  run_simulate(s, root() / "sim");
  EXPECT_EQ(fs::exists(root() / "sim" / "trajectories" / "traj_0019.csv"), true);
  const CsvTable mean = read_csv(root() / "sim" / "ensemble_mean.csv");
  EXPECT_EQ(mean.rows.size(), 100u);
  EXPECT_NEAR(read_csv(root() / "sim" / "reference.csv").number(99, "exp_z"), -1.0, 1e-8);
  replay_manifest(root() / "sim" / "manifest.json", root() / "sim_replay");
  EXPECT_EQ(csv_files(root() / "sim"), csv_files(root() / "sim_replay"));
  run_simulate(s, root() / "sim_again");
  EXPECT_EQ(csv_files(root() / "sim"), csv_files(root() / "sim_again"));
}

TEST_F(RunDirs, SimulateWithCheckpointDrive) {
  SimulateArgs s;
  s.ensemble = 4;
  s.seed = 2;
  s.checkpoint = checkpoint();
  run_simulate(s, root() / "sim_policy");
  const CsvTable mean = read_csv(root() / "sim_policy" / "ensemble_mean.csv");
  EXPECT_FALSE(mean.rows.empty());
  EXPECT_EQ(mean.rows[0][mean.column("oracle_z")], "nan");
}

TEST_F(RunDirs, ExportFamilies) {
  const CsvTable curve = run_export(root() / "train", ExportWhat::kLearningCurve);
  EXPECT_EQ(curve.rows.size(), 40u);
  const CsvTable stats = run_export(root() / "train", ExportWhat::kStats);
  ASSERT_EQ(stats.rows.size(), 1u);
  EXPECT_EQ(stats.rows[0][0], "eval");
  const CsvTable traj = run_export(root() / "train", ExportWhat::kTrajectories);
  EXPECT_EQ(traj.header.front(), "trajectory");
  EXPECT_EQ(traj.header.size(), kTrajectoryColumns.size() + 1);
  EXPECT_FALSE(traj.rows.empty());
  EXPECT_EQ(traj.rows[0][0], "eval_0000");
  EXPECT_THROW(run_export(root() / "missing", ExportWhat::kStats), IoError);
  EXPECT_THROW(parse_export_what("plots"), ConfigError);
}

TEST_F(RunDirs, ConfigFileAndOverrides) {
  std::ofstream(root() / "cfg.json") << R"({"preset": "relaxation", "ppo": {"batch_episodes": 10}, "eval_episodes": 2})";
  TrainArgs args;
  args.preset = NoisePreset::kDetuning;
  args.episodes = 10;
  args.config_file = root() / "cfg.json";
  const json m = run_train(args, root() / "train_cfg");
  EXPECT_EQ(m.at("config").at("preset"), "detuning");
  EXPECT_EQ(m.at("config").at("ppo").at("batch_episodes"), 10);
  EXPECT_EQ(m.at("config").at("eval_episodes"), 2);

  std::ofstream(root() / "bad.json") << R"({"ppo": {"batch": 10}})";
  args.config_file = root() / "bad.json";
  EXPECT_THROW(run_train(args, root() / "train_bad"), ConfigError);
}

}  // namespace
}  // namespace qstream
