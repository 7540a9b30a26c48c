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

#include "qstream/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "qstream/errors.hpp"
#include "qstream/lindblad.hpp"
#include "qstream/weak_measurement.hpp"

namespace qstream {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on `workers` threads. Each index is handled by
// exactly one thread and results are stored by index, so the outcome does not
// depend on scheduling.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string n4(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", i);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

EpisodeRecord make_record(int step, double t, double action, double omega, int q0, const QubitDensityMatrix& rho,
                          double reward) {
  EpisodeRecord r;
  r.step = step;
  r.t = t;
  r.action_norm = action;
  r.noisy_action = action;
  r.omega = omega;
  r.q0 = q0;
  r.exp_x = expectation(rho, pauli::x());
  r.exp_y = expectation(rho, pauli::y());
  r.exp_z = expectation(rho, pauli::z());
  r.rho11 = rho.rho11();
  r.rho22 = rho.rho22();
  r.reward = reward;
  r.fidelity = target_fidelity(rho);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

CsvTable episode_log_table(const EpisodeLog& log) {
  CsvTable table;
  table.header = kTrajectoryColumns;
  for (const auto& r : log.records) {
    table.add_row({format_number(std::int64_t{r.step}), format_number(r.t), format_number(r.action_norm),
                   format_number(r.omega), format_number(std::int64_t{r.q0}), format_number(r.exp_x),
                   format_number(r.exp_y), format_number(r.exp_z), format_number(r.rho11), format_number(r.rho22),
                   format_number(r.reward), format_number(r.fidelity)});
  }
  return table;
}

FidelityStats FidelityStats::from(std::vector<double> fidelities) {
  FidelityStats s;
  s.episode_count = static_cast<int>(fidelities.size());
  s.per_episode = std::move(fidelities);
  if (s.per_episode.empty()) return s;
  const double n = static_cast<double>(s.per_episode.size());
  s.mean = std::accumulate(s.per_episode.begin(), s.per_episode.end(), 0.0) / n;
  double var = 0.0;
  for (double f : s.per_episode) var += (f - s.mean) * (f - s.mean);
  s.std = std::sqrt(var / n);
  const auto [lo, hi] = std::minmax_element(s.per_episode.begin(), s.per_episode.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

json to_json_value(const FidelityStats& s) {
  return json{{"episode_count", s.episode_count}, {"mean", s.mean}, {"std", s.std},
              {"min", s.min},                     {"max", s.max},   {"per_episode", s.per_episode}};
}

CsvTable learning_curve_table(const std::vector<LearningCurvePoint>& curve) {
  CsvTable table;
  table.header = {"episode", "total_reward", "final_fidelity", "steps"};
  for (const auto& p : curve) {
    table.add_row({format_number(std::int64_t{p.episode}), format_number(p.total_reward),
                   format_number(p.final_fidelity), format_number(std::int64_t{p.steps})});
  }
  return table;
}

std::optional<int> first_sustained_success(const std::vector<LearningCurvePoint>& curve, double threshold,
                                           int window) {
  if (window < 1 || static_cast<int>(curve.size()) < window) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    sum += curve[i].final_fidelity;
    if (i >= static_cast<std::size_t>(window)) sum -= curve[i - window].final_fidelity;
    if (i + 1 >= static_cast<std::size_t>(window) && sum / window > threshold) return curve[i].episode;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

int intervals_for_ratio(double dt_ratio) {
  if (!(dt_ratio > 0.0) || dt_ratio > 1.0) throw ConfigError("dt ratio must lie in (0, 1]");
  const double n = 1.0 / dt_ratio;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * rounded) {
    throw ConfigError("dt ratio " + format_number(dt_ratio) + " does not divide the total time");
  }
  return static_cast<int>(rounded);
}

EpisodeLog run_policy_episode(const PolicyParams& params, const EnvConfig& env_config, std::uint64_t env_seed) {
  StreamEnv env(env_config);
  RLState state = env.reset(env_seed);
  while (!env.done()) {
    const PolicyOutput out = forward(params, state);
    state = env.step(std::clamp(out.action_mean, 0.0, 1.0)).state;
  }
  return env.log();
}

EnsembleDataset run_ensemble(const EnsembleOptions& opt) {
  if (opt.ensemble < 1) throw ConfigError("ensemble size must be >= 1");
  if (!(opt.sigma > 0.0)) throw ConfigError("pointer sigma must be positive");
  EnsembleDataset data;
  data.intervals = intervals_for_ratio(opt.dt_ratio);
  data.dt = opt.total_time / data.intervals;
  const int substeps = std::max(1, static_cast<int>(std::lround(data.dt / opt.target_substep)));
  const int n = data.intervals;
  data.trajectories.resize(static_cast<std::size_t>(opt.ensemble));

  const bool open_loop = opt.drive == DriveMode::kPiPulse;
  if (open_loop) {
    const double omega = kFlipOmega / opt.total_time;
    const double action = omega / kOmegaMax;
    const NoiseModel noise = NoiseModel::none();
    const GaussianPointer pointer = make_gaussian_pointer(opt.sigma);
    parallel_for(opt.ensemble, opt.workers, [&](int i) {
      Rng rng(stream_seed(opt.seed, SeedStream::kEnsemble, static_cast<std::uint64_t>(i)));
      QubitDensityMatrix rho;
      EpisodeLog& log = data.trajectories[static_cast<std::size_t>(i)];
      for (int k = 1; k <= n; ++k) {
        rho = evolve_interval(rho, DriveSpec{omega}, noise, data.dt, substeps);
        MeasurementOutcome m = sample_and_collapse(rho, pointer, rng);
        rho = std::move(m.posterior);
        log.records.push_back(make_record(k, k * data.dt, action, omega, m.q0, rho, 0.0));
      }
      log.terminal_fidelity = log.records.back().fidelity;
    });
    QubitDensityMatrix rho;
    for (int k = 1; k <= n; ++k) {
      rho = evolve_interval(rho, DriveSpec{omega}, noise, data.dt, substeps);
      data.reference.records.push_back(make_record(k, k * data.dt, action, omega, 0, rho, 0.0));
    }
    data.reference.terminal_fidelity = data.reference.records.back().fidelity;
  } else {
    if (!opt.checkpoint) throw ConfigError("checkpoint drive mode requires a checkpoint");
    NoisePreset preset = NoisePreset::kNone;
    if (opt.preset) {
      preset = *opt.preset;
    } else if (opt.checkpoint->metadata.contains("preset")) {
      preset = parse_noise_preset(opt.checkpoint->metadata.at("preset").get<std::string>());
    }
    EnvConfig env = EnvConfig::for_preset(preset);
    env.n_steps = n;
    env.total_time = opt.total_time;
    env.pointer_sigma = opt.sigma;
    env.substeps = substeps;
    const PolicyParams& params = opt.checkpoint->params;
    if (params.actor.input_size() != RLState::kSize) throw ConfigError("checkpoint input size does not match the environment");
    parallel_for(opt.ensemble, opt.workers, [&](int i) {
      data.trajectories[static_cast<std::size_t>(i)] =
          run_policy_episode(params, env, stream_seed(opt.seed, SeedStream::kEnsemble, static_cast<std::uint64_t>(i)));
    });
    EnvConfig unmeasured = env;
    unmeasured.measurement_enabled = false;
    data.reference = run_policy_episode(
        params, unmeasured, stream_seed(opt.seed, SeedStream::kEnsemble, static_cast<std::uint64_t>(opt.ensemble)));
  }

  // Ensemble statistics per time point, plus the outcome-averaged oracle.
  const GaussianPointer pointer = make_gaussian_pointer(opt.sigma);
  QubitDensityMatrix oracle;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int k = 1; k <= n; ++k) {
    EnsembleMeanPoint p;
    p.step = k;
    p.t = k * data.dt;
    std::vector<std::array<double, 4>> samples;
    for (const auto& log : data.trajectories) {
      if (static_cast<int>(log.records.size()) >= k) {
        const auto& r = log.records[static_cast<std::size_t>(k - 1)];
        samples.push_back({r.exp_x, r.exp_y, r.exp_z, static_cast<double>(r.q0)});
      }
    }
    p.count = static_cast<int>(samples.size());
    std::array<double, 4> mean{};
    std::array<double, 4> se{};
    if (!samples.empty()) {
      for (const auto& s : samples) {
        for (int c = 0; c < 4; ++c) mean[c] += s[c];
      }
      for (int c = 0; c < 4; ++c) mean[c] /= p.count;
      if (p.count > 1) {
        for (int c = 0; c < 4; ++c) {
          double var = 0.0;
          for (const auto& s : samples) var += (s[c] - mean[c]) * (s[c] - mean[c]);
          se[c] = std::sqrt(var / (p.count - 1) / p.count);
        }
      }
    }
    p.mean_x = mean[0];
    p.mean_y = mean[1];
    p.mean_z = mean[2];
    p.mean_q0 = mean[3];
    p.se_x = se[0];
    p.se_y = se[1];
    p.se_z = se[2];
    p.se_q0 = se[3];
    if (open_loop) {
      const double omega = kFlipOmega / opt.total_time;
      const QubitDensityMatrix evolved = evolve_interval(oracle, DriveSpec{omega}, NoiseModel::none(), data.dt, substeps);
      p.oracle_q0 = expectation(evolved, pauli::z());
      oracle = nonselective_map(evolved, pointer);
      p.oracle_x = expectation(oracle, pauli::x());
      p.oracle_y = expectation(oracle, pauli::y());
      p.oracle_z = expectation(oracle, pauli::z());
    } else {
      p.oracle_x = p.oracle_y = p.oracle_z = p.oracle_q0 = nan;
    }
    data.mean.push_back(p);
  }
  return data;
}

CsvTable ensemble_mean_table(const EnsembleDataset& data) {
  CsvTable table;
  table.header = {"step",  "t",     "count",   "mean_x",   "mean_y",   "mean_z",   "se_x",     "se_y",
                  "se_z",  "mean_q0", "se_q0", "oracle_x", "oracle_y", "oracle_z", "oracle_q0"};
  for (const auto& p : data.mean) {
    table.add_row({format_number(std::int64_t{p.step}), format_number(p.t), format_number(std::int64_t{p.count}),
                   format_number(p.mean_x), format_number(p.mean_y), format_number(p.mean_z), format_number(p.se_x),
                   format_number(p.se_y), format_number(p.se_z), format_number(p.mean_q0), format_number(p.se_q0),
                   format_number(p.oracle_x), format_number(p.oracle_y), format_number(p.oracle_z),
                   format_number(p.oracle_q0)});
  }
  return table;
}

// ---------------------------------------------------------------------------

EvaluationResult evaluate_policy(const PolicyParams& params, const EnvConfig& env, int episodes, std::uint64_t seed,
                                 int workers) {
  if (episodes < 0) throw ConfigError("evaluation episodes must be >= 0");
  if (params.actor.input_size() != RLState::kSize || params.critic.input_size() != RLState::kSize) {
    throw ConfigError("checkpoint input size " + std::to_string(params.actor.input_size()) +
                      " does not match the environment state size " + std::to_string(RLState::kSize));
  }
  EvaluationResult result;
  result.logs.resize(static_cast<std::size_t>(episodes));
  parallel_for(episodes, workers, [&](int e) {
    result.logs[static_cast<std::size_t>(e)] =
        run_policy_episode(params, env, stream_seed(seed, SeedStream::kEval, static_cast<std::uint64_t>(e)));
  });
  std::vector<double> fidelities;
  fidelities.reserve(result.logs.size());
  for (const auto& log : result.logs) fidelities.push_back(log.terminal_fidelity);
  result.stats = FidelityStats::from(std::move(fidelities));
  return result;
}

namespace {

struct CollectedEpisode {
  std::vector<Transition> transitions;
  LearningCurvePoint point;
};

CollectedEpisode collect_episode(const PolicyParams& params, const EnvConfig& env_config, std::uint64_t seed,
                                 int episode_index) {
  const auto idx = static_cast<std::uint64_t>(episode_index);
  StreamEnv env(env_config);
  Rng policy_rng(stream_seed(seed, SeedStream::kPolicy, idx));
  RLState state = env.reset(stream_seed(seed, SeedStream::kEnv, idx));
  CollectedEpisode out;
  while (!env.done()) {
    Eigen::VectorXd features = state_features(state);
    const PolicyOutput po = forward(params, features);
    const ActionSample act = sample_action(po.action_mean, params.log_std, policy_rng);
    const StepResult res = env.step(act.action);
    out.transitions.push_back({std::move(features), act.raw, act.log_prob, res.reward, po.value, res.done});
    state = res.state;
  }
  out.point = {episode_index + 1, env.log().total_reward, env.log().terminal_fidelity,
               static_cast<int>(env.log().records.size())};
  return out;
}

}  // namespace

TrainResult train_agent(const RunConfig& config, int episodes, std::uint64_t seed, const PolicyParams* initial,
                        const ProgressFn& progress) {
  config.validate();
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  TrainResult result;
  PolicyParams params;
  if (initial) {
    params = *initial;
  } else {
    Rng init_rng(stream_seed(seed, SeedStream::kInit, 0));
    params = PolicyParams::initialize(init_rng);
  }
  AdamOptimizer optimizer(config.ppo);
  Rng shuffle_rng(stream_seed(seed, SeedStream::kShuffle, 0));

  const int batch = config.ppo.batch_episodes;
  const int interval = config.ppo.eval_interval;
  std::optional<PolicyParams> best;
  double best_mean = -1.0;

  const auto validate_now = [&](int done) {
    const int n_val = std::max(1, config.eval_episodes);
    EvaluationResult val = evaluate_policy(params, config.env, n_val, stream_seed(seed, SeedStream::kValidation, 0),
                                           config.workers);
    if (val.stats.mean >= best_mean) {
      best_mean = val.stats.mean;
      best = params;
    }
    result.validation.emplace_back(done, val.stats);
    if (progress) progress(done, &result.validation.back().second);
  };

  for (int start = 0; start < episodes; start += batch) {
    const int count = std::min(batch, episodes - start);
    std::vector<CollectedEpisode> collected(static_cast<std::size_t>(count));
    parallel_for(count, config.workers, [&](int i) {
      collected[static_cast<std::size_t>(i)] = collect_episode(params, config.env, seed, start + i);
    });
    TransitionBatch tb;
    for (auto& ep : collected) {
      result.curve.push_back(ep.point);
      for (auto& t : ep.transitions) tb.transitions.push_back(std::move(t));
    }
    ppo_update(params, build_samples(tb, config.ppo), config.ppo, optimizer, shuffle_rng);

    const int done = start + count;
    const bool crossed = interval > 0 && (done / interval) > (start / interval);
    if (crossed || (interval > 0 && done == episodes)) {
      validate_now(done);
    } else if (progress) {
      progress(done, nullptr);
    }
  }
  result.episodes_trained = episodes;
  result.first_success_episode = first_sustained_success(result.curve, config.curve_threshold);
  result.checkpoint.params = (config.keep_best && best) ? *best : params;
  result.checkpoint.hyper = config.ppo;
  result.checkpoint.metadata = json{{"preset", std::string(to_string(config.preset))},
                                    {"env", config.env},
                                    {"episodes", episodes},
                                    {"seed", seed},
                                    {"selected", (config.keep_best && best) ? "best_validation" : "final"}};
  if (best) result.checkpoint.metadata["best_validation_mean"] = best_mean;
  return result;
}

// ---------------------------------------------------------------------------
// Run directories.

namespace {

json base_manifest(const std::string& command, const json& args, const json& config, std::uint64_t seed) {
  return json{{"command", command},
              {"args", args},
              {"config", config},
              {"master_seed", seed},
              {"software_version", QSTREAM_VERSION},
              {"artifacts", json::array()},
              {"timings", json::object()}};
}

void add_artifact(json& manifest, const std::string& relative) { manifest["artifacts"].push_back(relative); }

void write_trajectories(const fs::path& dir, const std::vector<EpisodeLog>& logs, json& manifest,
                        const std::string& prefix) {
  ensure_dir(dir / "trajectories");
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const std::string rel = "trajectories/" + prefix + n4(static_cast<int>(i)) + ".csv";
    write_csv(dir / rel, episode_log_table(logs[i]));
    add_artifact(manifest, rel);
  }
}

void finish_manifest(const fs::path& out_dir, json& manifest, std::chrono::steady_clock::time_point start) {
  manifest["timings"]["total_seconds"] = seconds_since(start);
  add_artifact(manifest, "manifest.json");
  write_json_file_atomic(out_dir / "manifest.json", manifest);
}

RunConfig resolve_config(NoisePreset preset, const std::optional<fs::path>& file, const json& overrides) {
  RunConfig config = RunConfig::for_preset(preset);
  if (file) {
    json j = read_json_file(*file);
    if (j.is_object()) j.erase("preset");  // the command-line preset wins
    merge_json(j, config);
  }
  if (!overrides.is_null() && !overrides.empty()) merge_json(overrides, config);
  config.validate();
  return config;
}

json train_into(const RunConfig& config, int episodes, std::uint64_t seed, const fs::path& out_dir, json manifest,
                const PolicyParams* initial, const ProgressFn& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(out_dir);
  TrainResult tr = train_agent(config, episodes, seed, initial, progress);
  manifest["timings"]["train_seconds"] = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  EvaluationResult eval =
      evaluate_policy(tr.checkpoint.params, config.env, config.eval_episodes, seed, config.workers);
  manifest["timings"]["eval_seconds"] = seconds_since(t1);
  tr.checkpoint.metadata["eval"] = {{"mean", eval.stats.mean}, {"std", eval.stats.std},
                                    {"episodes", eval.stats.episode_count}, {"seed", seed}};

  save_checkpoint(tr.checkpoint, out_dir / "checkpoint.json");
  add_artifact(manifest, "checkpoint.json");
  write_csv(out_dir / "learning_curve.csv", learning_curve_table(tr.curve));
  add_artifact(manifest, "learning_curve.csv");

  CsvTable val;
  val.header = {"episode", "mean", "std", "min", "max"};
  for (const auto& [ep, s] : tr.validation) {
    val.add_row({format_number(std::int64_t{ep}), format_number(s.mean), format_number(s.std), format_number(s.min),
                 format_number(s.max)});
  }
  write_csv(out_dir / "validation_curve.csv", val);
  add_artifact(manifest, "validation_curve.csv");

  write_json_file_atomic(out_dir / "stats.json", json{{"eval", to_json_value(eval.stats)}});
  add_artifact(manifest, "stats.json");
  write_trajectories(out_dir, eval.logs, manifest, "eval_");

  manifest["results"] = {{"eval_mean", eval.stats.mean},
                         {"eval_std", eval.stats.std},
                         {"first_sustained_success_episode",
                          tr.first_success_episode ? json(*tr.first_success_episode) : json(nullptr)},
                         {"selected", tr.checkpoint.metadata.at("selected")}};
  finish_manifest(out_dir, manifest, t0);
  return manifest;
}

json evaluate_into(const Checkpoint& cp, const EnvConfig& env, NoisePreset preset, int episodes, std::uint64_t seed,
                   int workers, const fs::path& out_dir, json manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(out_dir);
  EvaluationResult eval = evaluate_policy(cp.params, env, episodes, seed, workers);
  write_json_file_atomic(out_dir / "stats.json", json{{"eval", to_json_value(eval.stats)}});
  add_artifact(manifest, "stats.json");
  write_trajectories(out_dir, eval.logs, manifest, "eval_");
  manifest["results"] = {{"preset", std::string(to_string(preset))},
                         {"eval_mean", eval.stats.mean},
                         {"eval_std", eval.stats.std}};
  finish_manifest(out_dir, manifest, t0);
  return manifest;
}

json simulate_into(const SimulateArgs& args, const fs::path& out_dir, json manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(out_dir);
  EnsembleOptions opt;
  opt.dt_ratio = args.dt_ratio;
  opt.ensemble = args.ensemble;
  opt.sigma = args.sigma;
  opt.seed = args.seed;
  opt.workers = args.workers;
  if (args.checkpoint) {
    opt.drive = DriveMode::kCheckpoint;
    opt.checkpoint = load_checkpoint(*args.checkpoint);
  }
  EnsembleDataset data = run_ensemble(opt);
  write_trajectories(out_dir, data.trajectories, manifest, "traj_");
  write_csv(out_dir / "reference.csv", episode_log_table(data.reference));
  add_artifact(manifest, "reference.csv");
  write_csv(out_dir / "ensemble_mean.csv", ensemble_mean_table(data));
  add_artifact(manifest, "ensemble_mean.csv");
  manifest["results"] = {{"intervals", data.intervals},
                         {"reference_final_z", data.reference.records.back().exp_z},
                         {"mean_final_z", data.mean.back().mean_z}};
  finish_manifest(out_dir, manifest, t0);
  return manifest;
}

json transfer_into(const Checkpoint& cp, const RunConfig& config, int episodes, std::uint64_t seed,
                   const fs::path& out_dir, json manifest, const ProgressFn& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(out_dir);
  EvaluationResult before =
      evaluate_policy(cp.params, config.env, config.eval_episodes, seed, config.workers);
  manifest["timings"]["before_eval_seconds"] = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  Checkpoint tuned = cp;
  std::vector<LearningCurvePoint> curve;
  if (episodes > 0) {
    TrainResult tr = train_agent(config, episodes, seed, &cp.params, progress);
    tuned = tr.checkpoint;
    curve = std::move(tr.curve);
  }
  manifest["timings"]["train_seconds"] = seconds_since(t1);
  const EvaluationResult after =
      episodes > 0 ? evaluate_policy(tuned.params, config.env, config.eval_episodes, seed, config.workers) : before;

  tuned.metadata["preset"] = std::string(to_string(config.preset));
  tuned.metadata["transferred_from"] = cp.metadata;
  tuned.metadata["eval"] = {{"mean", after.stats.mean}, {"std", after.stats.std},
                            {"episodes", after.stats.episode_count}, {"seed", seed}};
  save_checkpoint(tuned, out_dir / "checkpoint.json");
  add_artifact(manifest, "checkpoint.json");
  write_csv(out_dir / "learning_curve.csv", learning_curve_table(curve));
  add_artifact(manifest, "learning_curve.csv");
  write_json_file_atomic(out_dir / "stats.json",
                         json{{"before", to_json_value(before.stats)}, {"after", to_json_value(after.stats)}});
  add_artifact(manifest, "stats.json");
  write_trajectories(out_dir, before.logs, manifest, "before_");
  write_trajectories(out_dir, after.logs, manifest, "after_");
  manifest["results"] = {{"before_mean", before.stats.mean},
                         {"before_std", before.stats.std},
                         {"after_mean", after.stats.mean},
                         {"after_std", after.stats.std}};
  finish_manifest(out_dir, manifest, t0);
  return manifest;
}

}  // namespace

json run_simulate(const SimulateArgs& args, const fs::path& out_dir) {
  json a{{"dt_ratio", args.dt_ratio}, {"ensemble", args.ensemble}, {"sigma", args.sigma}, {"seed", args.seed},
         {"workers", args.workers}};
  if (args.checkpoint) a["checkpoint"] = fs::absolute(*args.checkpoint).string();
  return simulate_into(args, out_dir, base_manifest("simulate", a, json::object(), args.seed));
}

json run_train(const TrainArgs& args, const fs::path& out_dir, const ProgressFn& progress) {
  RunConfig config = resolve_config(args.preset, args.config_file, args.overrides);
  config.ppo.max_episodes = args.episodes;
  json a{{"preset", std::string(to_string(args.preset))}, {"episodes", args.episodes}, {"seed", args.seed}};
  if (args.config_file) a["config_file"] = fs::absolute(*args.config_file).string();
  return train_into(config, args.episodes, args.seed, out_dir, base_manifest("train", a, config, args.seed), nullptr,
                    progress);
}

json run_evaluate(const EvaluateArgs& args, const fs::path& out_dir) {
  const Checkpoint cp = load_checkpoint(args.checkpoint);
  const EnvConfig env = EnvConfig::for_preset(args.preset);
  json a{{"checkpoint", fs::absolute(args.checkpoint).string()},
         {"preset", std::string(to_string(args.preset))},
         {"episodes", args.episodes},
         {"seed", args.seed},
         {"workers", args.workers}};
  return evaluate_into(cp, env, args.preset, args.episodes, args.seed, args.workers, out_dir,
                       base_manifest("evaluate", a, json{{"env", env}}, args.seed));
}

json run_transfer(const TransferArgs& args, const fs::path& out_dir, const ProgressFn& progress) {
  const Checkpoint cp = load_checkpoint(args.checkpoint);
  RunConfig config = resolve_config(args.preset, args.config_file, json::object());
  if (!args.config_file) config.ppo = cp.hyper;  // continue with the agent's own hyperparameters
  config.eval_episodes = args.eval_episodes;
  config.ppo.max_episodes = args.episodes;
  config.validate();
  json a{{"checkpoint", fs::absolute(args.checkpoint).string()},
         {"preset", std::string(to_string(args.preset))},
         {"episodes", args.episodes},
         {"seed", args.seed},
         {"eval_episodes", args.eval_episodes}};
  return transfer_into(cp, config, args.episodes, args.seed, out_dir, base_manifest("transfer", a, config, args.seed),
                       progress);
}

ExportWhat parse_export_what(std::string_view name) {
  if (name == "trajectories") return ExportWhat::kTrajectories;
  if (name == "learning-curve") return ExportWhat::kLearningCurve;
  if (name == "stats") return ExportWhat::kStats;
  throw ConfigError("unknown export kind '" + std::string(name) + "'");
}

CsvTable run_export(const fs::path& run_dir, ExportWhat what) {
  if (!fs::is_directory(run_dir)) throw IoError("run directory '" + run_dir.string() + "' does not exist");
  switch (what) {
    case ExportWhat::kLearningCurve:
      return read_csv(run_dir / "learning_curve.csv");
    case ExportWhat::kStats: {
      const json stats = read_json_file(run_dir / "stats.json");
      CsvTable table;
      table.header = {"label", "episode_count", "mean", "std", "min", "max"};
      for (const auto& [label, s] : stats.items()) {
        table.add_row({label, format_number(s.at("episode_count").get<std::int64_t>()),
                       format_number(s.at("mean").get<double>()), format_number(s.at("std").get<double>()),
                       format_number(s.at("min").get<double>()), format_number(s.at("max").get<double>())});
      }
      return table;
    }
    case ExportWhat::kTrajectories: {
      const fs::path dir = run_dir / "trajectories";
      if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' does not exist");
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      CsvTable table;
      table.header = {"trajectory"};
      table.header.insert(table.header.end(), kTrajectoryColumns.begin(), kTrajectoryColumns.end());
      for (const auto& f : files) {
        const CsvTable part = read_csv(f);
        if (part.header != kTrajectoryColumns) throw FormatError("'" + f.string() + "' has unexpected columns");
        for (const auto& row : part.rows) {
          std::vector<std::string> out{f.stem().string()};
          out.insert(out.end(), row.begin(), row.end());
          table.add_row(std::move(out));
        }
      }
      return table;
    }
  }
  throw ConfigError("unknown export kind");
}

json replay_manifest(const fs::path& manifest_path, const fs::path& out_dir) {
  const json m = read_json_file(manifest_path);
  try {
    const std::string command = m.at("command").get<std::string>();
    const json& a = m.at("args");
    const auto seed = m.at("master_seed").get<std::uint64_t>();
    if (command == "simulate") {
      SimulateArgs args;
      args.dt_ratio = a.at("dt_ratio").get<double>();
      args.ensemble = a.at("ensemble").get<int>();
      args.sigma = a.at("sigma").get<double>();
      args.seed = seed;
      args.workers = a.value("workers", 1);
      if (a.contains("checkpoint")) args.checkpoint = a.at("checkpoint").get<std::string>();
      return simulate_into(args, out_dir, base_manifest("simulate", a, json::object(), seed));
    }
    if (command == "train") {
      RunConfig config;
      merge_json(m.at("config"), config);
      config.validate();
      return train_into(config, a.at("episodes").get<int>(), seed, out_dir, base_manifest("train", a, config, seed),
                        nullptr, {});
    }
    if (command == "evaluate") {
      const Checkpoint cp = load_checkpoint(a.at("checkpoint").get<std::string>());
      const NoisePreset preset = parse_noise_preset(a.at("preset").get<std::string>());
      EnvConfig env = EnvConfig::for_preset(preset);
      merge_json(m.at("config").at("env"), env);
      return evaluate_into(cp, env, preset, a.at("episodes").get<int>(), seed, a.value("workers", 1), out_dir,
                           base_manifest("evaluate", a, json{{"env", env}}, seed));
    }
    if (command == "transfer") {
      const Checkpoint cp = load_checkpoint(a.at("checkpoint").get<std::string>());
      RunConfig config;
      merge_json(m.at("config"), config);
      config.validate();
      return transfer_into(cp, config, a.at("episodes").get<int>(), seed, out_dir,
                           base_manifest("transfer", a, config, seed), {});
    }
    throw FormatError("manifest: unknown command '" + command + "'");
  } catch (const json::exception& e) {
    throw FormatError("manifest '" + manifest_path.string() + "' is malformed: " + e.what());
  }
}

}  // namespace qstream
