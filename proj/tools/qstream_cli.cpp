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

// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <string>

#include "qstream/qstream.h"

namespace {

int exit_code_for(qs_status status) {
  switch (status) {
    case QS_OK: return 0;
    case QS_ERR_CONFIG:
    case QS_ERR_CONTRACT:
    case QS_ERR_USAGE:
    case QS_ERR_SHAPE: return 2;
    case QS_ERR_NUMERICAL: return 3;
    case QS_ERR_IO:
    case QS_ERR_FORMAT: return 4;
    default: return 1;
  }
}

int report(qs_status status) {
  if (status != QS_OK) std::fprintf(stderr, "qstream: %s: %s\n", qs_status_name(status), qs_last_error());
  return exit_code_for(status);
}

void print_summary(const char* label, const qs_fidelity_summary& s) {
  std::printf("%s: episodes=%d mean=%.4f std=%.4f min=%.4f max=%.4f\n", label, s.episode_count, s.mean, s.std, s.min,
              s.max);
}

void print_progress(int done, double validation_mean, void* /*user*/) {
  if (!std::isnan(validation_mean)) std::fprintf(stderr, "[%6d episodes] validation mean fidelity %.4f\n", done, validation_mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qstream: measured-qubit simulation and closed-loop PPO control"};
  app.set_version_flag("--version", std::string(qs_version()));
  app.require_subcommand(1);

  qs_simulate_options sim;
  qs_simulate_options_init(&sim);
  std::string sim_out;
  std::string sim_checkpoint;
  auto* simulate = app.add_subcommand("simulate", "Ensemble of measured trajectories under a flip pulse or a policy");
  simulate->add_option("--dt-ratio", sim.dt_ratio, "Measurement interval over total time")->capture_default_str();
  simulate->add_option("--ensemble", sim.ensemble, "Number of trajectories")->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "Pointer width in grid units")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--checkpoint", sim_checkpoint, "Drive with this agent instead of the flip pulse");
  simulate->add_option("--workers", sim.workers, "Worker threads")->capture_default_str();

  qs_train_options train;
  qs_train_options_init(&train);
  std::string train_noise = train.noise;
  std::string train_config;
  std::string train_out;
  bool train_quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train a PPO agent in one noise environment");
  train_cmd->add_option("--noise", train_noise, "detuning|dephasing|relaxation|hybrid")
      ->check(CLI::IsMember({"none", "detuning", "dephasing", "relaxation", "hybrid"}))
      ->capture_default_str();
  train_cmd->add_option("--episodes", train.episodes, "Training episodes")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Master seed")->capture_default_str();
  train_cmd->add_option("--config", train_config, "JSON config file");
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  train_cmd->add_option("--workers", train.workers, "Worker threads (0: from config)");
  train_cmd->add_flag("--quiet", train_quiet, "Suppress progress output");

  qs_evaluate_options eval;
  qs_evaluate_options_init(&eval);
  std::string eval_checkpoint;
  std::string eval_noise = eval.noise;
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint with its deterministic policy");
  evaluate->add_option("--checkpoint", eval_checkpoint, "Checkpoint JSON")->required();
  evaluate->add_option("--noise", eval_noise, "Environment preset")
      ->check(CLI::IsMember({"none", "detuning", "dephasing", "relaxation", "hybrid"}))
      ->capture_default_str();
  evaluate->add_option("--episodes", eval.episodes, "Evaluation episodes")->capture_default_str();
  evaluate->add_option("--seed", eval.seed, "Master seed")->capture_default_str();
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  evaluate->add_option("--workers", eval.workers, "Worker threads")->capture_default_str();

  qs_transfer_options transfer;
  qs_transfer_options_init(&transfer);
  std::string tr_checkpoint;
  std::string tr_noise = "hybrid";
  std::string tr_config;
  std::string tr_out;
  bool tr_quiet = false;
  auto* transfer_cmd = app.add_subcommand("transfer", "Fine-tune a trained agent in a shifted noise environment");
  transfer_cmd->add_option("--checkpoint", tr_checkpoint, "Checkpoint JSON")->required();
  transfer_cmd->add_option("--episodes", transfer.episodes, "Fine-tuning episodes")->capture_default_str();
  transfer_cmd->add_option("--seed", transfer.seed, "Master seed")->capture_default_str();
  transfer_cmd->add_option("--out", tr_out, "Output directory")->required();
  transfer_cmd->add_option("--noise", tr_noise, "Target environment preset")
      ->check(CLI::IsMember({"none", "detuning", "dephasing", "relaxation", "hybrid"}))
      ->capture_default_str();
  transfer_cmd->add_option("--eval-episodes", transfer.eval_episodes, "Episodes per before/after evaluation")
      ->capture_default_str();
  transfer_cmd->add_option("--config", tr_config, "JSON config file");
  transfer_cmd->add_flag("--quiet", tr_quiet, "Suppress progress output");

  std::string export_run;
  std::string export_what;
  std::string export_out;
  auto* export_cmd = app.add_subcommand("export", "Print one artifact family of a run as CSV");
  export_cmd->add_option("--run", export_run, "Run directory")->required();
  export_cmd->add_option("--what", export_what, "trajectories|learning-curve|stats")
      ->required()
      ->check(CLI::IsMember({"trajectories", "learning-curve", "stats"}));
  export_cmd->add_option("--out", export_out, "Write to this file instead of standard output");

  std::string replay_manifest;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a run manifest");
  replay->add_option("--manifest", replay_manifest, "manifest.json of a previous run")->required();
  replay->add_option("--out", replay_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*simulate) {
    if (!sim_checkpoint.empty()) sim.checkpoint = sim_checkpoint.c_str();
    const qs_status st = qs_simulate(&sim, sim_out.c_str());
    if (st == QS_OK) std::printf("wrote %s\n", sim_out.c_str());
    return report(st);
  }
  if (*train_cmd) {
    train.noise = train_noise.c_str();
    if (!train_config.empty()) train.config_path = train_config.c_str();
    if (!train_quiet) train.progress = print_progress;
    qs_fidelity_summary s{};
    const qs_status st = qs_train(&train, train_out.c_str(), &s);
    if (st == QS_OK) print_summary("eval", s);
    return report(st);
  }
  if (*evaluate) {
    eval.checkpoint = eval_checkpoint.c_str();
    eval.noise = eval_noise.c_str();
    qs_fidelity_summary s{};
    const qs_status st = qs_evaluate(&eval, eval_out.c_str(), &s);
    if (st == QS_OK) print_summary("eval", s);
    return report(st);
  }
  if (*transfer_cmd) {
    transfer.checkpoint = tr_checkpoint.c_str();
    transfer.noise = tr_noise.c_str();
    if (!tr_config.empty()) transfer.config_path = tr_config.c_str();
    if (!tr_quiet) transfer.progress = print_progress;
    qs_fidelity_summary before{};
    qs_fidelity_summary after{};
    const qs_status st = qs_transfer(&transfer, tr_out.c_str(), &before, &after);
    if (st == QS_OK) {
      print_summary("before", before);
      print_summary("after", after);
    }
    return report(st);
  }
  if (*export_cmd) {
    return report(qs_export(export_run.c_str(), export_what.c_str(), export_out.empty() ? nullptr : export_out.c_str()));
  }
  if (*replay) {
    const qs_status st = qs_replay(replay_manifest.c_str(), replay_out.c_str());
    if (st == QS_OK) std::printf("wrote %s\n", replay_out.c_str());
    return report(st);
  }
  return 2;
}
