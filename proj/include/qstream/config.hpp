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

#ifndef QSTREAM_CONFIG_HPP_
#define QSTREAM_CONFIG_HPP_

#include <filesystem>
#include <json.hpp>
#include <optional>

#include "qstream/ppo.hpp"
#include "qstream/stream_env.hpp"

namespace qstream {

// Everything a training or evaluation run depends on besides the seed.
struct RunConfig {
  NoisePreset preset = NoisePreset::kDetuning;
  EnvConfig env = EnvConfig::for_preset(NoisePreset::kDetuning);
  PpoHyper ppo;
  int eval_episodes = 100;
  // Moving-mean fidelity that marks "first sustained success" in the
  // learning curve (window of 10 episodes).
  double curve_threshold = 0.95;
  int workers = 1;
  // Keep the parameters with the best periodic validation mean instead of
  // the last update. Validation uses its own seed stream.
  bool keep_best = true;

  void validate() const;
  static RunConfig for_preset(NoisePreset preset);
};

// JSON conversions. Decoding is strict: unknown keys raise ConfigError and
// missing keys keep the value already present in the target object.
void to_json(nlohmann::json& j, const NoiseModel& noise);
void to_json(nlohmann::json& j, const EnvConfig& env);
void to_json(nlohmann::json& j, const PpoHyper& hyper);
void to_json(nlohmann::json& j, const RunConfig& config);

void merge_json(const nlohmann::json& j, NoiseModel& noise);
void merge_json(const nlohmann::json& j, EnvConfig& env);
void merge_json(const nlohmann::json& j, PpoHyper& hyper);
// A "preset" key resets env to that preset's defaults before the remaining
// keys are applied.
void merge_json(const nlohmann::json& j, RunConfig& config);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames, so readers never observe a
// partial document.
void write_json_file_atomic(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace qstream

#endif  // QSTREAM_CONFIG_HPP_
