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

#ifndef QSTREAM_CHECKPOINT_HPP_
#define QSTREAM_CHECKPOINT_HPP_

#include <filesystem>
#include <json.hpp>

#include "qstream/ppo.hpp"

namespace qstream {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  PolicyParams params;
  PpoHyper hyper;
  nlohmann::json metadata = nlohmann::json::object();
};

// JSON document:
//   {format_version, created, hyper, layer_shapes: {actor, critic},
//    actor_weights: [{weight, bias}], critic_weights: [...], log_std, metadata}
// with weights flattened row-major. Doubles are written in shortest
// round-trip form, so loading reproduces the parameters bit for bit.
nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
// Throws FormatError on version or shape mismatch and on missing fields.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
// Throws IoError when unreadable and FormatError when malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qstream

#endif  // QSTREAM_CHECKPOINT_HPP_
