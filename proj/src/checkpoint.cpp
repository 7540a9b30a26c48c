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

#include "qstream/checkpoint.hpp"

#include <chrono>

#include "qstream/config.hpp"
#include "qstream/errors.hpp"

namespace qstream {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json layers_to_json(const Mlp& net) {
  json arr = json::array();
  for (const auto& l : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    arr.push_back({{"weight", w}, {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return arr;
}

json shapes_to_json(const Mlp& net) {
  json arr = json::array();
  for (const auto& l : net.layers()) arr.push_back({l.weight.rows(), l.weight.cols()});
  return arr;
}

Mlp layers_from_json(const json& shapes, const json& weights, const char* which) {
  if (!shapes.is_array() || !weights.is_array() || shapes.size() != weights.size() || shapes.empty()) {
    throw FormatError(std::string("checkpoint: ") + which + " layer shapes and weights disagree");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto rows = shapes[k].at(0).get<Eigen::Index>();
    const auto cols = shapes[k].at(1).get<Eigen::Index>();
    if (rows <= 0 || cols <= 0) throw FormatError(std::string("checkpoint: ") + which + " has an empty layer");
    const auto w = weights[k].at("weight").get<std::vector<double>>();
    const auto b = weights[k].at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
      throw FormatError(std::string("checkpoint: ") + which + " layer " + std::to_string(k) +
                        " does not match its declared shape");
    }
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      layer.bias[r] = b[static_cast<std::size_t>(r)];
    }
    layers.push_back(std::move(layer));
  }
  try {
    return Mlp(std::move(layers));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint: ") + which + ": " + e.what());
  }
}

}  // namespace

json checkpoint_to_json(const Checkpoint& cp) {
  return json{{"format_version", kCheckpointFormatVersion},
              {"created", utc_timestamp()},
              {"hyper", cp.hyper},
              {"layer_shapes", {{"actor", shapes_to_json(cp.params.actor)}, {"critic", shapes_to_json(cp.params.critic)}}},
              {"actor_weights", layers_to_json(cp.params.actor)},
              {"critic_weights", layers_to_json(cp.params.critic)},
              {"log_std", cp.params.log_std},
              {"metadata", cp.metadata}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("format_version")) throw FormatError("checkpoint: missing format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw FormatError("checkpoint: unsupported format_version " + std::to_string(version) + " (expected " +
                        std::to_string(kCheckpointFormatVersion) + ")");
    }
    Checkpoint cp;
    merge_json(j.at("hyper"), cp.hyper);
    const json& shapes = j.at("layer_shapes");
    cp.params.actor = layers_from_json(shapes.at("actor"), j.at("actor_weights"), "actor");
    cp.params.critic = layers_from_json(shapes.at("critic"), j.at("critic_weights"), "critic");
    cp.params.log_std = j.at("log_std").get<double>();
    if (cp.params.actor.output_size() != 1 || cp.params.critic.output_size() != 1 ||
        cp.params.actor.input_size() != cp.params.critic.input_size()) {
      throw FormatError("checkpoint: actor and critic must map the same input to one output");
    }
    if (!cp.params.all_finite()) throw FormatError("checkpoint: non-finite parameter");
    if (j.contains("metadata")) cp.metadata = j.at("metadata");
    return cp;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed document: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: bad hyperparameters: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_json_file_atomic(path, checkpoint_to_json(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json_file(path));
}

}  // namespace qstream
