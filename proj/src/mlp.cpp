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

#include "qstream/mlp.hpp"

#include <cmath>

#include "qstream/errors.hpp"

namespace qstream {

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].bias.size() != layers_[k].weight.rows()) throw ShapeError("Mlp: bias does not match weight rows");
    if (k > 0 && layers_[k].weight.cols() != layers_[k - 1].weight.rows()) {
      throw ShapeError("Mlp: consecutive layer shapes do not chain");
    }
  }
}

Mlp Mlp::zeros(std::span<const int> sizes) {
  require(sizes.size() >= 2, "Mlp::zeros: need at least input and output sizes");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    layers.push_back({Eigen::MatrixXd::Zero(sizes[k], sizes[k - 1]), Eigen::VectorXd::Zero(sizes[k])});
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::glorot_uniform(std::span<const int> sizes, Rng& rng) {
  Mlp net = zeros(sizes);
  for (auto& layer : net.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill order so the result does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
  }
  return net;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> out;
  if (layers_.empty()) return out;
  out.push_back(static_cast<int>(layers_.front().weight.cols()));
  for (const auto& l : layers_) out.push_back(static_cast<int>(l.weight.rows()));
  return out;
}

std::size_t Mlp::input_size() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
std::size_t Mlp::output_size() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  if (static_cast<std::size_t>(input.rows()) != input_size()) throw ShapeError("Mlp::forward: input size mismatch");
  Eigen::MatrixXd x = input;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd z = layers_[k].weight * x;
    z.colwise() += layers_[k].bias;
    x = (k + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
  }
  return x;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache& cache) const {
  if (static_cast<std::size_t>(input.rows()) != input_size()) throw ShapeError("Mlp::forward: input size mismatch");
  cache.activations.assign(1, input);
  cache.pre_activations.clear();
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd z = layers_[k].weight * cache.activations.back();
    z.colwise() += layers_[k].bias;
    cache.pre_activations.push_back(z);
    if (k + 1 < layers_.size()) {
      cache.activations.push_back(z.cwiseMax(0.0));
    } else {
      cache.activations.push_back(std::move(z));
    }
  }
  return cache.activations.back();
}

std::vector<DenseLayer> Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output) const {
  std::vector<DenseLayer> grads(layers_.size());
  Eigen::MatrixXd delta = grad_output;  // dL/dz for the current layer
  for (std::size_t k = layers_.size(); k-- > 0;) {
    grads[k].weight = delta * cache.activations[k].transpose();
    grads[k].bias = delta.rowwise().sum();
    if (k == 0) break;
    Eigen::MatrixXd upstream = layers_[k].weight.transpose() * delta;
    const Eigen::MatrixXd& pre = cache.pre_activations[k - 1];
    delta = upstream.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  }
  return grads;
}

Eigen::VectorXd Mlp::flatten(const std::vector<DenseLayer>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  Eigen::VectorXd flat(n);
  Eigen::Index i = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat[i++] = l.weight(r, c);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat[i++] = l.bias[r];
  }
  return flat;
}

Eigen::VectorXd Mlp::flatten() const { return flatten(layers_); }

void Mlp::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) throw ShapeError("Mlp::assign: size mismatch");
  Eigen::Index i = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = flat[i++];
  }
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

}  // namespace qstream
