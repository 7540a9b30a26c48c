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

#ifndef QSTREAM_MLP_HPP_
#define QSTREAM_MLP_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "qstream/rng.hpp"

namespace qstream {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Fully connected network: ReLU on every hidden layer, identity on the output.
// Batches are column-major: each column of the input is one sample.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  // `sizes` = {input, hidden..., output}.
  static Mlp zeros(std::span<const int> sizes);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero.
  static Mlp glorot_uniform(std::span<const int> sizes, Rng& rng);

  std::vector<int> sizes() const;
  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  struct Cache {
    // activations[0] is the input; activations[k] the output of layer k-1
    // after its nonlinearity. Pre-activations are kept for the ReLU mask.
    std::vector<Eigen::MatrixXd> activations;
    std::vector<Eigen::MatrixXd> pre_activations;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache& cache) const;

  // Gradient of a scalar loss given dL/d(output), same layout as layers().
  std::vector<DenseLayer> backward(const Cache& cache, const Eigen::MatrixXd& grad_output) const;

  // Flat view in layer order, weight (row-major) then bias.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  static Eigen::VectorXd flatten(const std::vector<DenseLayer>& layers);

  bool all_finite() const;

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace qstream

#endif  // QSTREAM_MLP_HPP_
