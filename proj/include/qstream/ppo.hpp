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

#ifndef QSTREAM_PPO_HPP_
#define QSTREAM_PPO_HPP_

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

#include "qstream/mlp.hpp"
#include "qstream/rng.hpp"
#include "qstream/stream_env.hpp"

namespace qstream {

struct PpoHyper {
  double learning_rate = 1e-3;
  int batch_episodes = 20;
  double clip_epsilon = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  int update_epochs = 10;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  int max_episodes = 5000;
  int eval_interval = 500;
  // Samples per gradient step within an epoch; 0 uses the whole batch.
  int minibatch_size = 0;
  // Multiplies rewards before advantage and return estimation.
  double reward_scale = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Throws ConfigError.
  void validate() const;
};

// Separate actor and critic networks. The actor output is squashed to (0, 1)
// by the logistic function and used as the mean of a Gaussian with a
// state-independent log standard deviation.
struct PolicyParams {
  Mlp actor;
  Mlp critic;
  double log_std = 0.0;

  static constexpr std::array<int, 5> kDefaultSizes = {static_cast<int>(RLState::kSize), 64, 64, 64, 1};
  static PolicyParams initialize(Rng& rng, std::span<const int> sizes = kDefaultSizes);
  bool all_finite() const { return actor.all_finite() && critic.all_finite() && std::isfinite(log_std); }
};

struct PolicyOutput {
  double action_mean = 0.5;
  double value = 0.0;
};

Eigen::VectorXd state_features(const RLState& state);
PolicyOutput forward(const PolicyParams& params, const RLState& state);
PolicyOutput forward(const PolicyParams& params, const Eigen::VectorXd& features);

double gaussian_log_prob(double x, double mean, double log_std);

struct ActionSample {
  double action = 0.0;  // clipped to [0, 1], sent to the environment
  double raw = 0.0;     // pre-clip draw
  double log_prob = 0.0;
};

ActionSample sample_action(double mean, double log_std, Rng& rng);

struct Transition {
  Eigen::VectorXd features;
  double action = 0.0;  // pre-clip draw
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

// Transitions of whole episodes, in episode order. Every episode ends with a
// transition whose done flag is set.
struct TransitionBatch {
  std::vector<Transition> transitions;
  std::size_t episode_count() const;
  // Throws UsageError if the batch ends mid-episode.
  void validate() const;
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;  // raw advantage + value
};

// delta_t = r_t + discount V_{t+1} (1 - done_t) - V_t;
// A_t = sum_k (discount lambda)^k delta_{t+k}, within one episode.
Advantages compute_gae(const TransitionBatch& batch, double discount, double lambda);

// Zero mean, unit variance (variance floor keeps constant vectors at zero).
void normalize_advantages(std::vector<double>& advantages);

// Column-major sample set for one PPO update.
struct PpoSamples {
  Eigen::MatrixXd features;  // input x N
  Eigen::VectorXd actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return actions.size(); }
  PpoSamples subset(std::span<const Eigen::Index> indices) const;
};

// Applies reward scaling, GAE and advantage normalization.
PpoSamples build_samples(const TransitionBatch& batch, const PpoHyper& hyper);

struct PolicyGradient {
  std::vector<DenseLayer> actor;
  std::vector<DenseLayer> critic;
  double log_std = 0.0;
};

struct PpoLoss {
  double total = 0.0;
  double actor = 0.0;
  double critic = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Clipped surrogate + value_coef * MSE - entropy_coef * entropy, averaged over
// the samples. Fills `grad` when non-null.
PpoLoss ppo_loss(const PolicyParams& params, const PpoSamples& samples, const PpoHyper& hyper,
                 PolicyGradient* grad = nullptr);

// Clipped-surrogate contribution of one sample: min(r A, clip(r, 1-eps, 1+eps) A).
double clipped_surrogate(double ratio, double advantage, double clip_epsilon);

// Per-parameter adaptive-moment state.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(const PpoHyper& hyper) : hyper_(hyper) {}

  void step(PolicyParams& params, const PolicyGradient& grad);
  long steps() const { return t_; }

 private:
  void ensure_state(const PolicyParams& params);

  PpoHyper hyper_;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

struct UpdateStats {
  PpoLoss first;  // loss before the first gradient step
  PpoLoss last;   // loss on the final minibatch
  int gradient_steps = 0;
};

// update_epochs passes over the samples, each split into minibatches
// (shuffled by `rng` when minibatch_size > 0). Throws NumericalError with a
// diagnostic message on a non-finite loss.
UpdateStats ppo_update(PolicyParams& params, const PpoSamples& samples, const PpoHyper& hyper,
                       AdamOptimizer& optimizer, Rng& rng);

// Functional form: fresh optimizer state, returns the updated parameters.
PolicyParams ppo_update(const PolicyParams& params, const TransitionBatch& batch, const PpoHyper& hyper,
                        std::uint64_t seed = 0);

}  // namespace qstream

#endif  // QSTREAM_PPO_HPP_
