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

#include "qstream/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qstream/errors.hpp"

namespace qstream {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // log(sqrt(2 pi))

}  // namespace

void PpoHyper::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("ppo: learning_rate must be positive");
  if (batch_episodes < 1) throw ConfigError("ppo: batch_episodes must be >= 1");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("ppo: clip_epsilon must lie in (0, 1)");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("ppo: discount must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("ppo: gae_lambda must lie in [0, 1]");
  if (update_epochs < 0) throw ConfigError("ppo: update_epochs must be >= 0");
  if (!(value_coef >= 0.0)) throw ConfigError("ppo: value_coef must be >= 0");
  if (!(entropy_coef >= 0.0)) throw ConfigError("ppo: entropy_coef must be >= 0");
  if (max_episodes < 0) throw ConfigError("ppo: max_episodes must be >= 0");
  if (eval_interval < 0) throw ConfigError("ppo: eval_interval must be >= 0");
  if (minibatch_size < 0) throw ConfigError("ppo: minibatch_size must be >= 0");
  if (!(reward_scale > 0.0)) throw ConfigError("ppo: reward_scale must be positive");
}

PolicyParams PolicyParams::initialize(Rng& rng, std::span<const int> sizes) {
  PolicyParams p;
  p.actor = Mlp::glorot_uniform(sizes, rng);
  p.critic = Mlp::glorot_uniform(sizes, rng);
  p.log_std = std::log(0.2);
  return p;
}

Eigen::VectorXd state_features(const RLState& state) {
  const auto a = state.to_array();
  return Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

PolicyOutput forward(const PolicyParams& params, const Eigen::VectorXd& features) {
  const double z = params.actor.forward(features)(0, 0);
  const double v = params.critic.forward(features)(0, 0);
  if (!std::isfinite(z) || !std::isfinite(v)) throw NumericalError("forward: non-finite network output");
  return {logistic(z), v};
}

PolicyOutput forward(const PolicyParams& params, const RLState& state) {
  return forward(params, state_features(state));
}

double gaussian_log_prob(double x, double mean, double log_std) {
  const double u = (x - mean) * std::exp(-log_std);
  return -0.5 * u * u - log_std - kHalfLogTwoPi;
}

ActionSample sample_action(double mean, double log_std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  s.raw = mean + std::exp(log_std) * normal(rng);
  s.action = std::clamp(s.raw, 0.0, 1.0);
  s.log_prob = gaussian_log_prob(s.raw, mean, log_std);
  return s;
}

std::size_t TransitionBatch::episode_count() const {
  return static_cast<std::size_t>(
      std::count_if(transitions.begin(), transitions.end(), [](const Transition& t) { return t.done; }));
}

void TransitionBatch::validate() const {
  if (!transitions.empty() && !transitions.back().done) {
    throw UsageError("TransitionBatch: last episode is not terminated");
  }
}

Advantages compute_gae(const TransitionBatch& batch, double discount, double lambda) {
  batch.validate();
  const std::size_t n = batch.transitions.size();
  Advantages out{std::vector<double>(n), std::vector<double>(n)};
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& t = batch.transitions[i];
    const double next_value = (t.done || i + 1 == n) ? 0.0 : batch.transitions[i + 1].value;
    const double delta = t.reward + discount * next_value - t.value;
    running = t.done ? delta : delta + discount * lambda * running;
    out.advantages[i] = running;
    out.returns[i] = running + t.value;
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  const double scale = 1.0 / std::max(sd, 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

PpoSamples PpoSamples::subset(std::span<const Eigen::Index> indices) const {
  PpoSamples s;
  const auto m = static_cast<Eigen::Index>(indices.size());
  s.features.resize(features.rows(), m);
  s.actions.resize(m);
  s.old_log_probs.resize(m);
  s.advantages.resize(m);
  s.returns.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index i = indices[j];
    s.features.col(j) = features.col(i);
    s.actions[j] = actions[i];
    s.old_log_probs[j] = old_log_probs[i];
    s.advantages[j] = advantages[i];
    s.returns[j] = returns[i];
  }
  return s;
}

PpoSamples build_samples(const TransitionBatch& batch, const PpoHyper& hyper) {
  TransitionBatch scaled = batch;
  for (auto& t : scaled.transitions) t.reward *= hyper.reward_scale;
  Advantages adv = compute_gae(scaled, hyper.discount, hyper.gae_lambda);
  normalize_advantages(adv.advantages);

  const auto n = static_cast<Eigen::Index>(batch.transitions.size());
  PpoSamples s;
  const Eigen::Index dim = n == 0 ? 0 : batch.transitions.front().features.size();
  s.features.resize(dim, n);
  s.actions.resize(n);
  s.old_log_probs.resize(n);
  s.advantages.resize(n);
  s.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = batch.transitions[i];
    s.features.col(i) = t.features;
    s.actions[i] = t.action;
    s.old_log_probs[i] = t.log_prob;
    s.advantages[i] = adv.advantages[i];
    s.returns[i] = adv.returns[i];
  }
  return s;
}

double clipped_surrogate(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

PpoLoss ppo_loss(const PolicyParams& params, const PpoSamples& samples, const PpoHyper& hyper,
                 PolicyGradient* grad) {
  const Eigen::Index n = samples.size();
  PpoLoss loss;
  if (n == 0) {
    if (grad) {
      grad->actor = params.actor.layers();
      grad->critic = params.critic.layers();
      for (auto& l : grad->actor) l.weight.setZero(), l.bias.setZero();
      for (auto& l : grad->critic) l.weight.setZero(), l.bias.setZero();
      grad->log_std = 0.0;
    }
    return loss;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_var = std::exp(-2.0 * params.log_std);

  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
  const Eigen::MatrixXd z = params.actor.forward(samples.features, actor_cache);
  const Eigen::MatrixXd values = params.critic.forward(samples.features, critic_cache);

  Eigen::MatrixXd grad_z(1, n);
  Eigen::MatrixXd grad_v(1, n);
  double grad_log_std = 0.0;
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = logistic(z(0, i));
    const double a = samples.actions[i];
    const double adv = samples.advantages[i];
    const double log_prob = gaussian_log_prob(a, mean, params.log_std);
    const double ratio = std::exp(log_prob - samples.old_log_probs[i]);
    const double surrogate = clipped_surrogate(ratio, adv, hyper.clip_epsilon);
    loss.actor -= surrogate * inv_n;
    if (std::abs(ratio - 1.0) > hyper.clip_epsilon) ++clipped;

    // The unclipped branch carries the gradient whenever it is the minimum.
    const double d_ratio = (ratio * adv <= surrogate) ? -adv * inv_n : 0.0;
    const double d_log_prob = d_ratio * ratio;
    const double diff = a - mean;
    grad_z(0, i) = d_log_prob * diff * inv_var * mean * (1.0 - mean);
    grad_log_std += d_log_prob * (diff * diff * inv_var - 1.0);

    const double err = values(0, i) - samples.returns[i];
    loss.critic += err * err * inv_n;
    grad_v(0, i) = hyper.value_coef * 2.0 * err * inv_n;
  }
  loss.entropy = 0.5 + kHalfLogTwoPi + params.log_std;
  loss.total = loss.actor + hyper.value_coef * loss.critic - hyper.entropy_coef * loss.entropy;
  loss.clip_fraction = clipped * inv_n;

  if (grad) {
    grad->actor = params.actor.backward(actor_cache, grad_z);
    grad->critic = params.critic.backward(critic_cache, grad_v);
    grad->log_std = grad_log_std - hyper.entropy_coef;
  }
  return loss;
}

void AdamOptimizer::ensure_state(const PolicyParams& params) {
  const auto n = static_cast<Eigen::Index>(params.actor.parameter_count() + params.critic.parameter_count() + 1);
  if (m_.size() != n) {
    m_ = Eigen::VectorXd::Zero(n);
    v_ = Eigen::VectorXd::Zero(n);
    t_ = 0;
  }
}

void AdamOptimizer::step(PolicyParams& params, const PolicyGradient& grad) {
  ensure_state(params);
  const Eigen::VectorXd ga = Mlp::flatten(grad.actor);
  const Eigen::VectorXd gc = Mlp::flatten(grad.critic);
  Eigen::VectorXd g(m_.size());
  g << ga, gc, grad.log_std;

  Eigen::VectorXd theta(m_.size());
  theta << params.actor.flatten(), params.critic.flatten(), params.log_std;

  ++t_;
  m_ = hyper_.adam_beta1 * m_ + (1.0 - hyper_.adam_beta1) * g;
  v_ = hyper_.adam_beta2 * v_ + (1.0 - hyper_.adam_beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(hyper_.adam_beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(hyper_.adam_beta2, static_cast<double>(t_));
  const Eigen::VectorXd m_hat = m_ / bc1;
  const Eigen::VectorXd v_hat = v_ / bc2;
  theta.array() -= hyper_.learning_rate * m_hat.array() / (v_hat.array().sqrt() + hyper_.adam_epsilon);

  params.actor.assign(theta.head(ga.size()));
  params.critic.assign(theta.segment(ga.size(), gc.size()));
  params.log_std = theta[theta.size() - 1];
}

UpdateStats ppo_update(PolicyParams& params, const PpoSamples& samples, const PpoHyper& hyper,
                       AdamOptimizer& optimizer, Rng& rng) {
  UpdateStats stats;
  const Eigen::Index n = samples.size();
  if (n == 0) return stats;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index chunk = (hyper.minibatch_size <= 0 || hyper.minibatch_size >= n) ? n : hyper.minibatch_size;

  for (int epoch = 0; epoch < hyper.update_epochs; ++epoch) {
    if (chunk < n) std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += chunk) {
      const Eigen::Index len = std::min(chunk, n - start);
      const PpoSamples mb =
          chunk == n ? samples : samples.subset(std::span<const Eigen::Index>(order.data() + start, len));
      PolicyGradient grad;
      const PpoLoss loss = ppo_loss(params, mb, hyper, &grad);
      if (!std::isfinite(loss.total) || !std::isfinite(grad.log_std)) {
        std::ostringstream msg;
        msg << "ppo_update: non-finite loss at epoch " << epoch << " (actor " << loss.actor << ", critic "
            << loss.critic << ", log_std " << params.log_std << ", samples " << mb.size() << ")";
        throw NumericalError(msg.str());
      }
      if (stats.gradient_steps == 0) stats.first = loss;
      stats.last = loss;
      optimizer.step(params, grad);
      ++stats.gradient_steps;
    }
  }
  if (!params.all_finite()) throw NumericalError("ppo_update: parameters became non-finite");
  return stats;
}

PolicyParams ppo_update(const PolicyParams& params, const TransitionBatch& batch, const PpoHyper& hyper,
                        std::uint64_t seed) {
  PolicyParams out = params;
  AdamOptimizer optimizer(hyper);
  Rng rng(seed);
  ppo_update(out, build_samples(batch, hyper), hyper, optimizer, rng);
  return out;
}

}  // namespace qstream
