// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The ialab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include <string>

#include "ialab/error.hpp"
#include "ialab/rlagent.hpp"

namespace ialab::rl {
namespace {

using ad::Tensor;

Tensor rows_tensor(const std::vector<const Transition*>& batch, RVector Transition::*field) {
  const int n = static_cast<int>(batch.size());
  const int dim = static_cast<int>((batch.front()->*field).size());
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n * dim));
  for (const Transition* t : batch) v.insert(v.end(), (t->*field).data(), (t->*field).data() + dim);
  return ad::constant({n, dim}, std::move(v));
}

Tensor row_tensor(const RVector& x) {
  return ad::constant({1, static_cast<int>(x.size())}, std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace

void DdpgConfig::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::BadConfig, "ddpg config: " + what); };
  if (!(gamma >= 0.0 && gamma <= 1.0)) bad("gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) bad("tau must lie in (0, 1]");
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0)) bad("learning rates must be positive");
  if (h1 < 1 || h2 < 1) bad("hidden sizes must be positive");
  if (episodes < 0 || steps_per_episode < 1 || batch < 1) bad("bad episode/batch sizes");
  if (!(noise >= 0.0) || !(noise_decay > 0.0)) bad("bad exploration noise");
  if (capacity < static_cast<std::size_t>(batch)) bad("replay capacity below batch size");
}

Mlp::Mlp(std::vector<int> sizes, bool tanh_output, std::mt19937_64& rng, const std::string& prefix)
    : tanh_output_(tanh_output) {
  if (sizes.size() < 2) fail(ErrorCode::ShapeMismatch, "mlp needs at least an input and an output size");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::string p = prefix + std::to_string(l);
    weights_.push_back(ad::init_uniform({sizes[l], sizes[l + 1]}, sizes[l], rng, p + ".w"));
    biases_.push_back(ad::init_uniform({sizes[l + 1]}, sizes[l], rng, p + ".b"));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ad::add(ad::matmul(h, weights_[l]), biases_[l]);
    if (l + 1 < weights_.size()) h = ad::relu(h);
  }
  return tanh_output_ ? ad::tanh(h) : h;
}

std::vector<Tensor> Mlp::parameters() const {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

void Mlp::soft_update_from(const Mlp& src, double tau) {
  std::vector<Tensor> dst = parameters();
  const std::vector<Tensor> from = src.parameters();
  if (dst.size() != from.size()) fail(ErrorCode::ShapeMismatch, "soft update between different networks");
  for (std::size_t k = 0; k < dst.size(); ++k) {
    std::vector<double>& d = dst[k].value();
    const std::vector<double>& s = from[k].value();
    if (d.size() != s.size()) fail(ErrorCode::ShapeMismatch, "soft update between different networks");
    for (std::size_t e = 0; e < d.size(); ++e) d[e] = tau * s[e] + (1.0 - tau) * d[e];
  }
}

void Mlp::copy_from(const Mlp& src) {
  std::vector<Tensor> dst = parameters();
  const std::vector<Tensor> from = src.parameters();
  if (dst.size() != from.size()) fail(ErrorCode::ShapeMismatch, "copy between different networks");
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k].value() = from[k].value();
}

DdpgAgent::DdpgAgent(int state_dim, int action_dim, const DdpgConfig& config, std::uint64_t seed)
    : config_(config),
      state_dim_(state_dim),
      action_dim_(action_dim),
      init_rng_(seed),
      actor_({state_dim, config.h1, config.h2, action_dim}, true, init_rng_, "actor"),
      critic_({state_dim + action_dim, config.h1, config.h2, 1}, false, init_rng_, "critic"),
      actor_target_({state_dim, config.h1, config.h2, action_dim}, true, init_rng_, "actor_target"),
      critic_target_({state_dim + action_dim, config.h1, config.h2, 1}, false, init_rng_, "critic_target"),
      actor_opt_(actor_.parameters(), config.actor_lr),
      critic_opt_(critic_.parameters(), config.critic_lr) {
  config_.validate();
  actor_target_.copy_from(actor_);
  critic_target_.copy_from(critic_);
}

RVector DdpgAgent::act(const RVector& s) const {
  if (s.size() != state_dim_) fail(ErrorCode::ShapeMismatch, "act: state has wrong length");
  ad::NoGradGuard no_grad;
  const Tensor a = actor_.forward(row_tensor(s));
  return Eigen::Map<const RVector>(a.value().data(), action_dim_);
}

Tensor DdpgAgent::critic_forward(const Tensor& s, const Tensor& a) const {
  return critic_.forward(ad::concat({s, a}, 1));
}

double DdpgAgent::q_value(const RVector& s, const RVector& a) const {
  ad::NoGradGuard no_grad;
  return critic_forward(row_tensor(s), row_tensor(a)).item();
}

UpdateStats DdpgAgent::update(const ReplayBuffer& buffer, std::mt19937_64& rng) {
  const std::vector<const Transition*> batch = buffer.sample(static_cast<std::size_t>(config_.batch), rng);
  const int n = static_cast<int>(batch.size());
  const Tensor s = rows_tensor(batch, &Transition::s);
  const Tensor a = rows_tensor(batch, &Transition::a);
  const Tensor s2 = rows_tensor(batch, &Transition::s2);

  std::vector<double> y(static_cast<std::size_t>(n));
  {
    ad::NoGradGuard no_grad;
    const Tensor q2 = critic_target_.forward(ad::concat({s2, actor_target_.forward(s2)}, 1));
    for (int k = 0; k < n; ++k)
      y[static_cast<std::size_t>(k)] = batch[static_cast<std::size_t>(k)]->r + config_.gamma * q2.value()[static_cast<std::size_t>(k)];
  }
  UpdateStats stats;
  const Tensor critic_loss = ad::mse(critic_forward(s, a), ad::constant({n, 1}, std::move(y)));
  critic_opt_.zero_grad();
  ad::backward(critic_loss);
  critic_opt_.step();
  stats.critic_loss = critic_loss.item();

  const Tensor objective = ad::mean(critic_forward(s, actor_.forward(s)));
  actor_opt_.zero_grad();
  ad::backward(ad::scale(objective, -1.0));
  actor_opt_.step();
  stats.actor_objective = objective.item();

  actor_target_.soft_update_from(actor_, config_.tau);
  critic_target_.soft_update_from(critic_, config_.tau);
  return stats;
}

void DdpgAgent::save_actor(const std::string& path) const { ad::save_checkpoint(actor_.parameters(), path); }

void DdpgAgent::load_actor(const std::string& path) {
  std::vector<Tensor> params = actor_.parameters();
  ad::load_checkpoint(params, path);
}

}  // namespace ialab::rl
