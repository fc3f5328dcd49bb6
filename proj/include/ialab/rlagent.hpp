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

// Subspace-coordination environment and a single centralised DDPG agent
// that drives every transmitter's precoder.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ialab/autodiff.hpp"
#include "ialab/ia_core.hpp"
#include "ialab/netmodel.hpp"
#include "ialab/subspace.hpp"

namespace ialab::rl {

using ia::PrecoderSet;
using netmodel::ChannelSet;
using netmodel::Topology;
using subspace::SubspaceAssignment;

/// Everything fixed during one training run.
struct Env {
  ChannelSet channels;
  SubspaceAssignment assignment;
  RMatrix delta;
  Topology topology;
};

struct EnvState {
  RVector s;  // per-transmitter distance value
  PrecoderSet precoders;
  subspace::P2Value p2;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;  // -sum(next.s)
};

/// sum_j 2 m_t d_j
int action_dim(const Topology& topology);

/// Per transmitter the slice holds the m_t x d_j real parts column by
/// column, then the imaginary parts. Entries are clamped to [-1, 1], the
/// matrix orthonormalised by thin_qr_positive, and a rank-deficient slice
/// falls back to canonical columns (counted in fallbacks when given).
PrecoderSet action_to_precoders(const RVector& a, const Topology& topology, int* fallbacks = nullptr);

/// Inverse layout of action_to_precoders (no clamping).
RVector precoders_to_action(const PrecoderSet& precoders);

/// Random orthonormal precoders, state from the distance objective.
EnvState env_reset(const Env& env, std::uint64_t seed);
EnvState env_state(const Env& env, PrecoderSet precoders);
StepResult env_step(const Env& env, const RVector& a);

struct Transition {
  RVector s;
  RVector a;
  double r = 0.0;
  RVector s2;
};

/// Bounded FIFO ring; uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Throws BufferTooSmall when fewer than batch transitions are stored.
  std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

struct DdpgConfig {
  double gamma = 0.99;
  double critic_lr = 1e-3;
  double actor_lr = 1e-4;
  double tau = 0.005;
  int h1 = 400;
  int h2 = 300;
  int episodes = 100;
  int steps_per_episode = 20;
  int batch = 64;
  double noise = 0.1;
  double noise_decay = 0.99;
  std::size_t capacity = 1000000;

  void validate() const;
};

/// Dense ReLU network with an optional tanh output.
class Mlp {
 public:
  Mlp(std::vector<int> sizes, bool tanh_output, std::mt19937_64& rng, const std::string& prefix);

  ad::Tensor forward(const ad::Tensor& x) const;
  std::vector<ad::Tensor> parameters() const;
  /// theta <- tau * src + (1 - tau) * theta
  void soft_update_from(const Mlp& src, double tau);
  void copy_from(const Mlp& src);

 private:
  std::vector<ad::Tensor> weights_;
  std::vector<ad::Tensor> biases_;
  bool tanh_output_;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) before the actor step
};

class DdpgAgent {
 public:
  DdpgAgent(int state_dim, int action_dim, const DdpgConfig& config, std::uint64_t seed);

  /// Deterministic policy output in [-1, 1].
  RVector act(const RVector& s) const;
  /// Critic value of one (state, action) pair.
  double q_value(const RVector& s, const RVector& a) const;
  /// One critic and one actor step on a sampled minibatch, then soft target updates.
  UpdateStats update(const ReplayBuffer& buffer, std::mt19937_64& rng);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }
  Mlp& critic() { return critic_; }
  ad::Tensor critic_forward(const ad::Tensor& s, const ad::Tensor& a) const;

  void save_actor(const std::string& path) const;
  void load_actor(const std::string& path);

 private:
  DdpgConfig config_;
  int state_dim_;
  int action_dim_;
  std::mt19937_64 init_rng_;
  Mlp actor_;
  Mlp critic_;
  Mlp actor_target_;
  Mlp critic_target_;
  ad::Adam actor_opt_;
  ad::Adam critic_opt_;
};

struct TrainTrace {
  std::vector<double> reward;
  std::vector<double> desired_distance;
  std::vector<double> interference_distance;
  std::vector<double> total_distance;
  std::vector<double> avg_throughput;
  std::vector<double> critic_loss;
};

struct TrainOutcome {
  TrainTrace trace;
  int fallbacks = 0;
};

/// Runs episodes x steps_per_episode with Gaussian exploration.
TrainOutcome train(const Env& env, DdpgAgent& agent, const DdpgConfig& config, std::uint64_t seed);

enum class Scheme { RlBlind, RlMaxSnr };
Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme s);

struct RlRecord {
  Scheme scheme = Scheme::RlBlind;
  TrainTrace trace;
  PrecoderSet precoders;  // greedy policy result
  ia::RateResult rates;   // mmse_rates of those precoders
  double greedy_total_distance = 0.0;
};

/// Builds the assignment, trains, then follows the noise-free actor for one
/// episode from a fresh reset and keeps the precoders with the best reward.
RlRecord run_rl_scheme(Scheme scheme, const ChannelSet& channels, const Topology& topology, const DdpgConfig& config,
                       std::uint64_t seed);

/// Training trace as CSV: step,reward,desired_distance,interference_distance,total_distance,avg_throughput
void write_trace_csv(const TrainTrace& trace, const std::string& path);

}  // namespace ialab::rl
