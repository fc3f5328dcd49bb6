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


#include "ialab/rlagent.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "ialab/error.hpp"

namespace ialab::rl {
namespace {

constexpr std::uint64_t kGreedyStream = 0x67726565647921ULL;

}  // namespace

int action_dim(const Topology& topology) {
  int total = 0;
  for (int d : topology.d) total += 2 * topology.mt * d;
  return total;
}

PrecoderSet action_to_precoders(const RVector& a, const Topology& topology, int* fallbacks) {
  if (a.size() != action_dim(topology))
    fail(ErrorCode::DimensionMismatch, "action has " + std::to_string(a.size()) + " entries, topology needs " +
                                           std::to_string(action_dim(topology)));
  const int mt = topology.mt;
  PrecoderSet out;
  Eigen::Index pos = 0;
  for (int dj : topology.d) {
    CMatrix m(mt, dj);
    const Eigen::Index n = static_cast<Eigen::Index>(mt) * dj;
    for (Eigen::Index e = 0; e < n; ++e) {
      const double re = std::clamp(a(pos + e), -1.0, 1.0);
      const double im = std::clamp(a(pos + n + e), -1.0, 1.0);
      m(e % mt, e / mt) = cd(re, im);
    }
    pos += 2 * n;
    try {
      out.V.push_back(linops::thin_qr_positive(m));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      out.V.push_back(subspace::canonical_columns(mt, dj));
      if (fallbacks != nullptr) ++*fallbacks;
    }
  }
  return out;
}

RVector precoders_to_action(const PrecoderSet& precoders) {
  Eigen::Index total = 0;
  for (const CMatrix& v : precoders.V) total += 2 * v.size();
  RVector a(total);
  Eigen::Index pos = 0;
  for (const CMatrix& v : precoders.V) {
    const Eigen::Index n = v.size();
    for (Eigen::Index e = 0; e < n; ++e) {
      const cd z = v(e % v.rows(), e / v.rows());
      a(pos + e) = z.real();
      a(pos + n + e) = z.imag();
    }
    pos += 2 * n;
  }
  return a;
}

EnvState env_state(const Env& env, PrecoderSet precoders) {
  EnvState st;
  st.p2 = subspace::p2_value(env.channels, precoders, env.assignment, env.delta, env.topology,
                             subspace::RankPolicy::Limit);
  st.s = st.p2.per_transmitter;
  st.precoders = std::move(precoders);
  return st;
}

EnvState env_reset(const Env& env, std::uint64_t seed) {
  PrecoderSet p;
  for (int j = 0; j < env.topology.K; ++j)
    p.V.push_back(ia::random_orthonormal(env.topology.mt, env.topology.d[static_cast<std::size_t>(j)],
                                         subspace::user_seed(seed, j)));
  return env_state(env, std::move(p));
}

StepResult env_step(const Env& env, const RVector& a) {
  StepResult out;
  out.next = env_state(env, action_to_precoders(a, env.topology));
  out.reward = -out.next.p2.total;
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) fail(ErrorCode::BadConfig, "replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
  if (items_.size() < batch || batch == 0)
    fail(ErrorCode::BufferTooSmall, "replay holds " + std::to_string(items_.size()) + " transitions, batch is " +
                                        std::to_string(batch));
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t k = 0; k < batch; ++k) out.push_back(&items_[pick(rng)]);
  return out;
}

TrainOutcome train(const Env& env, DdpgAgent& agent, const DdpgConfig& config, std::uint64_t seed) {
  config.validate();
  const int adim = action_dim(env.topology);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ReplayBuffer buffer(config.capacity);
  TrainOutcome out;
  double sigma = config.noise;
  for (int ep = 0; ep < config.episodes; ++ep) {
    EnvState state = env_reset(env, subspace::user_seed(seed, ep));
    for (int step = 0; step < config.steps_per_episode; ++step) {
      RVector a = agent.act(state.s);
      for (int k = 0; k < adim; ++k) a(k) = std::clamp(a(k) + sigma * normal(rng), -1.0, 1.0);
      int fallbacks = 0;
      StepResult r;
      r.next = env_state(env, action_to_precoders(a, env.topology, &fallbacks));
      r.reward = -r.next.p2.total;
      out.fallbacks += fallbacks;

      TrainTrace& t = out.trace;
      t.reward.push_back(r.reward);
      t.desired_distance.push_back(r.next.p2.desired.sum());
      t.interference_distance.push_back(r.next.p2.interference.sum());
      t.total_distance.push_back(r.next.p2.total);
      t.avg_throughput.push_back(ia::mmse_rates(env.channels, r.next.precoders, env.topology).avg_user_throughput);

      buffer.push({state.s, a, r.reward, r.next.s});
      if (buffer.size() >= static_cast<std::size_t>(config.batch))
        t.critic_loss.push_back(agent.update(buffer, rng).critic_loss);
      state = std::move(r.next);
    }
    sigma *= config.noise_decay;
  }
  return out;
}

Scheme parse_scheme(std::string_view name) {
  if (name == "rl_blind") return Scheme::RlBlind;
  if (name == "rl_maxsnr") return Scheme::RlMaxSnr;
  fail(ErrorCode::BadConfig, "unknown RL scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(Scheme s) { return s == Scheme::RlBlind ? "rl_blind" : "rl_maxsnr"; }

RlRecord run_rl_scheme(Scheme scheme, const ChannelSet& channels, const Topology& topology, const DdpgConfig& config,
                       std::uint64_t seed) {
  Env env;
  env.channels = channels;
  env.topology = topology;
  env.delta = netmodel::delta_weights(topology.alpha);
  env.assignment = subspace::build_assignment(
      scheme == Scheme::RlBlind ? subspace::AssignmentStrategy::Blind : subspace::AssignmentStrategy::MaxSnr, channels,
      topology, seed);

  DdpgAgent agent(topology.K, action_dim(topology), config, seed);
  RlRecord rec;
  rec.scheme = scheme;
  rec.trace = train(env, agent, config, seed).trace;

  EnvState state = env_reset(env, subspace::user_seed(seed, static_cast<int>(kGreedyStream & 0x7fffffff)));
  double best = -std::numeric_limits<double>::infinity();
  for (int step = 0; step < config.steps_per_episode; ++step) {
    StepResult r = env_step(env, agent.act(state.s));
    if (r.reward > best) {
      best = r.reward;
      rec.precoders = r.next.precoders;
      rec.greedy_total_distance = r.next.p2.total;
    }
    state = std::move(r.next);
  }
  rec.rates = ia::mmse_rates(channels, rec.precoders, topology);
  return rec;
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  if (path.empty()) fail(ErrorCode::IoFailure, "empty trace path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out << "step,reward,desired_distance,interference_distance,total_distance,avg_throughput\n";
  char buf[256];
  for (std::size_t k = 0; k < trace.reward.size(); ++k) {
    const int n = std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", k, trace.reward[k],
                                trace.desired_distance[k], trace.interference_distance[k], trace.total_distance[k],
                                trace.avg_throughput[k]);
    out.write(buf, n);
  }
  if (!out) fail(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

}  // namespace ialab::rl
