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


#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "ialab/error.hpp"
#include "ialab/rlagent.hpp"
#include "util.hpp"

using namespace ialab;
using namespace ialab::rl;

namespace {

Env make_env(const Topology& t, std::uint64_t seed, subspace::AssignmentStrategy s = subspace::AssignmentStrategy::MaxSnr) {
  Env e;
  e.topology = t;
  e.channels = netmodel::sample_channel_set(t, seed);
  e.delta = netmodel::delta_weights(t.alpha);
  e.assignment = subspace::build_assignment(s, e.channels, t, seed);
  return e;
}

RVector random_action(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RVector a(n);
  for (int k = 0; k < n; ++k) a(k) = u(rng);
  return a;
}

DdpgConfig small_ddpg() {
  DdpgConfig c;
  c.h1 = 24;
  c.h2 = 16;
  c.episodes = 6;
  c.steps_per_episode = 10;
  c.batch = 8;
  c.capacity = 1000;
  return c;
}

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t k = begin; k < end; ++k) s += v[k];
  return s / static_cast<double>(end - begin);
}

}  // namespace

TEST_SUITE("rlagent") {
  TEST_CASE("reset") {
    const Topology t1 = Topology::uniform(1, 3, 3, 1, 10.0);
    const Env e1 = make_env(t1, 4);
    const EnvState s1 = env_reset(e1, 2);
    REQUIRE(s1.s.size() == 1);
    const CMatrix g = e1.channels(0, 0) * s1.precoders.V[0];
    CHECK(s1.s(0) == doctest::Approx(subspace::chordal_distance(subspace::orthogonal_projector(g), e1.assignment.W_D[0])));

    const EnvState again = env_reset(e1, 2);
    CHECK(again.s == s1.s);

    const Topology t6 = Topology::uniform(6, 4, 4, 1, 15.0);
    const Env e6 = make_env(t6, 5);
    CHECK(env_reset(e6, 1).s.size() == 6);
    CHECK(action_dim(t6) == 48);
  }

  TEST_CASE("action mapping") {
    const Topology t = Topology::uniform(3, 4, 4, 2, 10.0);
    // Orthonormal columns have entries inside [-1, 1]; QR with positive R diagonal reproduces them.
    PrecoderSet p;
    for (int j = 0; j < 3; ++j) p.V.push_back(linops::thin_qr_positive(testutil::random_cmatrix(4, 2, 10 + static_cast<std::uint64_t>(j))));
    const PrecoderSet back = action_to_precoders(precoders_to_action(p), t);
    for (std::size_t j = 0; j < 3; ++j) CHECK(testutil::max_abs(back.V[j] - p.V[j]) < 1e-12);

    int fallbacks = 0;
    const PrecoderSet zero = action_to_precoders(RVector::Zero(action_dim(t)), t, &fallbacks);
    CHECK(fallbacks == 3);
    for (const CMatrix& v : zero.V) CHECK(v == subspace::canonical_columns(4, 2));

    for (std::uint64_t s = 0; s < 50; ++s) {
      RVector a = random_action(action_dim(t), s);
      a(0) = 7.0;  // clamped
      for (const CMatrix& v : action_to_precoders(a, t).V) CHECK(linops::orthonormality_defect(v) < 1e-10);
    }
    CHECK_THROWS_WITH_AS(action_to_precoders(RVector::Zero(5), t), doctest::Contains("DimensionMismatch"), Error);
  }

  TEST_CASE("step reward identities") {
    const Topology base = Topology::uniform(4, 3, 3, 1, 15.0);
    for (std::uint64_t s = 0; s < 30; ++s) {
      const Topology t = netmodel::apply_scenario(netmodel::Scenario::WeakInterference, 15.0, base, s);
      const Env e = make_env(t, 60 + s, s % 2 ? subspace::AssignmentStrategy::Blind : subspace::AssignmentStrategy::MaxSnr);
      const RVector a = random_action(action_dim(t), s);
      const StepResult r = env_step(e, a);
      CHECK(r.reward == -r.next.s.sum());
      const subspace::P2Value p2 = subspace::p2_value(e.channels, action_to_precoders(a, t), e.assignment, e.delta, t);
      CHECK(std::abs(r.reward + p2.total) <= 1e-12);
      double lo = 0.0;
      double hi = 0.0;
      for (int j = 0; j < 4; ++j) {
        lo -= e.delta(j, j);
        hi += 1.0 - e.delta(j, j);
      }
      CHECK(r.reward >= lo - 1e-12);
      CHECK(r.reward <= hi + 1e-12);
      for (const CMatrix& v : r.next.precoders.V) CHECK(linops::orthonormality_defect(v) < 1e-10);
    }
  }

  TEST_CASE("perfect geometry reward") {
    Topology t = Topology::uniform(2, 2, 2, 1, 10.0);
    t.alpha(0, 1) = 0.25;
    t.alpha(1, 0) = 0.5;
    Env e;
    e.topology = t;
    e.delta = netmodel::delta_weights(t.alpha);
    e.channels = ChannelSet(2, 2, 2);
    e.channels(0, 0) = CMatrix::Identity(2, 2);
    e.channels(1, 1) = CMatrix::Identity(2, 2);
    e.channels(0, 1) = CMatrix::Zero(2, 2);
    e.channels(0, 1)(1, 0) = 1.0;
    e.channels(1, 0) = e.channels(0, 1);
    CMatrix e1 = CMatrix::Zero(2, 1);
    e1(0, 0) = 1.0;
    e.assignment.S_D = {e1, e1};
    e.assignment.S_I = {linops::null_basis(e1), linops::null_basis(e1)};
    e.assignment.W_D = {e1 * e1.adjoint(), e1 * e1.adjoint()};
    PrecoderSet p;
    p.V = {e1, e1};
    const StepResult r = env_step(e, precoders_to_action(p));
    CHECK(r.reward == doctest::Approx((1.0 - e.delta(0, 0)) + (1.0 - e.delta(1, 1))).epsilon(1e-12));
  }

  TEST_CASE("replay buffer") {
    ReplayBuffer b(3);
    std::mt19937_64 rng(1);
    CHECK_THROWS_WITH_AS(b.sample(1, rng), doctest::Contains("BufferTooSmall"), Error);
    for (int k = 0; k < 5; ++k) b.push({RVector::Constant(1, k), RVector::Zero(1), static_cast<double>(k), RVector::Zero(1)});
    CHECK(b.size() == 3);
    std::set<double> seen;
    for (int k = 0; k < 100; ++k)
      for (const Transition* t : b.sample(3, rng)) seen.insert(t->r);
    CHECK_THROWS_WITH_AS(b.sample(4, rng), doctest::Contains("BufferTooSmall"), Error);
    CHECK(seen == std::set<double>{2.0, 3.0, 4.0});
    CHECK_THROWS_AS(ReplayBuffer(0), Error);
  }

  TEST_CASE("soft update contracts toward the online network") {
    std::mt19937_64 rng(3);
    const Mlp online({3, 5, 2}, false, rng, "on");
    Mlp target({3, 5, 2}, false, rng, "tg");
    const auto gap = [&] {
      double g = 0.0;
      const auto a = online.parameters();
      const auto b = target.parameters();
      for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t e = 0; e < a[k].size(); ++e) g += std::pow(a[k].value()[e] - b[k].value()[e], 2);
      return std::sqrt(g);
    };
    double prev = gap();
    for (int s = 0; s < 10; ++s) {
      target.soft_update_from(online, 0.1);
      const double now = gap();
      CHECK(now < prev);
      CHECK(now == doctest::Approx(0.9 * prev).epsilon(1e-9));
      prev = now;
    }
    target.soft_update_from(online, 1.0);
    CHECK(gap() == 0.0);
  }

  TEST_CASE("ddpg update boundaries") {
    DdpgConfig c = small_ddpg();
    c.tau = 1.0;
    c.batch = 2;
    DdpgAgent agent(3, 4, c, 9);
    ReplayBuffer b(10);
    std::mt19937_64 rng(2);
    CHECK_THROWS_WITH_AS(agent.update(b, rng), doctest::Contains("BufferTooSmall"), Error);
    for (int k = 0; k < 4; ++k) b.push({random_action(3, k), random_action(4, 10 + k), 0.3 * k, random_action(3, 20 + k)});
    agent.update(b, rng);
    const auto same = [](const Mlp& x, const Mlp& y) {
      const auto a = x.parameters();
      const auto t = y.parameters();
      for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].value() != t[k].value()) return false;
      return true;
    };
    CHECK(same(agent.actor(), agent.actor_target()));
    CHECK(same(agent.critic(), agent.critic_target()));
  }

  TEST_CASE("critic converges to the reward when gamma is zero") {
    DdpgConfig c = small_ddpg();
    c.gamma = 0.0;
    c.batch = 1;
    DdpgAgent agent(2, 4, c, 11);
    ReplayBuffer b(1);
    const RVector s = random_action(2, 1);
    const RVector a = random_action(4, 2);
    b.push({s, a, 0.7, random_action(2, 3)});
    std::mt19937_64 rng(5);
    int steps = 0;
    while (steps < 2000 && std::abs(agent.q_value(s, a) - 0.7) >= 1e-3) {
      agent.update(b, rng);
      ++steps;
    }
    CHECK(std::abs(agent.q_value(s, a) - 0.7) < 1e-3);
    CHECK(steps <= 2000);
  }

  TEST_CASE("critic gradient check at the default width") {
    DdpgConfig c;
    DdpgAgent agent(6, 48, c, 13);
    const RVector sv = random_action(12, 1);
    const ad::Tensor s = ad::constant({2, 6}, std::vector<double>(sv.data(), sv.data() + 12));
    const RVector av = random_action(96, 2);
    const ad::Tensor a = ad::constant({2, 48}, std::vector<double>(av.data(), av.data() + 96));
    std::vector<ad::Tensor> ps = agent.critic().parameters();
    ad::GradCheckOptions o;
    o.max_entries = 40;
    o.seed = 3;
    CHECK(ad::grad_check([&] { return ad::sum(agent.critic_forward(s, a)); }, ps, o) < 1e-5);
  }

  TEST_CASE("training is deterministic and logs every step") {
    const Topology base = Topology::uniform(3, 3, 3, 1, 15.0);
    const Topology t = netmodel::apply_scenario(netmodel::Scenario::WeakInterference, 15.0, base, 1);
    const Env e = make_env(t, 8);
    const DdpgConfig c = small_ddpg();
    DdpgAgent a1(3, action_dim(t), c, 4);
    DdpgAgent a2(3, action_dim(t), c, 4);
    const TrainOutcome o1 = train(e, a1, c, 4);
    const TrainOutcome o2 = train(e, a2, c, 4);
    const std::size_t n = static_cast<std::size_t>(c.episodes * c.steps_per_episode);
    CHECK(o1.trace.reward.size() == n);
    CHECK(o1.trace.total_distance.size() == n);
    CHECK(o1.trace.avg_throughput.size() == n);
    CHECK(o1.trace.critic_loss.size() == n - static_cast<std::size_t>(c.batch) + 1);
    CHECK(o1.trace.reward == o2.trace.reward);
    CHECK(o1.trace.critic_loss == o2.trace.critic_loss);
    for (std::size_t k = 0; k < n; ++k)
      CHECK(o1.trace.total_distance[k] == doctest::Approx(o1.trace.desired_distance[k] - o1.trace.interference_distance[k]));
  }

  TEST_CASE("random policy reward is stationary") {
    const Topology base = Topology::uniform(3, 3, 3, 1, 15.0);
    const Topology t = netmodel::apply_scenario(netmodel::Scenario::WeakInterference, 15.0, base, 2);
    const Env e = make_env(t, 9);
    DdpgConfig c = small_ddpg();
    c.noise = 1e3;  // swamps the actor: every action entry is a fair coin at +-1
    c.noise_decay = 1.0;
    c.episodes = 40;
    DdpgAgent agent(3, action_dim(t), c, 6);
    const std::vector<double> r = train(e, agent, c, 6).trace.reward;
    const std::size_t half = r.size() / 2;
    double var = 0.0;
    const double mu = mean(r, 0, r.size());
    for (const double x : r) var += (x - mu) * (x - mu) / static_cast<double>(r.size() - 1);
    const double se = std::sqrt(2.0 * var / static_cast<double>(half));
    CHECK(std::abs(mean(r, 0, half) - mean(r, half, r.size())) < 4.0 * se);
  }

  TEST_CASE("max-SNR scheme moves the desired distance down on strong direct links") {
    Topology t = Topology::uniform(3, 3, 3, 1, 20.0);
    t = netmodel::apply_scenario(netmodel::Scenario::WeakInterference, 20.0, t, 3);
    ChannelSet ch = netmodel::sample_channel_set(t, 77);
    for (int j = 0; j < 3; ++j) ch(j, j).diagonal().array() += 4.0;
    DdpgConfig c = small_ddpg();
    c.episodes = 30;
    c.batch = 16;
    const RlRecord rec = run_rl_scheme(Scheme::RlMaxSnr, ch, t, c, 5);
    const std::vector<double>& d = rec.trace.desired_distance;
    CHECK(mean(d, d.size() - 20, d.size()) < mean(d, 0, 20));
    CHECK(rec.rates.rates.size() == 3);
    for (const CMatrix& v : rec.precoders.V) CHECK(linops::orthonormality_defect(v) < 1e-10);
    CHECK_THROWS_WITH_AS(parse_scheme("rl_other"), doctest::Contains("BadConfig"), Error);
    CHECK(parse_scheme(scheme_name(Scheme::RlBlind)) == Scheme::RlBlind);
  }

  TEST_CASE("trace csv and actor checkpoint") {
    TrainTrace tr;
    tr.reward = {1.0, 2.0};
    tr.desired_distance = {0.5, 0.25};
    tr.interference_distance = {0.1, 0.2};
    tr.total_distance = {0.4, 0.05};
    tr.avg_throughput = {3.0, 4.0};
    const std::string path = (std::filesystem::temp_directory_path() / "ialab_rl_trace.csv").string();
    write_trace_csv(tr, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,reward,desired_distance,interference_distance,total_distance,avg_throughput");
    int lines = 0;
    for (std::string l; std::getline(in, l);) lines += l.empty() ? 0 : 1;
    CHECK(lines == 2);
    std::remove(path.c_str());

    const DdpgConfig c = small_ddpg();
    DdpgAgent a(3, 6, c, 1);
    DdpgAgent b(3, 6, c, 2);
    const std::string ck = (std::filesystem::temp_directory_path() / "ialab_actor.txt").string();
    a.save_actor(ck);
    b.load_actor(ck);
    const RVector s = random_action(3, 9);
    CHECK(a.act(s) == b.act(s));
    std::remove(ck.c_str());
  }
}
