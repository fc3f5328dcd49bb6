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
#include <random>
#include <set>

#include "ialab/error.hpp"
#include "ialab/forecaster.hpp"

using namespace ialab;
using namespace ialab::forecaster;
using netmodel::Topology;

namespace {

EncoderConfig small_config(int f_in) {
  EncoderConfig c;
  c.L = 3;
  c.f_in = f_in;
  c.d_model = 8;
  c.heads = 2;
  c.layers = 1;
  c.ff = 10;
  c.epochs = 3;
  c.batch = 16;
  c.seed = 7;
  return c;
}

ad::Tensor window_tensor(int B, int L, int f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(B * L * f));
  for (double& x : v) x = u(rng);
  return ad::constant({B, L, f}, v);
}

netmodel::ChannelTrace constant_trace(int T) {
  netmodel::ChannelTrace tr;
  tr.meta.K = 1;
  tr.meta.mt = 1;
  tr.meta.nr = 1;
  tr.meta.T = T;
  netmodel::ChannelSet s(1, 1, 1);
  s(0, 0)(0, 0) = cd(0.3, -0.7);
  tr.samples.assign(static_cast<std::size_t>(T), s);
  return tr;
}

std::string tmp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_SUITE("forecaster") {
  TEST_CASE("attention examples") {
    const ad::Tensor one = attention(ad::constant({1, 1, 2}, {0.3, 0.4}), ad::constant({1, 1, 2}, {1.0, 2.0}),
                                     ad::constant({1, 1, 3}, {5.0, 6.0, 7.0}));
    CHECK(one.value() == std::vector<double>{5.0, 6.0, 7.0});

    // Query orthogonal to every key: uniform weights, output is the mean value row.
    const ad::Tensor flat = attention(ad::constant({1, 1, 2}, {1.0, 0.0}), ad::constant({1, 3, 2}, {0, 1, 0, 2, 0, 3}),
                                      ad::constant({1, 3, 1}, {1.0, 2.0, 6.0}));
    CHECK(flat.value()[0] == doctest::Approx(3.0));

    // Q = K = 2 I, d_k = 2: scores 4 / sqrt(2) on the diagonal, 0 elsewhere.
    const ad::Tensor q = ad::constant({1, 2, 2}, {2, 0, 0, 2});
    const ad::Tensor v = ad::constant({1, 2, 2}, {1, 2, 3, 4});
    const double e = std::exp(4.0 / std::sqrt(2.0));
    const double hi = e / (e + 1.0);
    const double lo = 1.0 / (e + 1.0);
    const ad::Tensor out = attention(q, q, v);
    const std::vector<double> want{hi * 1 + lo * 3, hi * 2 + lo * 4, lo * 1 + hi * 3, lo * 2 + hi * 4};
    for (std::size_t k = 0; k < 4; ++k) CHECK(out.value()[k] == doctest::Approx(want[k]).epsilon(1e-12));

    const ad::Tensor w = attention_weights(window_tensor(2, 4, 3, 1), window_tensor(2, 4, 3, 2));
    for (int r = 0; r < 8; ++r) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c) s += w.value()[static_cast<std::size_t>(r * 4 + c)];
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    CHECK_THROWS_WITH_AS(attention(q, ad::zeros({1, 2, 3}), v), doctest::Contains("ShapeMismatch"), Error);
  }

  TEST_CASE("positional table") {
    const std::vector<double> pe = positional_table(4, 6);
    CHECK(pe.size() == 24);
    for (int pos = 0; pos < 4; ++pos)
      for (int i = 0; i < 3; ++i) {
        const double angle = pos / std::pow(10000.0, 2.0 * i / 6.0);
        CHECK(pe[static_cast<std::size_t>(pos * 6 + 2 * i)] == doctest::Approx(std::sin(angle)).epsilon(1e-14));
        CHECK(pe[static_cast<std::size_t>(pos * 6 + 2 * i + 1)] == doctest::Approx(std::cos(angle)).epsilon(1e-14));
      }
  }

  TEST_CASE("encoder config validation") {
    EncoderConfig c;
    CHECK_NOTHROW(c.validate());
    c.heads = 7;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("BadConfig"), Error);
    c = EncoderConfig{};
    c.H = 2;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("BadConfig"), Error);
    CHECK(EncoderConfig{}.f_in == netmodel::feature_count(3, 2, 2));
  }

  TEST_CASE("encoder forward") {
    const EncoderConfig c = small_config(6);
    TransformerModel m(c);
    const ad::Tensor x = window_tensor(2, c.L, c.f_in, 3);
    const ad::Tensor y = m.forward(x);
    CHECK(y.shape() == ad::Shape{2, c.f_in});
    CHECK(m.forward(x).value() == y.value());

    // Swapping two early window rows moves the output through the positions.
    std::vector<double> sw = x.value();
    for (int f = 0; f < c.f_in; ++f) std::swap(sw[static_cast<std::size_t>(f)], sw[static_cast<std::size_t>(c.f_in + f)]);
    const ad::Tensor ys = m.forward(ad::constant(x.shape(), sw));
    double diff = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) diff = std::max(diff, std::abs(ys.value()[k] - y.value()[k]));
    CHECK(diff > 1e-9);

    // Zero weights and biases leave only the newest input row.
    TransformerModel z(c);
    for (ad::Tensor p : z.parameters()) std::fill(p.value().begin(), p.value().end(), 0.0);
    const ad::Tensor yz = z.forward(x);
    for (int b = 0; b < 2; ++b)
      for (int f = 0; f < c.f_in; ++f)
        CHECK(yz.value()[static_cast<std::size_t>(b * c.f_in + f)] ==
              x.value()[static_cast<std::size_t>((b * c.L + c.L - 1) * c.f_in + f)]);

    CHECK_THROWS_WITH_AS(m.forward(window_tensor(1, c.L + 1, c.f_in, 1)), doctest::Contains("ShapeMismatch"), Error);
  }

  TEST_CASE("seeded encoder output is pinned") {
    const EncoderConfig c = small_config(4);
    const TransformerModel m(c);
    const ad::Tensor y = m.forward(window_tensor(1, c.L, c.f_in, 99));
    const std::vector<double> golden{1.003019368101647, 0.027195523599865823, 0.27342157486293661,
                                     0.71994800937496217};
    REQUIRE(y.size() == golden.size());
    for (std::size_t k = 0; k < golden.size(); ++k) CHECK(y.value()[k] == doctest::Approx(golden[k]).epsilon(1e-10));
  }

  TEST_CASE("parameters are uniquely named and round trip through a checkpoint") {
    const EncoderConfig c = small_config(4);
    const TransformerModel m(c);
    std::set<std::string> names;
    for (const ad::Tensor& p : m.parameters()) names.insert(p.name());
    CHECK(names.size() == m.parameters().size());

    const std::string path = tmp_path("ialab_fc_ckpt.txt");
    m.save(path);
    EncoderConfig other = c;
    other.seed = 1234;
    TransformerModel back(other);
    back.load(path);
    const ad::Tensor x = window_tensor(3, c.L, c.f_in, 5);
    CHECK(back.forward(x).value() == m.forward(x).value());
    std::remove(path.c_str());
  }

  TEST_CASE("full encoder gradient check") {
    EncoderConfig c = small_config(4);
    c.layers = 2;
    c.k1 = 3;
    c.k2 = 1;
    const TransformerModel m(c);
    const ad::Tensor x = window_tensor(2, c.L, c.f_in, 17);
    const ad::Tensor target = window_tensor(1, 2, c.f_in, 18);
    const auto f = [&] { return ad::mse(m.forward(x), ad::reshape(target, {2, c.f_in})); };
    ad::GradCheckOptions o;
    o.max_entries = 12;
    CHECK(ad::grad_check(f, m.parameters(), o) < 1e-4);
  }

  TEST_CASE("training boundaries") {
    netmodel::ChannelTrace tr = constant_trace(3000);
    const netmodel::ScaledDataset ds = netmodel::prepare_dataset(tr);
    EncoderConfig c = small_config(2);
    c.epochs = 0;
    const TrainResult none = train_predictor(ds, c);
    CHECK(none.best_epoch == 0);
    const TransformerModel fresh(c);
    const ad::Tensor x = window_tensor(1, c.L, c.f_in, 1);
    CHECK(none.model.forward(x).value() == fresh.forward(x).value());

    c.epochs = 5;
    const TrainResult fit = train_predictor(ds, c);
    REQUIRE(fit.train_loss.size() == 5);
    for (const double l : fit.train_loss) CHECK(std::isfinite(l));
    CHECK(fit.train_loss.back() < 1e-4);
    CHECK(fit.train_loss.back() < fit.train_loss.front());

    // The fitted model reproduces the constant channel.
    const std::vector<netmodel::ChannelSet> window(static_cast<std::size_t>(c.L), tr.samples[0]);
    const netmodel::ChannelSet next = predict_next(fit.model, ds.scaler, window);
    CHECK(std::abs(next(0, 0)(0, 0) - tr.samples[0](0, 0)(0, 0)) < 1e-12);
    const std::vector<netmodel::ChannelSet> short_window(2, tr.samples[0]);
    CHECK_THROWS_WITH_AS(predict_next(fit.model, ds.scaler, short_window), doctest::Contains("WindowLengthMismatch"),
                         Error);

    // Twelve samples leave seven training rows, fewer than a window of eight plus its target.
    const netmodel::ScaledDataset tiny = netmodel::prepare_dataset(constant_trace(12));
    EncoderConfig wide = c;
    wide.L = 8;
    CHECK_THROWS_WITH_AS(train_predictor(tiny, wide), doctest::Contains("InsufficientData"), Error);
  }

  TEST_CASE("saved and live models predict the same channels") {
    const Topology t = Topology::uniform(1, 2, 2, 1, 10.0);
    const netmodel::ChannelTrace tr = netmodel::sample_correlated_trace(t, 80, 0.05, 8, 3);
    const netmodel::ScaledDataset ds = netmodel::prepare_dataset(tr);
    EncoderConfig c = small_config(ds.raw.cols());
    c.epochs = 2;
    const TrainResult r = train_predictor(ds, c);
    const std::string path = tmp_path("ialab_fc_live.txt");
    r.model.save(path);
    TransformerModel loaded(c);
    loaded.load(path);
    const std::vector<netmodel::ChannelSet> w(tr.samples.begin() + 10, tr.samples.begin() + 10 + c.L);
    CHECK(predict_next(loaded, ds.scaler, w).H == predict_next(r.model, ds.scaler, w).H);
    std::remove(path.c_str());
  }

  TEST_CASE("seeded end-to-end forecast is pinned") {
    const Topology t = Topology::uniform(3, 2, 2, 1, 10.0);
    const netmodel::ChannelTrace tr = netmodel::sample_correlated_trace(t, 300, 0.05, 16, 11);
    const netmodel::ScaledDataset ds = netmodel::prepare_dataset(tr);
    EncoderConfig c = small_config(ds.raw.cols());
    c.epochs = 4;
    const TrainResult r = train_predictor(ds, c);
    const ForecastReport rep = evaluate_forecaster(r.model, ds);
    CHECK(rep.windows == ds.test.size() - c.L);
    CHECK(rep.per_step_nmse_db.size() == static_cast<std::size_t>(rep.windows));
    // Four epochs of a tiny model: a regression value, not a quality bar.
    CHECK(rep.model_nmse_db == doctest::Approx(3.1544900199448795).epsilon(1e-9));
    CHECK(rep.persistence_nmse_db == doctest::Approx(-10.113418301612926).epsilon(1e-9));
  }

  TEST_CASE("nmse examples") {
    const Topology t = Topology::uniform(2, 2, 2, 1, 10.0);
    std::vector<netmodel::ChannelSet> truth{netmodel::sample_channel_set(t, 1), netmodel::sample_channel_set(t, 2)};
    CHECK(nmse_db(truth, truth) == -300.0);
    std::vector<netmodel::ChannelSet> zero = truth;
    std::vector<netmodel::ChannelSet> twice = truth;
    for (auto& s : zero)
      for (auto& h : s.H) h.setZero();
    for (auto& s : twice)
      for (auto& h : s.H) h *= 2.0;
    CHECK(nmse_db(truth, zero) == doctest::Approx(0.0));
    CHECK(std::abs(nmse_db(truth, twice)) < 1e-12);

    std::vector<netmodel::ChannelSet> noisy{netmodel::sample_channel_set(t, 3), netmodel::sample_channel_set(t, 4)};
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t h = 0; h < noisy[k].H.size(); ++h) noisy[k].H[h] = truth[k].H[h] + 0.1 * noisy[k].H[h];
    std::vector<netmodel::ChannelSet> ts = truth;
    std::vector<netmodel::ChannelSet> ns = noisy;
    for (auto* v : {&ts, &ns})
      for (auto& s : *v)
        for (auto& h : s.H) h *= -3.5;
    CHECK(nmse_db(ts, ns) == doctest::Approx(nmse_db(truth, noisy)).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(nmse_db(zero, truth), doctest::Contains("ZeroReference"), Error);
    CHECK_THROWS_AS(nmse_db(truth, {truth[0]}), Error);
  }

  TEST_CASE("alignment on predicted channels") {
    const Topology base = Topology::uniform(3, 2, 2, 1, 20.0);
    double perfect = 0.0;
    double random = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Topology tw = netmodel::apply_scenario(netmodel::Scenario::WeakInterference, 20.0, base, s);
      const netmodel::ChannelSet truth = netmodel::sample_channel_set(tw, 700 + s);
      const netmodel::ChannelSet other = netmodel::sample_channel_set(tw, 900 + s);
      const double p = ia_rate_on(truth, truth, tw, ReceiverKind::WhitenedMatched, 50, s).sum_rate;
      const double zf = ia_rate_on(truth, truth, tw, ReceiverKind::ZeroForcing, 50, s).sum_rate;
      CHECK(p > 0.0);
      CHECK(zf > 0.0);
      CHECK(p / ia_rate_on(truth, truth, tw, ReceiverKind::WhitenedMatched, 50, s).sum_rate == 1.0);
      perfect += p;
      random += ia_rate_on(other, truth, tw, ReceiverKind::WhitenedMatched, 50, s).sum_rate;
    }
    CHECK(random > 0.0);
    CHECK(random < 0.9 * perfect);
  }
}
