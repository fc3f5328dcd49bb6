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

#include "ialab/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ialab/error.hpp"

namespace ialab::netmodel {

Topology Topology::uniform(int K, int mt, int nr, int streams, double snr_db, double noise_var) {
  Topology t;
  t.K = K;
  t.mt = mt;
  t.nr = nr;
  t.d.assign(static_cast<std::size_t>(std::max(K, 0)), streams);
  t.noise_var = noise_var;
  t.alpha = RMatrix::Ones(std::max(K, 0), std::max(K, 0));
  t.set_snr_db(snr_db);
  return t;
}

void Topology::set_snr_db(double snr) {
  snr_db = snr;
  power = noise_var * std::pow(10.0, snr / 10.0);
}

int Topology::max_streams() const { return d.empty() ? 0 : *std::max_element(d.begin(), d.end()); }

int Topology::total_streams() const {
  int total = 0;
  for (int v : d) total += v;
  return total;
}

void Topology::validate() const {
  if (K < 1 || mt < 1 || nr < 1)
    fail(ErrorCode::BadConfig, "topology needs K, mt, nr >= 1");
  if (static_cast<int>(d.size()) != K) fail(ErrorCode::BadConfig, "topology: stream list length differs from K");
  for (int v : d)
    if (v < 1 || v > std::min(mt, nr))
      fail(ErrorCode::BadConfig, "topology: d_j must lie in [1, min(mt, nr)]");
  if (alpha.rows() != K || alpha.cols() != K) fail(ErrorCode::BadConfig, "topology: alpha must be K x K");
  if ((alpha.array() <= 0.0).any()) fail(ErrorCode::NonPositiveAlpha, "topology: alpha entries must be positive");
  if (!(noise_var > 0.0) || !std::isfinite(snr_db)) fail(ErrorCode::BadConfig, "topology: bad noise or SNR");
}

ChannelSet::ChannelSet(int k, int nr, int mt) : K(k), H(static_cast<std::size_t>(k * k), CMatrix::Zero(nr, mt)) {}

std::vector<double> doppler_fir_taps(double doppler, int fir_order) {
  if (fir_order < 1) fail(ErrorCode::BadConfig, "fir_order must be >= 1");
  std::vector<double> taps(static_cast<std::size_t>(fir_order));
  const double centre = 0.5 * (fir_order - 1);
  double energy = 0.0;
  for (int n = 0; n < fir_order; ++n) {
    const double window =
        fir_order == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (fir_order - 1));
    const double tau = n - centre;
    const double tap = std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * doppler * std::abs(tau)) * window;
    taps[static_cast<std::size_t>(n)] = tap;
    energy += tap * tap;
  }
  const double norm = 1.0 / std::sqrt(energy);
  for (double& t : taps) t *= norm;
  return taps;
}

ChannelTrace sample_correlated_trace(const Topology& topology, int T, double doppler, int fir_order,
                                     std::uint64_t seed) {
  if (!(doppler > 0.0 && doppler < 0.5)) fail(ErrorCode::BadConfig, "doppler must lie in (0, 0.5)");
  if (fir_order < 1) fail(ErrorCode::BadConfig, "fir_order must be >= 1");
  if (T < 1 || T < fir_order) fail(ErrorCode::BadConfig, "trace length must be >= max(1, fir_order)");
  if (topology.K < 1 || topology.mt < 1 || topology.nr < 1) fail(ErrorCode::BadConfig, "bad topology dimensions");

  const std::vector<double> taps = doppler_fir_taps(doppler, fir_order);
  const int K = topology.K;
  const int nr = topology.nr;
  const int mt = topology.mt;
  const std::size_t raw_len = static_cast<std::size_t>(T + fir_order - 1);

  ChannelTrace trace;
  trace.meta = TraceMeta{seed, K, mt, nr, T, doppler, fir_order};
  trace.samples.assign(static_cast<std::size_t>(T), ChannelSet(K, nr, mt));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<cd> raw(raw_len);
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) {
      for (int c = 0; c < mt; ++c) {
        for (int r = 0; r < nr; ++r) {
          for (auto& x : raw) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            x = cd(re, im);
          }
          for (int t = 0; t < T; ++t) {
            cd acc(0.0, 0.0);
            const std::size_t newest = static_cast<std::size_t>(t + fir_order - 1);
            for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * raw[newest - k];
            trace.samples[static_cast<std::size_t>(t)](j, i)(r, c) = acc;
          }
        }
      }
    }
  }
  return trace;
}

ChannelSet sample_channel_set(const Topology& topology, std::uint64_t seed) {
  return sample_correlated_trace(topology, 1, 0.25, 1, seed).samples.front();
}

RMatrix delta_weights(const RMatrix& alpha) {
  if (alpha.rows() != alpha.cols() || alpha.size() == 0)
    fail(ErrorCode::DimensionMismatch, "delta_weights: alpha must be square and non-empty");
  if ((alpha.array() <= 0.0).any() || !alpha.allFinite())
    fail(ErrorCode::NonPositiveAlpha, "delta_weights: alpha entries must be positive");
  RMatrix delta = alpha;
  for (Eigen::Index j = 0; j < alpha.cols(); ++j) delta.col(j) /= alpha.col(j).sum();
  return delta;
}

Scenario parse_scenario(std::string_view name) {
  if (name == "weak_interference" || name == "weak" || name == "1") return Scenario::WeakInterference;
  if (name == "equal_power" || name == "equal" || name == "2") return Scenario::EqualPower;
  fail(ErrorCode::UnknownScenario, "unknown scenario '" + std::string(name) + "'");
}

std::string_view scenario_name(Scenario s) {
  return s == Scenario::WeakInterference ? "weak_interference" : "equal_power";
}

PowerAssignment scenario_powers(Scenario scenario, double snr_db, const Topology& topology,
                                std::uint64_t seed) {
  const int K = topology.K;
  PowerAssignment out;
  out.alpha = RMatrix::Ones(K, K);
  out.power = topology.noise_var * std::pow(10.0, snr_db / 10.0);
  out.snr_outside_sweep = snr_db < 0.0 || snr_db > 25.0;
  if (scenario == Scenario::WeakInterference) {
    std::mt19937_64 rng(seed ^ 0x5ce9a510c0ffee00ULL);
    std::uniform_real_distribution<double> below(10.0, 15.0);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        if (i != j) out.alpha(i, j) = std::pow(10.0, -below(rng) / 10.0);
  }
  return out;
}

Topology apply_scenario(Scenario scenario, double snr_db, Topology topology, std::uint64_t seed) {
  const PowerAssignment p = scenario_powers(scenario, snr_db, topology, seed);
  topology.snr_db = snr_db;
  topology.alpha = p.alpha;
  topology.power = p.power;
  return topology;
}

int feature_count(int K, int mt, int nr) { return 2 * mt * nr * K * K; }

RVector reshape_channel_set(const ChannelSet& set) {
  const int K = set.K;
  const int nr = set.nr();
  const int mt = set.mt();
  const int per_link = nr * mt;
  RVector out(feature_count(K, mt, nr));
  Eigen::Index pos = 0;
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) {
      const CMatrix& h = set(j, i);
      for (int c = 0; c < mt; ++c)
        for (int r = 0; r < nr; ++r) {
          out(pos + c * nr + r) = h(r, c).real();
          out(pos + per_link + c * nr + r) = h(r, c).imag();
        }
      pos += 2 * per_link;
    }
  }
  return out;
}

ChannelSet unreshape_channel_set(const Eigen::Ref<const RVector>& features, int K, int nr, int mt) {
  if (features.size() != feature_count(K, mt, nr))
    fail(ErrorCode::DimensionMismatch, "unreshape: feature vector has wrong length");
  ChannelSet set(K, nr, mt);
  const int per_link = nr * mt;
  Eigen::Index pos = 0;
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) {
      CMatrix& h = set(j, i);
      for (int c = 0; c < mt; ++c)
        for (int r = 0; r < nr; ++r) h(r, c) = cd(features(pos + c * nr + r), features(pos + per_link + c * nr + r));
      pos += 2 * per_link;
    }
  }
  return set;
}

RMatrix reshape_csi(const ChannelTrace& trace) {
  if (trace.samples.empty()) fail(ErrorCode::EmptyTrace, "reshape_csi: trace has no samples");
  const ChannelSet& first = trace.samples.front();
  RMatrix x(static_cast<Eigen::Index>(trace.samples.size()), feature_count(first.K, first.mt(), first.nr()));
  for (std::size_t t = 0; t < trace.samples.size(); ++t)
    x.row(static_cast<Eigen::Index>(t)) = reshape_channel_set(trace.samples[t]).transpose();
  return x;
}

MinMaxScaler MinMaxScaler::fit(const Eigen::Ref<const RMatrix>& rows) {
  if (rows.rows() == 0) fail(ErrorCode::EmptyTrace, "scaler fit on zero rows");
  MinMaxScaler s;
  s.min = rows.colwise().minCoeff().transpose();
  s.max = rows.colwise().maxCoeff().transpose();
  return s;
}

RMatrix MinMaxScaler::transform(const Eigen::Ref<const RMatrix>& rows) const {
  if (rows.cols() != min.size()) fail(ErrorCode::DimensionMismatch, "scaler: feature count mismatch");
  RMatrix out(rows.rows(), rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double range = max(c) - min(c);
    if (range > 0.0) out.col(c) = (rows.col(c).array() - min(c)) / range;
    else out.col(c).setConstant(0.5);
  }
  return out;
}

RMatrix MinMaxScaler::inverse(const Eigen::Ref<const RMatrix>& rows) const {
  if (rows.cols() != min.size()) fail(ErrorCode::DimensionMismatch, "scaler: feature count mismatch");
  RMatrix out(rows.rows(), rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double range = max(c) - min(c);
    if (range > 0.0) out.col(c) = rows.col(c).array() * range + min(c);
    else out.col(c).setConstant(min(c));
  }
  return out;
}

ScaledDataset prepare_dataset(const ChannelTrace& trace) {
  if (trace.samples.empty()) fail(ErrorCode::EmptyTrace, "prepare_dataset: trace has no samples");
  const int T = static_cast<int>(trace.samples.size());
  if (T < 10) fail(ErrorCode::InsufficientData, "prepare_dataset: need at least 10 samples");
  ScaledDataset ds;
  ds.K = trace.samples.front().K;
  ds.nr = trace.samples.front().nr();
  ds.mt = trace.samples.front().mt();
  ds.raw = reshape_csi(trace);
  const int n_train = (6 * T) / 10;
  const int n_val = (2 * T) / 10;
  ds.train = {0, n_train};
  ds.val = {n_train, n_train + n_val};
  ds.test = {n_train + n_val, T};
  ds.scaler = MinMaxScaler::fit(ds.raw.topRows(n_train));
  ds.scaled = ds.scaler.transform(ds.raw);
  return ds;
}

}  // namespace ialab::netmodel
