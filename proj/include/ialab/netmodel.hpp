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

// Network topology, temporally correlated Rayleigh channels, scenario power
// assignment and the scaled feature dataset consumed by the forecaster.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ialab/linops.hpp"

namespace ialab::netmodel {

/// K user pairs; transmitter i talks to receiver i. alpha(i, j) is the
/// large-scale gain from transmitter j to receiver i.
struct Topology {
  int K = 3;
  int mt = 2;
  int nr = 2;
  std::vector<int> d;       // streams per user
  double snr_db = 20.0;     // desired-link SNR
  double noise_var = 1.0;   // sigma_w^2
  RMatrix alpha;            // K x K, diagonal 1
  double power = 100.0;     // per-transmitter linear power P

  /// Uniform topology: d_j = streams, alpha all ones, power from snr_db.
  static Topology uniform(int K, int mt, int nr, int streams, double snr_db, double noise_var = 1.0);

  /// P = noise_var * 10^(snr_db / 10).
  void set_snr_db(double snr);

  int max_streams() const;
  int total_streams() const;

  /// Throws BadConfig / NonPositiveAlpha when an invariant is broken.
  void validate() const;
};

/// One coherence interval: K*K channel matrices, H(j, i) from transmitter i
/// to receiver j, each nr x mt.
struct ChannelSet {
  int K = 0;
  std::vector<CMatrix> H;

  ChannelSet() = default;
  ChannelSet(int k, int nr, int mt);

  CMatrix& operator()(int j, int i) { return H[static_cast<std::size_t>(j * K + i)]; }
  const CMatrix& operator()(int j, int i) const { return H[static_cast<std::size_t>(j * K + i)]; }
  int nr() const { return H.empty() ? 0 : static_cast<int>(H.front().rows()); }
  int mt() const { return H.empty() ? 0 : static_cast<int>(H.front().cols()); }
};

struct TraceMeta {
  std::uint64_t seed = 0;
  int K = 0;
  int mt = 0;
  int nr = 0;
  int T = 0;
  double doppler = 0.05;
  int fir_order = 32;
};

struct ChannelTrace {
  TraceMeta meta;
  std::vector<ChannelSet> samples;
};

/// Energy-normalised taps: Bessel-J0 (Clarke autocorrelation) shape under a
/// Hamming window, centred on the filter midpoint.
std::vector<double> doppler_fir_taps(double doppler, int fir_order);

/// Independent CN(0, 1) entries filtered in time by doppler_fir_taps. Only
/// fully primed filter outputs are kept, so the first fir_order - 1 raw
/// draws of every entry never appear on their own.
ChannelTrace sample_correlated_trace(const Topology& topology, int T, double doppler, int fir_order,
                                     std::uint64_t seed);

/// One i.i.d. Rayleigh draw (a trace of length 1 with the identity filter).
ChannelSet sample_channel_set(const Topology& topology, std::uint64_t seed);

/// delta(i, j) = alpha(i, j) / sum_i alpha(i, j); columns sum to one.
RMatrix delta_weights(const RMatrix& alpha);

enum class Scenario { WeakInterference, EqualPower };

Scenario parse_scenario(std::string_view name);
std::string_view scenario_name(Scenario s);

struct PowerAssignment {
  RMatrix alpha;
  double power = 0.0;
  bool snr_outside_sweep = false;  // snr_db outside [0, 25]
};

/// Weak interference: every cross link receives U(snr - 15, snr - 10) dB.
/// Equal power: every link carries snr_db. Seeded and deterministic.
PowerAssignment scenario_powers(Scenario scenario, double snr_db, const Topology& topology,
                                std::uint64_t seed);

/// Same, writing alpha/power/snr into the topology.
Topology apply_scenario(Scenario scenario, double snr_db, Topology topology, std::uint64_t seed);

/// Feature count of reshape_csi: 2 * mt * nr * K^2.
int feature_count(int K, int mt, int nr);

/// T x f_in real features. Links in (j, i) lexicographic order; per link the
/// Re parts of the column-major entries, then the Im parts.
RMatrix reshape_csi(const ChannelTrace& trace);
RVector reshape_channel_set(const ChannelSet& set);
ChannelSet unreshape_channel_set(const Eigen::Ref<const RVector>& features, int K, int nr, int mt);

/// Per-feature min-max scaler. A degenerate feature (max == min) maps to 0.5.
struct MinMaxScaler {
  RVector min;
  RVector max;

  static MinMaxScaler fit(const Eigen::Ref<const RMatrix>& rows);
  RMatrix transform(const Eigen::Ref<const RMatrix>& rows) const;
  RMatrix inverse(const Eigen::Ref<const RMatrix>& rows) const;
};

struct Split {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
};

struct ScaledDataset {
  RMatrix raw;     // T x f_in
  RMatrix scaled;  // T x f_in
  MinMaxScaler scaler;
  Split train;
  Split val;
  Split test;
  int K = 0;
  int mt = 0;
  int nr = 0;
};

/// 60/20/20 contiguous split (floors, remainder to test); scaler fitted on
/// the training rows only.
ScaledDataset prepare_dataset(const ChannelTrace& trace);

// Trace file: first line "#ialab-trace <json metadata>", then the CSV header
// t,j,i,row,col,re,im and one row per complex entry, %.17g decimals.
void save_trace(const ChannelTrace& trace, const std::string& path);
ChannelTrace load_trace(const std::string& path);

// Scaler CSV: feature_index,min,max
void save_scaler(const MinMaxScaler& scaler, const std::string& path);
MinMaxScaler load_scaler(const std::string& path);

}  // namespace ialab::netmodel
