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

// Encoder-only transformer for one-step CSI prediction, and the TF-IA
// evaluation that aligns on predicted channels and scores on true ones.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ialab/autodiff.hpp"
#include "ialab/ia_core.hpp"
#include "ialab/netmodel.hpp"

namespace ialab::forecaster {

using netmodel::ChannelSet;
using netmodel::ChannelTrace;
using netmodel::MinMaxScaler;
using netmodel::ScaledDataset;

struct EncoderConfig {
  int L = 5;          // window length
  int H = 1;          // horizon
  int f_in = 72;
  int d_model = 120;
  int heads = 2;
  int layers = 2;
  int ff = 144;
  int k1 = 1;
  int k2 = 1;
  int epochs = 100;
  int batch = 64;
  double lr = 1e-3;
  /// Stop after this many epochs without a validation improvement (0: never).
  int patience = 0;
  std::uint64_t seed = 0;

  int d_k() const { return d_model / heads; }
  /// Throws BadConfig.
  void validate() const;
};

/// softmax(Q K^T / sqrt(d_k)) V over [B, N, d_k] operands.
ad::Tensor attention(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& v);

/// Row-stochastic attention weights, exposed for inspection.
ad::Tensor attention_weights(const ad::Tensor& q, const ad::Tensor& k);

/// pe[pos, 2i] = sin(pos / 10000^(2i/D)), pe[pos, 2i+1] = cos(...)
std::vector<double> positional_table(int L, int d_model);

class TransformerModel {
 public:
  explicit TransformerModel(const EncoderConfig& config);

  /// x is [B, L, f_in]; returns [B, f_in] predictions for the next step,
  /// formed as the newest input row plus the projected last position.
  ad::Tensor forward(const ad::Tensor& x) const;

  const EncoderConfig& config() const { return config_; }
  /// Fixed order, unique names.
  std::vector<ad::Tensor> parameters() const;
  TransformerModel clone() const;

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  struct Layer {
    ad::Tensor wq, wk, wv, wo;
    ad::Tensor ln1_g, ln1_b;
    ad::Tensor ff1_w, ff1_b, ff2_w, ff2_b;
    ad::Tensor ln2_g, ln2_b;
  };

  EncoderConfig config_;
  ad::Tensor embed_w_, embed_b_;
  ad::Tensor pos_;
  std::vector<Layer> layers_;
  ad::Tensor head_w_, head_b_;
};

struct TrainResult {
  TransformerModel model;
  std::vector<double> train_loss;  // per epoch, mean over batches
  std::vector<double> val_loss;
  int best_epoch = 0;              // 0: initial parameters kept
};

/// Adam on the MSE of stride-1 windows inside the training split; keeps the
/// parameters with the lowest validation loss.
TrainResult train_predictor(const ScaledDataset& dataset, const EncoderConfig& config);

/// Scaled next-row predictions for windows rows[s .. s+L-1], s in starts.
RMatrix predict_scaled(const TransformerModel& model, const RMatrix& scaled_rows, const std::vector<int>& starts);

/// Scale, predict, unscale and rebuild the channel set.
ChannelSet predict_next(const TransformerModel& model, const MinMaxScaler& scaler,
                        const std::vector<ChannelSet>& window);

/// 10 log10 of the mean normalised squared error; floor -300 dB.
double nmse_db(const std::vector<ChannelSet>& truth, const std::vector<ChannelSet>& predicted);

struct ForecastReport {
  double model_nmse_db = 0.0;
  double persistence_nmse_db = 0.0;
  std::vector<double> per_step_nmse_db;  // one entry per test window
  int windows = 0;
};

/// Test-split NMSE on the original channel scale against last-value persistence.
ForecastReport evaluate_forecaster(const TransformerModel& model, const ScaledDataset& dataset);

// ---- TF-IA ------------------------------------------------------------------

enum class ReceiverKind {
  WhitenedMatched,  // whitened matched filter on the chosen precoders
  ZeroForcing,      // complement of the aligned interference (closed form only)
};

struct TfIaOptions {
  netmodel::Scenario scenario = netmodel::Scenario::WeakInterference;
  std::vector<double> snr_db{15.0, 20.0, 25.0};
  ReceiverKind receiver = ReceiverKind::WhitenedMatched;
  int max_instants = 0;  // 0: every test window
  int iterative_sweeps = 50;
  std::uint64_t seed = 0;  // scenario powers and iterative init
};

struct TfIaPoint {
  double snr_db = 0.0;
  double sum_rate_predicted = 0.0;  // mean over instants
  double sum_rate_perfect = 0.0;
  double ratio = 0.0;
};

struct TfIaReport {
  std::vector<TfIaPoint> points;
  double nmse_db = 0.0;
  int instants = 0;
};

/// Precoders and receivers computed from `basis`, scored with the SINR rate
/// on `truth`. K = 3 with 2x2 links and one stream uses the closed form,
/// anything else the iterative whitened scheme.
ia::RateResult ia_rate_on(const ChannelSet& basis, const ChannelSet& truth, const netmodel::Topology& topology,
                          ReceiverKind receiver, int iterative_sweeps, std::uint64_t seed);

/// Aligns on predictions for the test windows of `trace` and compares with
/// alignment on the true channels.
TfIaReport evaluate_tf_ia(const TransformerModel& model, const MinMaxScaler& scaler, const ChannelTrace& trace,
                          const netmodel::Topology& topology, const TfIaOptions& options);

/// Train on the trace, then evaluate_tf_ia on its own test split.
TfIaReport tf_ia_pipeline(const ChannelTrace& trace, const EncoderConfig& config, const netmodel::Topology& topology,
                          const TfIaOptions& options);

}  // namespace ialab::forecaster
