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


#include <algorithm>
#include <string>

#include "ialab/error.hpp"
#include "ialab/forecaster.hpp"

namespace ialab::forecaster {
namespace {

constexpr double kIterativeTol = 1e-6;

bool closed_form_applies(const ChannelSet& set, const netmodel::Topology& topology) {
  if (set.K != 3 || set.nr() != 2 || set.mt() != 2) return false;
  return std::all_of(topology.d.begin(), topology.d.end(), [](int d) { return d == 1; });
}

}  // namespace

ia::RateResult ia_rate_on(const ChannelSet& basis, const ChannelSet& truth, const netmodel::Topology& topology,
                          ReceiverKind receiver, int iterative_sweeps, std::uint64_t seed) {
  ia::PrecoderSet precoders;
  ia::ReceiveFilterSet filters;
  if (closed_form_applies(basis, topology)) {
    auto [v, u] = ia::closed_form_ia_3user(basis);
    precoders = std::move(v);
    filters = std::move(u);
  } else {
    ia::IterativeResult it = ia::iterative_whitened_ia(basis, topology, iterative_sweeps, kIterativeTol, seed);
    precoders = std::move(it.precoders);
    filters = std::move(it.filters);
  }
  if (receiver == ReceiverKind::WhitenedMatched) filters = ia::matched_receive_filters(basis, precoders, topology);
  return ia::sinr_rates(truth, precoders, filters, topology);
}

TfIaReport evaluate_tf_ia(const TransformerModel& model, const MinMaxScaler& scaler, const ChannelTrace& trace,
                          const netmodel::Topology& topology, const TfIaOptions& options) {
  const netmodel::ScaledDataset ds = netmodel::prepare_dataset(trace);
  const int L = model.config().L;
  std::vector<int> starts;
  for (int s = ds.test.begin; s + L < ds.test.end; ++s) starts.push_back(s);
  if (starts.empty()) fail(ErrorCode::InsufficientData, "tf-ia: test split too short for one window");
  if (options.max_instants > 0 && static_cast<int>(starts.size()) > options.max_instants) {
    // Evenly spaced subset over the whole test split.
    std::vector<int> picked;
    const double step = static_cast<double>(starts.size()) / options.max_instants;
    for (int n = 0; n < options.max_instants; ++n) picked.push_back(starts[static_cast<std::size_t>(n * step)]);
    starts = std::move(picked);
  }
  const RMatrix pred = scaler.inverse(predict_scaled(model, scaler.transform(ds.raw), starts));

  std::vector<ChannelSet> truth;
  std::vector<ChannelSet> guess;
  for (std::size_t n = 0; n < starts.size(); ++n) {
    truth.push_back(trace.samples[static_cast<std::size_t>(starts[n] + L)]);
    guess.push_back(netmodel::unreshape_channel_set(pred.row(static_cast<Eigen::Index>(n)).transpose(), ds.K, ds.nr,
                                                    ds.mt));
  }

  TfIaReport report;
  report.instants = static_cast<int>(starts.size());
  report.nmse_db = nmse_db(truth, guess);
  for (double snr : options.snr_db) {
    const netmodel::Topology topo = netmodel::apply_scenario(options.scenario, snr, topology, options.seed);
    TfIaPoint point;
    point.snr_db = snr;
    for (std::size_t n = 0; n < truth.size(); ++n) {
      point.sum_rate_predicted +=
          ia_rate_on(guess[n], truth[n], topo, options.receiver, options.iterative_sweeps, options.seed).sum_rate;
      point.sum_rate_perfect +=
          ia_rate_on(truth[n], truth[n], topo, options.receiver, options.iterative_sweeps, options.seed).sum_rate;
    }
    point.sum_rate_predicted /= static_cast<double>(truth.size());
    point.sum_rate_perfect /= static_cast<double>(truth.size());
    point.ratio = point.sum_rate_perfect > 0.0 ? point.sum_rate_predicted / point.sum_rate_perfect : 0.0;
    report.points.push_back(point);
  }
  return report;
}

TfIaReport tf_ia_pipeline(const ChannelTrace& trace, const EncoderConfig& config, const netmodel::Topology& topology,
                          const TfIaOptions& options) {
  const netmodel::ScaledDataset ds = netmodel::prepare_dataset(trace);
  EncoderConfig c = config;
  c.f_in = static_cast<int>(ds.scaled.cols());
  const TrainResult trained = train_predictor(ds, c);
  return evaluate_tf_ia(trained.model, ds.scaler, trace, topology, options);
}

}  // namespace ialab::forecaster
