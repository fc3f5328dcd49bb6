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

// Experiment runner: scenario sweeps over schemes and seeds, aggregation
// into CSV tables, and the closed-form FLOP counts of both learners.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ialab/forecaster.hpp"
#include "ialab/netmodel.hpp"
#include "ialab/rlagent.hpp"

namespace ialab::bench {

/// 2 L f_in D + N (8 L D^2 + 4 L^2 D + 2 L (f D k1 + D f k2)) + 2 D f_in
std::int64_t flops_tf(const forecaster::EncoderConfig& config);

/// 2 (h1 (2 S + A) + 2 h1 h2 + h2 (A + 1))
std::int64_t flops_rl(std::int64_t state_dim, std::int64_t action_dim, std::int64_t h1, std::int64_t h2);

enum class SchemeKind {
  TfIa,
  PerfectIa,
  DistributedIa,
  Blind,
  MaxSnr,
  IciscBlind,
  IciscMaxSnr,
  RlBlind,
  RlMaxSnr,
};

SchemeKind parse_scheme(std::string_view name);
std::string_view scheme_name(SchemeKind s);

/// SINR-rate schemes (alignment family) versus MMSE-rate schemes.
bool uses_sinr_metric(SchemeKind s);

struct ExperimentConfig {
  int scenario = 1;  // 1 weak interference, 2 equal power, 3 user sweep
  int K = 6;
  int mt = 4;
  int nr = 4;
  int streams = 1;
  double noise_var = 1.0;
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25};
  std::vector<int> users{3, 6, 12};  // scenario 3 x axis
  double fixed_snr_db = 20.0;        // scenario 3 operating point
  std::vector<std::string> schemes{"blind", "maxsnr", "icisc_blind", "icisc_maxsnr", "rl_blind", "rl_maxsnr"};
  std::vector<std::uint64_t> seeds{};  // empty: 0 .. 19
  std::string out_dir = "out";
  int threads = 1;

  // Channel instants per (x, seed), taken from one correlated trace.
  int instants = 1;
  int instant_spacing = 10;
  double doppler = 0.05;
  int fir_order = 32;

  // Forecaster used by tf_ia: loaded when both paths are set, otherwise
  // trained on a trace of train_T samples drawn with forecaster_seed.
  std::string forecaster_checkpoint;
  std::string forecaster_scaler;
  int train_T = 20000;
  std::uint64_t forecaster_seed = 0;
  forecaster::EncoderConfig encoder{};
  forecaster::ReceiverKind receiver = forecaster::ReceiverKind::WhitenedMatched;

  int ia_sweeps = 50;
  rl::DdpgConfig ddpg{};

  /// Throws BadConfig.
  void validate() const;
  std::vector<std::uint64_t> seed_list() const;
  /// x-axis values: SNRs for scenarios 1 and 2, user counts for 3.
  std::vector<double> x_values() const;
  netmodel::Scenario power_model() const;
  netmodel::Topology topology_at(double x) const;
};

/// Keys missing from the JSON keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  int scenario = 0;
  std::string scheme;
  double x = 0.0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  double avg_user_throughput = 0.0;
  double nmse_db = 0.0;
  bool has_nmse = false;
  std::string status = "ok";  // "ok" or the error text of a failed run
  bool ok() const { return status == "ok"; }
};

struct ForecasterBundle {
  forecaster::TransformerModel model;
  netmodel::MinMaxScaler scaler;
};

/// Trains on a fresh trace when the config names no checkpoint.
std::shared_ptr<const ForecasterBundle> prepare_forecaster(const ExperimentConfig& config);

/// One row per (scheme, x, seed) in that nesting order. Failures become rows
/// with a non-"ok" status. A null forecaster is prepared on demand when
/// tf_ia is requested.
std::vector<ResultRow> run_scenario(const ExperimentConfig& config,
                                    std::shared_ptr<const ForecasterBundle> forecaster = nullptr);

struct SummaryRow {
  std::string scheme;
  double x = 0.0;
  int n = 0;
  double mean_sum_rate = 0.0;
  double std_sum_rate = 0.0;
  double mean_tp = 0.0;
  double std_tp = 0.0;
  double mean_nmse_db = 0.0;
  bool has_nmse = false;
};

/// Mean and sample standard deviation over the successful seeds of every
/// (scheme, x); std is 0 for a single seed.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

/// Writes results.csv, summary.csv, figN_data.csv and manifest.json into
/// out_dir. CSV bytes depend only on the rows.
void aggregate_and_emit(const ExperimentConfig& config, const std::vector<ResultRow>& rows, double elapsed_s);

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace ialab::bench
