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


// ialab command line: trace generation, forecaster training, scenario runs
// and FLOP counts. Failures print one JSON error record on stderr.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ialab/bench.hpp"
#include "ialab/error.hpp"
#include "ialab/forecaster.hpp"
#include "ialab/netmodel.hpp"

namespace {

using namespace ialab;
using nlohmann::json;

struct GenTraceArgs {
  int K = 3;
  int mt = 2;
  int nr = 2;
  int T = 20000;
  double doppler = 0.05;
  int fir_order = 32;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string trace;
  std::string config;
  std::string out;
};

struct RunArgs {
  std::string config;
  std::string manifest;
  int scenario = 0;
  std::vector<std::string> schemes;
  std::vector<double> snr;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int threads = 0;
};

struct FlopsArgs {
  std::string model = "tf";
  forecaster::EncoderConfig enc{};
  std::int64_t state = 6;
  std::int64_t action = 48;
  std::int64_t h1 = 400;
  std::int64_t h2 = 300;
};

void write_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << std::endl;
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::FormatViolation, path + ": " + e.what());
  }
}

void gen_trace(const GenTraceArgs& a) {
  const netmodel::Topology topo = netmodel::Topology::uniform(a.K, a.mt, a.nr, 1, 20.0);
  netmodel::save_trace(netmodel::sample_correlated_trace(topo, a.T, a.doppler, a.fir_order, a.seed), a.out);
}

void train_forecaster(const TrainArgs& a) {
  const netmodel::ChannelTrace trace = netmodel::load_trace(a.trace);
  const netmodel::ScaledDataset ds = netmodel::prepare_dataset(trace);
  forecaster::EncoderConfig cfg;
  if (!a.config.empty()) {
    json j = read_json(a.config);
    if (j.contains("encoder")) j = j.at("encoder");
    json wrapped = {{"encoder", j}};
    cfg = bench::config_from_json(wrapped).encoder;
  }
  cfg.f_in = static_cast<int>(ds.scaled.cols());

  const auto t0 = std::chrono::steady_clock::now();
  const forecaster::TrainResult trained = forecaster::train_predictor(ds, cfg);
  const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const forecaster::ForecastReport report = forecaster::evaluate_forecaster(trained.model, ds);

  const std::filesystem::path dir(a.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());
  trained.model.save((dir / "model.ckpt").string());
  netmodel::save_scaler(ds.scaler, (dir / "scaler.csv").string());

  {
    std::ofstream out(dir / "prediction.csv", std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot write prediction.csv");
    out << "t,nmse_db\n";
    char buf[64];
    for (std::size_t n = 0; n < report.per_step_nmse_db.size(); ++n) {
      const int len = std::snprintf(buf, sizeof buf, "%d,%.17g\n", ds.test.begin + cfg.L + static_cast<int>(n),
                                    report.per_step_nmse_db[n]);
      out.write(buf, len);
    }
  }
  {
    std::ofstream out(dir / "loss.csv", std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot write loss.csv");
    out << "epoch,train_loss,val_loss\n";
    char buf[96];
    for (std::size_t e = 0; e < trained.train_loss.size(); ++e) {
      const int len =
          std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e + 1, trained.train_loss[e], trained.val_loss[e]);
      out.write(buf, len);
    }
  }
  std::ofstream summary(dir / "summary.txt", std::ios::binary | std::ios::trunc);
  summary << "model_nmse_db " << report.model_nmse_db << "\n"
          << "persistence_nmse_db " << report.persistence_nmse_db << "\n"
          << "test_windows " << report.windows << "\n"
          << "best_epoch " << trained.best_epoch << "\n"
          << "train_seconds " << train_s << "\n";
  if (!summary) fail(ErrorCode::IoFailure, "cannot write summary.txt");
  std::cout << "model_nmse_db " << report.model_nmse_db << " persistence_nmse_db " << report.persistence_nmse_db
            << "\n";
}

void run(const RunArgs& a) {
  bench::ExperimentConfig cfg;
  if (!a.manifest.empty()) {
    const json m = read_json(a.manifest);
    if (!m.contains("config")) fail(ErrorCode::FormatViolation, a.manifest + ": no config entry");
    cfg = bench::config_from_json(m.at("config"));
  } else if (!a.config.empty()) {
    cfg = bench::config_from_json(read_json(a.config));
  }
  if (a.scenario != 0) cfg.scenario = a.scenario;
  if (!a.schemes.empty()) cfg.schemes = a.schemes;
  if (!a.snr.empty()) {
    if (cfg.scenario == 3) {
      cfg.fixed_snr_db = a.snr.front();
    } else {
      cfg.snr_db = a.snr;
    }
  }
  if (!a.seeds.empty()) cfg.seeds = a.seeds;
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (a.threads > 0) cfg.threads = a.threads;
  cfg.validate();

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<bench::ResultRow> rows = bench::run_scenario(cfg);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bench::aggregate_and_emit(cfg, rows, elapsed);
  int failed = 0;
  for (const bench::ResultRow& r : rows) failed += r.ok() ? 0 : 1;
  std::cout << rows.size() << " rows, " << failed << " failed, written to " << cfg.out_dir << "\n";
}

void flops(const FlopsArgs& a) {
  if (a.model == "tf") {
    std::cout << bench::flops_tf(a.enc) << "\n";
  } else if (a.model == "rl") {
    std::cout << bench::flops_rl(a.state, a.action, a.h1, a.h2) << "\n";
  } else {
    fail(ErrorCode::BadConfig, "--model must be tf or rl");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interference alignment lab"};
  app.require_subcommand(1);

  GenTraceArgs g;
  CLI::App* gen = app.add_subcommand("gen-trace", "sample a temporally correlated channel trace");
  gen->add_option("--k", g.K, "user pairs");
  gen->add_option("--mt", g.mt, "transmit antennas");
  gen->add_option("--nr", g.nr, "receive antennas");
  gen->add_option("--T", g.T, "samples");
  gen->add_option("--doppler", g.doppler, "normalised Doppler");
  gen->add_option("--fir-order", g.fir_order, "FIR taps");
  gen->add_option("--seed", g.seed, "seed");
  gen->add_option("--out", g.out, "output trace file")->required();

  TrainArgs t;
  CLI::App* train = app.add_subcommand("train-forecaster", "train the transformer predictor on a trace");
  train->add_option("--trace", t.trace, "trace file")->required();
  train->add_option("--config", t.config, "JSON encoder config");
  train->add_option("--out", t.out, "output directory")->required();

  RunArgs r;
  CLI::App* runc = app.add_subcommand("run", "run a scenario sweep");
  runc->add_option("--config", r.config, "JSON experiment config");
  runc->add_option("--manifest", r.manifest, "repeat the run recorded in a manifest.json");
  runc->add_option("--scenario", r.scenario, "1, 2 or 3")->check(CLI::Range(1, 3));
  runc->add_option("--schemes", r.schemes, "schemes")->delimiter(',');
  runc->add_option("--snr", r.snr, "SNR values in dB")->delimiter(',');
  runc->add_option("--seeds", r.seeds, "seeds")->delimiter(',');
  runc->add_option("--out", r.out, "output directory");
  runc->add_option("--threads", r.threads, "worker threads");

  FlopsArgs f;
  CLI::App* fl = app.add_subcommand("flops", "FLOPs per forward pass");
  fl->add_option("--model", f.model, "tf or rl")->required();
  fl->add_option("--L", f.enc.L);
  fl->add_option("--f-in", f.enc.f_in);
  fl->add_option("--d-model", f.enc.d_model);
  fl->add_option("--layers", f.enc.layers);
  fl->add_option("--ff", f.enc.ff);
  fl->add_option("--k1", f.enc.k1);
  fl->add_option("--k2", f.enc.k2);
  fl->add_option("--state", f.state);
  fl->add_option("--action", f.action);
  fl->add_option("--h1", f.h1);
  fl->add_option("--h2", f.h2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    write_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*gen) gen_trace(g);
    if (*train) train_forecaster(t);
    if (*runc) run(r);
    if (*fl) flops(f);
  } catch (const Error& e) {
    write_error(std::string(to_string(e.code())), e.what());
    return 1;
  } catch (const std::exception& e) {
    write_error("InternalError", e.what());
    return 1;
  }
  return 0;
}
