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
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ialab/bench.hpp"
#include "ialab/error.hpp"

using namespace ialab;
using namespace ialab::bench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig quick_config(const std::string& out) {
  ExperimentConfig c;
  c.scenario = 1;
  c.K = 3;
  c.mt = 2;
  c.nr = 2;
  c.snr_db = {10, 20};
  c.schemes = {"perfect_ia", "distributed_ia", "blind", "maxsnr", "icisc_maxsnr"};
  c.seeds = {0, 1, 2};
  c.out_dir = out;
  c.ia_sweeps = 20;
  return c;
}

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("transformer FLOPs") {
    forecaster::EncoderConfig c;
    CHECK(flops_tf(c) == 1970880);
    // Hand evaluation of the per-layer term at L = 5, D = 120, f = 144, k = 1.
    const std::int64_t layer = 8 * 5 * 120 * 120 + 4 * 25 * 120 + 2 * 5 * (144 * 120 + 120 * 144);
    CHECK(flops_tf(c) == 2 * 5 * 72 * 120 + 2 * layer + 2 * 120 * 72);
    forecaster::EncoderConfig four = c;
    four.layers = 4;
    CHECK(flops_tf(four) - flops_tf(c) == 2 * layer);
    forecaster::EncoderConfig empty = c;
    empty.L = 0;
    CHECK(flops_tf(empty) == 0);
  }

  TEST_CASE("policy network FLOPs") {
    CHECK(flops_rl(6, 48, 400, 300) == 557400);
    CHECK(flops_rl(6, 48, 0, 0) == 0);
    CHECK(flops_rl(1, 0, 1, 1) == 10);
  }

  TEST_CASE("scheme names") {
    for (const char* n : {"tf_ia", "perfect_ia", "distributed_ia", "blind", "maxsnr", "icisc_blind", "icisc_maxsnr",
                          "rl_blind", "rl_maxsnr"})
      CHECK(scheme_name(parse_scheme(n)) == n);
    CHECK(uses_sinr_metric(SchemeKind::TfIa));
    CHECK_FALSE(uses_sinr_metric(SchemeKind::RlMaxSnr));
    CHECK_THROWS_WITH_AS(parse_scheme("lstm_ia"), doctest::Contains("BadConfig"), Error);
  }

  TEST_CASE("config validation and json round trip") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.seed_list().size() == 20);
    CHECK(c.x_values() == std::vector<double>{0, 5, 10, 15, 20, 25});
    c.scenario = 3;
    CHECK(c.x_values() == std::vector<double>{3, 6, 12});
    CHECK(c.topology_at(12).K == 12);
    CHECK(c.topology_at(12).snr_db == 20.0);

    ExperimentConfig bad;
    bad.schemes.clear();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("BadConfig"), Error);
    bad = ExperimentConfig{};
    bad.snr_db = {std::nan("")};
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("BadConfig"), Error);
    bad = ExperimentConfig{};
    bad.schemes = {"nope"};
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("BadConfig"), Error);

    ExperimentConfig r = quick_config("x");
    r.ddpg.episodes = 7;
    r.encoder.d_model = 16;
    r.receiver = forecaster::ReceiverKind::ZeroForcing;
    const nlohmann::json j = config_to_json(r);
    const ExperimentConfig back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.ddpg.episodes == 7);
    CHECK(back.receiver == forecaster::ReceiverKind::ZeroForcing);

    nlohmann::json extra = j;
    extra["snr"] = 3;
    CHECK_THROWS_WITH_AS(config_from_json(extra), doctest::Contains("BadConfig"), Error);
    nlohmann::json typed = j;
    typed["K"] = "three";
    CHECK_THROWS_WITH_AS(config_from_json(typed), doctest::Contains("BadConfig"), Error);
    CHECK_THROWS_WITH_AS(load_config((fs::temp_directory_path() / "ialab_missing_cfg.json").string()),
                         doctest::Contains("IoFailure"), Error);
  }

  TEST_CASE("summaries") {
    std::vector<ResultRow> rows;
    for (const double v : {1.0, 2.0, 6.0}) {
      ResultRow r;
      r.scheme = "blind";
      r.x = 10;
      r.sum_rate = v;
      r.avg_user_throughput = v / 3.0;
      rows.push_back(r);
    }
    ResultRow broken = rows[0];
    broken.sum_rate = 1000.0;
    broken.status = "RankDeficient: test";
    rows.push_back(broken);
    ResultRow lone;
    lone.scheme = "maxsnr";
    lone.x = 10;
    lone.sum_rate = 4.0;
    rows.push_back(lone);

    const std::vector<SummaryRow> s = summarize(rows);
    REQUIRE(s.size() == 2);
    const SummaryRow& b = s[0].scheme == "blind" ? s[0] : s[1];
    const SummaryRow& m = s[0].scheme == "blind" ? s[1] : s[0];
    CHECK(b.n == 3);
    CHECK(b.mean_sum_rate == doctest::Approx(3.0));
    CHECK(b.std_sum_rate == doctest::Approx(std::sqrt(((4.0 + 1.0 + 9.0) / 2.0))));
    CHECK(m.n == 1);
    CHECK(m.std_sum_rate == 0.0);
  }

  TEST_CASE("scenario runs are deterministic and cover every cell") {
    const fs::path d1 = scratch("ialab_bench_a");
    const fs::path d2 = scratch("ialab_bench_b");
    ExperimentConfig c = quick_config(d1.string());
    const std::vector<ResultRow> r1 = run_scenario(c);
    REQUIRE(r1.size() == 5 * 2 * 3);
    CHECK(r1[0].scheme == "perfect_ia");
    CHECK(r1[0].x == 10.0);
    CHECK(r1[1].seed == 1);
    for (const ResultRow& r : r1) {
      CHECK(r.ok());
      CHECK(r.sum_rate > 0.0);
      CHECK(r.avg_user_throughput == doctest::Approx(r.sum_rate / 3.0));
    }
    aggregate_and_emit(c, r1, 0.0);

    c.out_dir = d2.string();
    c.threads = 3;
    const std::vector<ResultRow> r2 = run_scenario(c);
    aggregate_and_emit(c, r2, 0.0);
    for (const char* f : {"results.csv", "summary.csv", "fig2_data.csv", "fig8_data.csv"}) {
      CHECK(fs::exists(d1 / f));
      CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    const std::string fig8 = slurp(d1 / "fig8_data.csv");
    CHECK(fig8.rfind("snr,scheme,mean_tp,std_tp\n", 0) == 0);
    CHECK(fig8.find("perfect_ia") == std::string::npos);
    CHECK(slurp(d1 / "fig2_data.csv").rfind("snr,scheme,mean_sum_rate,std_sum_rate\n", 0) == 0);

    const nlohmann::json m = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    CHECK(m.at("rows") == 30);
    CHECK(m.at("failed").empty());
    CHECK(config_from_json(m.at("config")).seeds == c.seeds);
  }

  TEST_CASE("a failing scheme becomes a failed row and the run continues") {
    const fs::path d = scratch("ialab_bench_fail");
    ExperimentConfig c = quick_config(d.string());
    c.streams = 2;  // d = n_r leaves ICISC without an interference subspace
    c.schemes = {"blind", "icisc_blind"};
    c.snr_db = {20};
    c.seeds = {4};
    const std::vector<ResultRow> rows = run_scenario(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok());
    CHECK_FALSE(rows[1].ok());
    CHECK(rows[1].status.find("InfeasibleConfig") != std::string::npos);
    aggregate_and_emit(c, rows, 0.0);
    const nlohmann::json m = nlohmann::json::parse(slurp(d / "manifest.json"));
    REQUIRE(m.at("failed").size() == 1);
    CHECK(m.at("failed")[0].at("scheme") == "icisc_blind");
    CHECK(slurp(d / "summary.csv").find("icisc_blind") == std::string::npos);
  }

  TEST_CASE("scenario three sweeps the user count") {
    const fs::path d = scratch("ialab_bench_s3");
    ExperimentConfig c;
    c.scenario = 3;
    c.users = {2, 4};
    c.schemes = {"maxsnr"};
    c.seeds = {0};
    c.out_dir = d.string();
    const std::vector<ResultRow> rows = run_scenario(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].x == 4.0);
    aggregate_and_emit(c, rows, 0.0);
    CHECK(slurp(d / "fig10_data.csv").rfind("users,scheme,mean_tp,std_tp\n", 0) == 0);
    CHECK(slurp(d / "summary.csv").find(",0,") != std::string::npos);  // single seed: zero std
  }

  TEST_CASE("tf_ia rows carry the prediction error") {
    ExperimentConfig c = quick_config((fs::temp_directory_path() / "ialab_bench_tf").string());
    c.schemes = {"tf_ia", "perfect_ia"};
    c.snr_db = {20};
    c.seeds = {0};
    c.train_T = 200;
    c.fir_order = 8;
    c.encoder.d_model = 8;
    c.encoder.ff = 8;
    c.encoder.layers = 1;
    c.encoder.epochs = 1;
    c.encoder.batch = 16;
    const std::vector<ResultRow> rows = run_scenario(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok());
    CHECK(rows[0].has_nmse);
    CHECK(std::isfinite(rows[0].nmse_db));
    CHECK_FALSE(rows[1].has_nmse);

    ExperimentConfig s3 = c;
    s3.scenario = 3;
    s3.users = {3};
    CHECK_THROWS_WITH_AS(prepare_forecaster(s3), doctest::Contains("BadConfig"), Error);
  }
}
