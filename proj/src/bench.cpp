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


#include "ialab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "ialab/error.hpp"
#include "ialab/ia_core.hpp"
#include "ialab/subspace.hpp"

namespace ialab::bench {
namespace {

using nlohmann::json;
using netmodel::ChannelSet;

// Stream tags so scenario powers, channel traces and scheme seeds never share
// a generator state.
constexpr std::uint64_t kPowerTag = 0x706f776572000001ULL;
constexpr std::uint64_t kTraceTag = 0x7472616365000002ULL;
constexpr std::uint64_t kTrainTag = 0x747261696e000003ULL;

constexpr int kDefaultSeedCount = 20;

struct SchemeEntry {
  SchemeKind kind;
  std::string_view name;
};

constexpr SchemeEntry kSchemes[] = {
    {SchemeKind::TfIa, "tf_ia"},
    {SchemeKind::PerfectIa, "perfect_ia"},
    {SchemeKind::DistributedIa, "distributed_ia"},
    {SchemeKind::Blind, "blind"},
    {SchemeKind::MaxSnr, "maxsnr"},
    {SchemeKind::IciscBlind, "icisc_blind"},
    {SchemeKind::IciscMaxSnr, "icisc_maxsnr"},
    {SchemeKind::RlBlind, "rl_blind"},
    {SchemeKind::RlMaxSnr, "rl_maxsnr"},
};

std::uint64_t stream(std::uint64_t seed, std::uint64_t tag, std::size_t x_index) {
  return subspace::user_seed(seed ^ tag, static_cast<int>(x_index));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_x(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(ErrorCode::IoFailure, "write to '" + path.string() + "' failed");
}

std::string_view receiver_name(forecaster::ReceiverKind r) {
  return r == forecaster::ReceiverKind::WhitenedMatched ? "whitened_matched" : "zero_forcing";
}

forecaster::ReceiverKind parse_receiver(const std::string& s) {
  if (s == "whitened_matched") return forecaster::ReceiverKind::WhitenedMatched;
  if (s == "zero_forcing") return forecaster::ReceiverKind::ZeroForcing;
  fail(ErrorCode::BadConfig, "unknown receiver '" + s + "'");
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::BadConfig, where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) fail(ErrorCode::BadConfig, "unknown key '" + item.key() + "' in " + where);
}

forecaster::EncoderConfig encoder_from_json(const json& j) {
  reject_unknown(j, {"L", "H", "f_in", "d_model", "heads", "layers", "ff", "k1", "k2", "epochs", "batch", "lr",
                     "patience", "seed"},
                 "encoder");
  forecaster::EncoderConfig c;
  take(j, "L", c.L);
  take(j, "H", c.H);
  take(j, "f_in", c.f_in);
  take(j, "d_model", c.d_model);
  take(j, "heads", c.heads);
  take(j, "layers", c.layers);
  take(j, "ff", c.ff);
  take(j, "k1", c.k1);
  take(j, "k2", c.k2);
  take(j, "epochs", c.epochs);
  take(j, "batch", c.batch);
  take(j, "lr", c.lr);
  take(j, "patience", c.patience);
  take(j, "seed", c.seed);
  return c;
}

json encoder_to_json(const forecaster::EncoderConfig& c) {
  return {{"L", c.L},           {"H", c.H},         {"f_in", c.f_in},     {"d_model", c.d_model},
          {"heads", c.heads},   {"layers", c.layers}, {"ff", c.ff},       {"k1", c.k1},
          {"k2", c.k2},         {"epochs", c.epochs}, {"batch", c.batch}, {"lr", c.lr},
          {"patience", c.patience}, {"seed", c.seed}};
}

rl::DdpgConfig ddpg_from_json(const json& j) {
  reject_unknown(j, {"gamma", "critic_lr", "actor_lr", "tau", "h1", "h2", "episodes", "steps_per_episode", "batch",
                     "noise", "noise_decay", "capacity"},
                 "ddpg");
  rl::DdpgConfig c;
  take(j, "gamma", c.gamma);
  take(j, "critic_lr", c.critic_lr);
  take(j, "actor_lr", c.actor_lr);
  take(j, "tau", c.tau);
  take(j, "h1", c.h1);
  take(j, "h2", c.h2);
  take(j, "episodes", c.episodes);
  take(j, "steps_per_episode", c.steps_per_episode);
  take(j, "batch", c.batch);
  take(j, "noise", c.noise);
  take(j, "noise_decay", c.noise_decay);
  take(j, "capacity", c.capacity);
  return c;
}

json ddpg_to_json(const rl::DdpgConfig& c) {
  return {{"gamma", c.gamma}, {"critic_lr", c.critic_lr}, {"actor_lr", c.actor_lr},
          {"tau", c.tau},     {"h1", c.h1},               {"h2", c.h2},
          {"episodes", c.episodes}, {"steps_per_episode", c.steps_per_episode}, {"batch", c.batch},
          {"noise", c.noise}, {"noise_decay", c.noise_decay}, {"capacity", c.capacity}};
}

struct Instant {
  ChannelSet truth;
  std::vector<ChannelSet> window;  // the L sets before truth
};

std::vector<Instant> draw_instants(const ExperimentConfig& cfg, const netmodel::Topology& topo, std::uint64_t seed,
                                   std::size_t x_index) {
  const int L = cfg.encoder.L;
  const int last = L + (cfg.instants - 1) * cfg.instant_spacing;
  const int T = std::max(last + 1, cfg.fir_order);
  const netmodel::ChannelTrace trace =
      netmodel::sample_correlated_trace(topo, T, cfg.doppler, cfg.fir_order, stream(seed, kTraceTag, x_index));
  std::vector<Instant> out;
  for (int n = 0; n < cfg.instants; ++n) {
    const int t = L + n * cfg.instant_spacing;
    Instant in;
    in.truth = trace.samples[static_cast<std::size_t>(t)];
    in.window.assign(trace.samples.begin() + (t - L), trace.samples.begin() + t);
    out.push_back(std::move(in));
  }
  return out;
}

ia::RateResult run_once(SchemeKind kind, const Instant& in, const netmodel::Topology& topo,
                        const ExperimentConfig& cfg, const ForecasterBundle* fc, std::uint64_t seed,
                        ChannelSet* predicted) {
  switch (kind) {
    case SchemeKind::TfIa: {
      if (!fc) fail(ErrorCode::BadConfig, "tf_ia needs a forecaster");
      *predicted = forecaster::predict_next(fc->model, fc->scaler, in.window);
      return forecaster::ia_rate_on(*predicted, in.truth, topo, cfg.receiver, cfg.ia_sweeps, seed);
    }
    case SchemeKind::PerfectIa:
      return forecaster::ia_rate_on(in.truth, in.truth, topo, cfg.receiver, cfg.ia_sweeps, seed);
    case SchemeKind::DistributedIa: {
      const ia::IterativeResult it = ia::distributed_ia(in.truth, topo, cfg.ia_sweeps, seed);
      return ia::sinr_rates(in.truth, it.precoders, it.filters, topo);
    }
    case SchemeKind::Blind:
    case SchemeKind::MaxSnr:
    case SchemeKind::IciscBlind:
    case SchemeKind::IciscMaxSnr: {
      const auto strategy = subspace::parse_baseline(scheme_name(kind));
      return ia::mmse_rates(in.truth, subspace::baseline_precoders(strategy, in.truth, topo, seed), topo);
    }
    case SchemeKind::RlBlind:
    case SchemeKind::RlMaxSnr:
      return rl::run_rl_scheme(rl::parse_scheme(scheme_name(kind)), in.truth, topo, cfg.ddpg, seed).rates;
  }
  fail(ErrorCode::BadConfig, "unhandled scheme");
}

ResultRow run_cell(const ExperimentConfig& cfg, SchemeKind kind, std::size_t x_index, std::uint64_t seed,
                   const ForecasterBundle* fc) {
  const std::vector<double> xs = cfg.x_values();
  ResultRow row;
  row.scenario = cfg.scenario;
  row.scheme = std::string(scheme_name(kind));
  row.x = xs[x_index];
  row.seed = seed;
  try {
    const netmodel::Topology topo = cfg.topology_at(row.x);
    const netmodel::Topology powered = netmodel::apply_scenario(
        cfg.power_model(), topo.snr_db, topo, stream(seed, kPowerTag, x_index));
    const std::vector<Instant> instants = draw_instants(cfg, powered, seed, x_index);
    std::vector<ChannelSet> truths;
    std::vector<ChannelSet> guesses;
    for (const Instant& in : instants) {
      ChannelSet predicted;
      const ia::RateResult r = run_once(kind, in, powered, cfg, fc, seed, &predicted);
      row.sum_rate += r.sum_rate;
      row.avg_user_throughput += r.avg_user_throughput;
      if (kind == SchemeKind::TfIa) {
        truths.push_back(in.truth);
        guesses.push_back(std::move(predicted));
      }
    }
    row.sum_rate /= static_cast<double>(instants.size());
    row.avg_user_throughput /= static_cast<double>(instants.size());
    if (kind == SchemeKind::TfIa) {
      row.nmse_db = forecaster::nmse_db(truths, guesses);
      row.has_nmse = true;
    }
    if (!std::isfinite(row.sum_rate) || !std::isfinite(row.avg_user_throughput))
      fail(ErrorCode::ConvergenceFailure, "non-finite rate");
  } catch (const std::exception& e) {
    row.sum_rate = 0.0;
    row.avg_user_throughput = 0.0;
    row.has_nmse = false;
    row.status = e.what();
  }
  return row;
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

SchemeKind parse_scheme(std::string_view name) {
  for (const SchemeEntry& e : kSchemes)
    if (e.name == name) return e.kind;
  fail(ErrorCode::BadConfig, "unknown scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(SchemeKind s) {
  for (const SchemeEntry& e : kSchemes)
    if (e.kind == s) return e.name;
  return "unknown";
}

bool uses_sinr_metric(SchemeKind s) {
  return s == SchemeKind::TfIa || s == SchemeKind::PerfectIa || s == SchemeKind::DistributedIa;
}

void ExperimentConfig::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::BadConfig, "experiment config: " + what); };
  if (scenario < 1 || scenario > 3) bad("scenario must be 1, 2 or 3");
  if (schemes.empty()) bad("at least one scheme is required");
  for (const std::string& s : schemes) parse_scheme(s);
  if (seeds.empty() && kDefaultSeedCount < 1) bad("at least one seed is required");
  if (scenario == 3) {
    if (users.empty()) bad("scenario 3 needs a user list");
    for (int k : users)
      if (k < 1) bad("user counts must be positive");
    if (!std::isfinite(fixed_snr_db)) bad("fixed_snr_db must be finite");
  } else {
    if (snr_db.empty()) bad("at least one SNR value is required");
    for (double s : snr_db)
      if (!std::isfinite(s)) bad("SNR values must be finite");
  }
  if (K < 1 || mt < 1 || nr < 1 || streams < 1) bad("topology dimensions must be positive");
  if (!(noise_var > 0.0)) bad("noise_var must be positive");
  if (threads < 1) bad("threads must be >= 1");
  if (instants < 1 || instant_spacing < 1) bad("instants and instant_spacing must be >= 1");
  if (!(doppler > 0.0 && doppler < 0.5) || fir_order < 1) bad("bad trace parameters");
  if (ia_sweeps < 1) bad("ia_sweeps must be >= 1");
  if (forecaster_checkpoint.empty() != forecaster_scaler.empty())
    bad("forecaster_checkpoint and forecaster_scaler go together");
  encoder.validate();
  ddpg.validate();
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(kDefaultSeedCount);
  for (int k = 0; k < kDefaultSeedCount; ++k) out[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(k);
  return out;
}

std::vector<double> ExperimentConfig::x_values() const {
  if (scenario == 3) return {users.begin(), users.end()};
  return snr_db;
}

netmodel::Scenario ExperimentConfig::power_model() const {
  return scenario == 1 ? netmodel::Scenario::WeakInterference : netmodel::Scenario::EqualPower;
}

netmodel::Topology ExperimentConfig::topology_at(double x) const {
  if (scenario == 3) return netmodel::Topology::uniform(static_cast<int>(x), mt, nr, streams, fixed_snr_db, noise_var);
  return netmodel::Topology::uniform(K, mt, nr, streams, x, noise_var);
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, {"scenario", "K", "mt", "nr", "streams", "noise_var", "snr_db", "users", "fixed_snr_db",
                     "schemes", "seeds", "out_dir", "threads", "instants", "instant_spacing", "doppler",
                     "fir_order", "forecaster_checkpoint", "forecaster_scaler", "train_T", "forecaster_seed",
                     "encoder", "receiver", "ia_sweeps", "ddpg"},
                 "experiment config");
  ExperimentConfig c;
  try {
    take(j, "scenario", c.scenario);
    take(j, "K", c.K);
    take(j, "mt", c.mt);
    take(j, "nr", c.nr);
    take(j, "streams", c.streams);
    take(j, "noise_var", c.noise_var);
    take(j, "snr_db", c.snr_db);
    take(j, "users", c.users);
    take(j, "fixed_snr_db", c.fixed_snr_db);
    take(j, "schemes", c.schemes);
    take(j, "seeds", c.seeds);
    take(j, "out_dir", c.out_dir);
    take(j, "threads", c.threads);
    take(j, "instants", c.instants);
    take(j, "instant_spacing", c.instant_spacing);
    take(j, "doppler", c.doppler);
    take(j, "fir_order", c.fir_order);
    take(j, "forecaster_checkpoint", c.forecaster_checkpoint);
    take(j, "forecaster_scaler", c.forecaster_scaler);
    take(j, "train_T", c.train_T);
    take(j, "forecaster_seed", c.forecaster_seed);
    take(j, "ia_sweeps", c.ia_sweeps);
    if (j.contains("encoder")) c.encoder = encoder_from_json(j.at("encoder"));
    if (j.contains("ddpg")) c.ddpg = ddpg_from_json(j.at("ddpg"));
    if (j.contains("receiver")) c.receiver = parse_receiver(j.at("receiver").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("experiment config: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"scenario", c.scenario},
          {"K", c.K},
          {"mt", c.mt},
          {"nr", c.nr},
          {"streams", c.streams},
          {"noise_var", c.noise_var},
          {"snr_db", c.snr_db},
          {"users", c.users},
          {"fixed_snr_db", c.fixed_snr_db},
          {"schemes", c.schemes},
          {"seeds", c.seed_list()},
          {"out_dir", c.out_dir},
          {"threads", c.threads},
          {"instants", c.instants},
          {"instant_spacing", c.instant_spacing},
          {"doppler", c.doppler},
          {"fir_order", c.fir_order},
          {"forecaster_checkpoint", c.forecaster_checkpoint},
          {"forecaster_scaler", c.forecaster_scaler},
          {"train_T", c.train_T},
          {"forecaster_seed", c.forecaster_seed},
          {"encoder", encoder_to_json(c.encoder)},
          {"receiver", receiver_name(c.receiver)},
          {"ia_sweeps", c.ia_sweeps},
          {"ddpg", ddpg_to_json(c.ddpg)}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::FormatViolation, path + ": " + e.what());
  }
  return config_from_json(j);
}

std::shared_ptr<const ForecasterBundle> prepare_forecaster(const ExperimentConfig& cfg) {
  forecaster::EncoderConfig enc = cfg.encoder;
  if (cfg.scenario == 3) fail(ErrorCode::BadConfig, "tf_ia runs on a fixed user count (scenarios 1 and 2)");
  enc.f_in = netmodel::feature_count(cfg.K, cfg.mt, cfg.nr);
  if (!cfg.forecaster_checkpoint.empty()) {
    auto bundle = std::make_shared<ForecasterBundle>(
        ForecasterBundle{forecaster::TransformerModel(enc), netmodel::load_scaler(cfg.forecaster_scaler)});
    bundle->model.load(cfg.forecaster_checkpoint);
    if (bundle->scaler.min.size() != enc.f_in)
      fail(ErrorCode::ShapeMismatch, "scaler has " + std::to_string(bundle->scaler.min.size()) + " features, topology needs " +
                                         std::to_string(enc.f_in));
    return bundle;
  }
  const netmodel::Topology topo = netmodel::Topology::uniform(cfg.K, cfg.mt, cfg.nr, cfg.streams, 20.0, cfg.noise_var);
  const netmodel::ChannelTrace trace = netmodel::sample_correlated_trace(
      topo, cfg.train_T, cfg.doppler, cfg.fir_order, cfg.forecaster_seed ^ kTrainTag);
  const netmodel::ScaledDataset ds = netmodel::prepare_dataset(trace);
  forecaster::TrainResult trained = forecaster::train_predictor(ds, enc);
  return std::make_shared<ForecasterBundle>(ForecasterBundle{std::move(trained.model), ds.scaler});
}

std::vector<ResultRow> run_scenario(const ExperimentConfig& config, std::shared_ptr<const ForecasterBundle> fc) {
  config.validate();
  std::vector<SchemeKind> kinds;
  for (const std::string& s : config.schemes) kinds.push_back(parse_scheme(s));
  const bool wants_tf = std::find(kinds.begin(), kinds.end(), SchemeKind::TfIa) != kinds.end();
  std::string fc_error;
  if (wants_tf && !fc) {
    try {
      fc = prepare_forecaster(config);
    } catch (const std::exception& e) {
      fc_error = e.what();
    }
  }

  const std::vector<double> xs = config.x_values();
  const std::vector<std::uint64_t> seeds = config.seed_list();
  struct Cell {
    SchemeKind kind;
    std::size_t x;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (SchemeKind k : kinds)
    for (std::size_t x = 0; x < xs.size(); ++x)
      for (std::uint64_t s : seeds) cells.push_back({k, x, s});

  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t n = next++; n < cells.size(); n = next++) {
      const Cell& c = cells[n];
      if (c.kind == SchemeKind::TfIa && !fc) {
        rows[n] = ResultRow{config.scenario, "tf_ia", xs[c.x], c.seed, 0.0, 0.0, 0.0, false, fc_error};
        continue;
      }
      rows[n] = run_cell(config, c.kind, c.x, c.seed, fc.get());
    }
  };
  const int threads = std::min<int>(config.threads, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  // Keep first-appearance order of (scheme, x) so output follows the run order.
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    const auto key = std::make_pair(r.scheme, r.x);
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    if (r.ok()) g.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    if (g.empty()) continue;
    SummaryRow s;
    s.scheme = key.first;
    s.x = key.second;
    s.n = static_cast<int>(g.size());
    std::vector<double> sr;
    std::vector<double> tp;
    double nmse = 0.0;
    int nmse_n = 0;
    for (const ResultRow* r : g) {
      sr.push_back(r->sum_rate);
      tp.push_back(r->avg_user_throughput);
      if (r->has_nmse) {
        nmse += r->nmse_db;
        ++nmse_n;
      }
    }
    for (double v : sr) s.mean_sum_rate += v;
    for (double v : tp) s.mean_tp += v;
    s.mean_sum_rate /= s.n;
    s.mean_tp /= s.n;
    s.std_sum_rate = sample_std(sr, s.mean_sum_rate);
    s.std_tp = sample_std(tp, s.mean_tp);
    if (nmse_n > 0) {
      s.has_nmse = true;
      s.mean_nmse_db = nmse / nmse_n;
    }
    out.push_back(s);
  }
  return out;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "scenario,scheme,x,seed,sum_rate,avg_user_throughput,nmse_db,status\n";
  for (const ResultRow& r : rows)
    out << r.scenario << ',' << r.scheme << ',' << fmt_x(r.x) << ',' << r.seed << ',' << fmt(r.sum_rate) << ','
        << fmt(r.avg_user_throughput) << ',' << (r.has_nmse ? fmt(r.nmse_db) : "") << ',' << csv_field(r.status)
        << '\n';
  finish(out, path);
}

void aggregate_and_emit(const ExperimentConfig& config, const std::vector<ResultRow>& rows, double elapsed_s) {
  if (rows.empty()) fail(ErrorCode::BadConfig, "no results to aggregate");
  const std::filesystem::path dir(config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());

  write_results_csv(rows, (dir / "results.csv").string());

  const std::vector<SummaryRow> summary = summarize(rows);
  {
    const auto path = dir / "summary.csv";
    std::ofstream out = open_csv(path);
    out << "scenario,scheme,x,n,mean_sum_rate,std_sum_rate,mean_tp,std_tp,mean_nmse_db\n";
    for (const SummaryRow& s : summary)
      out << config.scenario << ',' << s.scheme << ',' << fmt_x(s.x) << ',' << s.n << ',' << fmt(s.mean_sum_rate)
          << ',' << fmt(s.std_sum_rate) << ',' << fmt(s.mean_tp) << ',' << fmt(s.std_tp) << ','
          << (s.has_nmse ? fmt(s.mean_nmse_db) : "") << '\n';
    finish(out, path);
  }

  // Alignment-family figures plot sum rate, learning/baseline figures plot
  // average user throughput.
  struct Figure {
    int number;
    bool sinr_family;
  };
  std::vector<Figure> figures;
  if (config.scenario == 1) figures = {{2, true}, {8, false}};
  if (config.scenario == 2) figures = {{3, true}, {9, false}};
  if (config.scenario == 3) figures = {{10, false}};
  std::vector<std::string> fig_files;
  for (const Figure& f : figures) {
    std::vector<const SummaryRow*> picked;
    for (const SummaryRow& s : summary)
      if (config.scenario == 3 || uses_sinr_metric(parse_scheme(s.scheme)) == f.sinr_family) picked.push_back(&s);
    if (picked.empty()) continue;
    const std::string name = "fig" + std::to_string(f.number) + "_data.csv";
    const auto path = dir / name;
    std::ofstream out = open_csv(path);
    const char* xname = config.scenario == 3 ? "users" : "snr";
    if (f.sinr_family)
      out << xname << ",scheme,mean_sum_rate,std_sum_rate\n";
    else
      out << xname << ",scheme,mean_tp,std_tp\n";
    for (const SummaryRow* s : picked)
      out << fmt_x(s->x) << ',' << s->scheme << ',' << fmt(f.sinr_family ? s->mean_sum_rate : s->mean_tp) << ','
          << fmt(f.sinr_family ? s->std_sum_rate : s->std_tp) << '\n';
    finish(out, path);
    fig_files.push_back(name);
  }

  json failed = json::array();
  for (const ResultRow& r : rows)
    if (!r.ok()) failed.push_back({{"scheme", r.scheme}, {"x", r.x}, {"seed", r.seed}, {"status", r.status}});
  json files = {"results.csv", "summary.csv"};
  for (const std::string& f : fig_files) files.push_back(f);
  const json manifest = {
      {"config", config_to_json(config)},
      {"seeds", config.seed_list()},
      {"protocol", "every scheme at a given (x, seed) sees the same scenario powers and channel instants"},
      {"rows", rows.size()},
      {"failed", failed},
      {"files", files},
      {"elapsed_s", elapsed_s},
  };
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out << manifest.dump(2) << '\n';
  finish(out, path);
}

}  // namespace ialab::bench
