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


#include "ialab/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "ialab/error.hpp"

namespace ialab::forecaster {
namespace {

using ad::Tensor;

constexpr double kNmseFloorDb = -300.0;
constexpr int kPredictChunk = 256;

Tensor filled(ad::Shape shape, double v, std::string name) {
  const std::size_t n = ad::numel(shape);
  return ad::parameter(std::move(shape), std::vector<double>(n, v), std::move(name));
}

// [count, L, f] input block for windows starting at starts[first .. first+count).
Tensor window_block(const RMatrix& rows, const std::vector<int>& starts, std::size_t first, std::size_t count, int L) {
  const int f = static_cast<int>(rows.cols());
  std::vector<double> x(count * static_cast<std::size_t>(L * f));
  double* out = x.data();
  for (std::size_t n = 0; n < count; ++n)
    for (int t = 0; t < L; ++t)
      for (int c = 0; c < f; ++c) *out++ = rows(starts[first + n] + t, c);
  return ad::constant({static_cast<int>(count), L, f}, std::move(x));
}

Tensor target_block(const RMatrix& rows, const std::vector<int>& starts, std::size_t first, std::size_t count, int L) {
  const int f = static_cast<int>(rows.cols());
  std::vector<double> y(count * static_cast<std::size_t>(f));
  double* out = y.data();
  for (std::size_t n = 0; n < count; ++n)
    for (int c = 0; c < f; ++c) *out++ = rows(starts[first + n] + L, c);
  return ad::constant({static_cast<int>(count), f}, std::move(y));
}

std::vector<int> window_starts(const netmodel::Split& split, int L) {
  std::vector<int> starts;
  for (int s = split.begin; s + L < split.end; ++s) starts.push_back(s);
  return starts;
}

double validation_loss(const TransformerModel& model, const RMatrix& scaled, const std::vector<int>& starts) {
  const RMatrix pred = predict_scaled(model, scaled, starts);
  const int L = model.config().L;
  double total = 0.0;
  for (std::size_t n = 0; n < starts.size(); ++n)
    total += (pred.row(static_cast<Eigen::Index>(n)) - scaled.row(starts[n] + L)).squaredNorm();
  return total / static_cast<double>(starts.size() * static_cast<std::size_t>(scaled.cols()));
}

double link_error_ratio(const ChannelSet& truth, const ChannelSet& pred) {
  if (truth.K != pred.K || truth.H.size() != pred.H.size())
    fail(ErrorCode::DimensionMismatch, "nmse: channel sets differ in size");
  double total = 0.0;
  for (std::size_t k = 0; k < truth.H.size(); ++k) {
    const double ref = truth.H[k].squaredNorm();
    if (!(ref > 0.0)) fail(ErrorCode::ZeroReference, "nmse: reference channel has zero norm");
    if (truth.H[k].rows() != pred.H[k].rows() || truth.H[k].cols() != pred.H[k].cols())
      fail(ErrorCode::DimensionMismatch, "nmse: channel shapes differ");
    total += (truth.H[k] - pred.H[k]).squaredNorm() / ref;
  }
  return total;
}

double to_db(double ratio) {
  if (!(ratio > 0.0)) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(ratio));
}

}  // namespace

void EncoderConfig::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::BadConfig, "encoder config: " + what); };
  if (L < 1) bad("L must be at least 1");
  if (H != 1) bad("only one-step horizons are supported");
  if (f_in < 1 || d_model < 1 || ff < 1 || layers < 0) bad("dimensions must be positive");
  if (heads < 1 || d_model % heads != 0) bad("d_model must be divisible by heads");
  if (k1 < 1 || k2 < 1) bad("conv kernel widths must be positive");
  if (epochs < 0 || batch < 1 || !(lr > 0.0) || patience < 0) bad("bad training parameters");
}

Tensor attention_weights(const Tensor& q, const Tensor& k) {
  if (q.rank() != 3 || k.rank() != 3 || q.dim(2) != k.dim(2) || q.dim(0) != k.dim(0))
    fail(ErrorCode::ShapeMismatch, "attention: q " + ad::shape_str(q.shape()) + ", k " + ad::shape_str(k.shape()));
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.dim(2)));
  return ad::softmax_rows(ad::scale(ad::matmul(q, ad::transpose(k)), inv));
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (v.rank() != 3 || v.dim(1) != k.dim(1) || v.dim(0) != k.dim(0))
    fail(ErrorCode::ShapeMismatch, "attention: k " + ad::shape_str(k.shape()) + ", v " + ad::shape_str(v.shape()));
  return ad::matmul(attention_weights(q, k), v);
}

std::vector<double> positional_table(int L, int d_model) {
  std::vector<double> pe(static_cast<std::size_t>(L * d_model));
  for (int pos = 0; pos < L; ++pos)
    for (int c = 0; c < d_model; ++c) {
      const int pair = c / 2;
      const double angle = pos / std::pow(10000.0, 2.0 * pair / d_model);
      pe[static_cast<std::size_t>(pos * d_model + c)] = (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

TransformerModel::TransformerModel(const EncoderConfig& config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const int D = config_.d_model;
  const int F = config_.f_in;
  embed_w_ = ad::init_uniform({F, D}, F, rng, "embed.w");
  embed_b_ = ad::init_uniform({D}, F, rng, "embed.b");
  pos_ = ad::constant({config_.L, D}, positional_table(config_.L, D));
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    Layer layer;
    layer.wq = ad::init_uniform({D, D}, D, rng, p + "wq");
    layer.wk = ad::init_uniform({D, D}, D, rng, p + "wk");
    layer.wv = ad::init_uniform({D, D}, D, rng, p + "wv");
    layer.wo = ad::init_uniform({D, D}, D, rng, p + "wo");
    layer.ln1_g = filled({D}, 1.0, p + "ln1.g");
    layer.ln1_b = filled({D}, 0.0, p + "ln1.b");
    layer.ff1_w = ad::init_uniform({config_.k1, D, config_.ff}, config_.k1 * D, rng, p + "ff1.w");
    layer.ff1_b = ad::init_uniform({config_.ff}, config_.k1 * D, rng, p + "ff1.b");
    layer.ff2_w = ad::init_uniform({config_.k2, config_.ff, D}, config_.k2 * config_.ff, rng, p + "ff2.w");
    layer.ff2_b = ad::init_uniform({D}, config_.k2 * config_.ff, rng, p + "ff2.b");
    layer.ln2_g = filled({D}, 1.0, p + "ln2.g");
    layer.ln2_b = filled({D}, 0.0, p + "ln2.b");
    layers_.push_back(std::move(layer));
  }
  head_w_ = ad::init_uniform({D, F}, D, rng, "head.w");
  head_b_ = ad::init_uniform({F}, D, rng, "head.b");
}

Tensor TransformerModel::forward(const Tensor& x) const {
  const EncoderConfig& c = config_;
  if (x.rank() != 3 || x.dim(1) != c.L || x.dim(2) != c.f_in)
    fail(ErrorCode::ShapeMismatch, "encoder input " + ad::shape_str(x.shape()) + ", expected [B," +
                                       std::to_string(c.L) + "," + std::to_string(c.f_in) + "]");
  const int B = x.dim(0);
  const int dk = c.d_k();
  Tensor h = ad::add(ad::add(ad::matmul(x, embed_w_), embed_b_), pos_);
  for (const Layer& layer : layers_) {
    const Tensor q = ad::matmul(h, layer.wq);
    const Tensor k = ad::matmul(h, layer.wk);
    const Tensor v = ad::matmul(h, layer.wv);
    Tensor heads;
    if (c.heads == 1) {
      heads = attention(q, k, v);
    } else {
      std::vector<Tensor> parts;
      for (int i = 0; i < c.heads; ++i)
        parts.push_back(attention(ad::slice(q, 2, i * dk, (i + 1) * dk), ad::slice(k, 2, i * dk, (i + 1) * dk),
                                  ad::slice(v, 2, i * dk, (i + 1) * dk)));
      heads = ad::concat(parts, 2);
    }
    h = ad::layer_norm(ad::add(h, ad::matmul(heads, layer.wo)), layer.ln1_g, layer.ln1_b);
    const Tensor f = ad::conv1d_same(ad::tanh(ad::conv1d_same(h, layer.ff1_w, layer.ff1_b)), layer.ff2_w, layer.ff2_b);
    h = ad::layer_norm(ad::add(h, f), layer.ln2_g, layer.ln2_b);
  }
  const Tensor last = ad::reshape(ad::slice(h, 1, c.L - 1, c.L), {B, c.d_model});
  // The head predicts the step from the newest input row rather than the row itself.
  const Tensor newest = ad::reshape(ad::slice(x, 1, c.L - 1, c.L), {B, c.f_in});
  return ad::add(newest, ad::add(ad::matmul(last, head_w_), head_b_));
}

std::vector<Tensor> TransformerModel::parameters() const {
  std::vector<Tensor> out{embed_w_, embed_b_};
  for (const Layer& l : layers_)
    for (const Tensor& t : {l.wq, l.wk, l.wv, l.wo, l.ln1_g, l.ln1_b, l.ff1_w, l.ff1_b, l.ff2_w, l.ff2_b, l.ln2_g, l.ln2_b})
      out.push_back(t);
  out.push_back(head_w_);
  out.push_back(head_b_);
  return out;
}

TransformerModel TransformerModel::clone() const {
  TransformerModel copy(config_);
  const std::vector<Tensor> src = parameters();
  std::vector<Tensor> dst = copy.parameters();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k].value() = src[k].value();
  return copy;
}

void TransformerModel::save(const std::string& path) const { ad::save_checkpoint(parameters(), path); }

void TransformerModel::load(const std::string& path) {
  std::vector<Tensor> params = parameters();
  ad::load_checkpoint(params, path);
}

RMatrix predict_scaled(const TransformerModel& model, const RMatrix& scaled_rows, const std::vector<int>& starts) {
  const EncoderConfig& c = model.config();
  if (scaled_rows.cols() != c.f_in)
    fail(ErrorCode::ShapeMismatch, "predict: rows have " + std::to_string(scaled_rows.cols()) + " features, model expects " +
                                       std::to_string(c.f_in));
  for (int s : starts)
    if (s < 0 || s + c.L > scaled_rows.rows()) fail(ErrorCode::WindowLengthMismatch, "predict: window out of range");
  RMatrix out(static_cast<Eigen::Index>(starts.size()), c.f_in);
  ad::NoGradGuard no_grad;
  for (std::size_t first = 0; first < starts.size(); first += kPredictChunk) {
    const std::size_t count = std::min<std::size_t>(kPredictChunk, starts.size() - first);
    const Tensor y = model.forward(window_block(scaled_rows, starts, first, count, c.L));
    for (std::size_t n = 0; n < count; ++n)
      for (int f = 0; f < c.f_in; ++f)
        out(static_cast<Eigen::Index>(first + n), f) = y.value()[n * static_cast<std::size_t>(c.f_in) + static_cast<std::size_t>(f)];
  }
  return out;
}

TrainResult train_predictor(const ScaledDataset& dataset, const EncoderConfig& config) {
  config.validate();
  if (dataset.scaled.cols() != config.f_in)
    fail(ErrorCode::BadConfig, "encoder f_in " + std::to_string(config.f_in) + " but dataset has " +
                                   std::to_string(dataset.scaled.cols()) + " features");
  const std::vector<int> train = window_starts(dataset.train, config.L);
  if (train.empty())
    fail(ErrorCode::InsufficientData, "training split holds " + std::to_string(dataset.train.size()) +
                                          " samples, need at least L + H = " + std::to_string(config.L + config.H));
  const std::vector<int> val = window_starts(dataset.val, config.L);

  TrainResult result{TransformerModel(config), {}, {}, 0};
  const TransformerModel& model = result.model;
  std::vector<Tensor> params = model.parameters();
  ad::Adam adam(params, config.lr);
  const auto score = [&] { return val.empty() ? validation_loss(model, dataset.scaled, train) : validation_loss(model, dataset.scaled, val); };

  double best = score();
  std::vector<std::vector<double>> best_values;
  for (const Tensor& p : params) best_values.push_back(p.value());
  std::mt19937_64 rng(config.seed ^ 0x7a3f1c92d5e4b601ULL);
  std::vector<int> order = train;
  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(config.batch)) {
      const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(config.batch), order.size() - first);
      const Tensor x = window_block(dataset.scaled, order, first, count, config.L);
      const Tensor y = target_block(dataset.scaled, order, first, count, config.L);
      const Tensor loss = ad::mse(model.forward(x), y);
      adam.zero_grad();
      ad::backward(loss);
      adam.step();
      total += loss.item();
      ++batches;
    }
    result.train_loss.push_back(total / batches);
    const double v = score();
    result.val_loss.push_back(v);
    if (v < best) {
      best = v;
      result.best_epoch = epoch;
      for (std::size_t k = 0; k < params.size(); ++k) best_values[k] = params[k].value();
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k].value() = best_values[k];
  return result;
}

ChannelSet predict_next(const TransformerModel& model, const MinMaxScaler& scaler,
                        const std::vector<ChannelSet>& window) {
  const EncoderConfig& c = model.config();
  if (static_cast<int>(window.size()) != c.L)
    fail(ErrorCode::WindowLengthMismatch, "window holds " + std::to_string(window.size()) + " sets, model expects " +
                                              std::to_string(c.L));
  RMatrix raw(c.L, c.f_in);
  for (int t = 0; t < c.L; ++t) {
    const RVector row = netmodel::reshape_channel_set(window[static_cast<std::size_t>(t)]);
    if (row.size() != c.f_in) fail(ErrorCode::ShapeMismatch, "window channel sets do not match the model features");
    raw.row(t) = row.transpose();
  }
  const RMatrix pred = predict_scaled(model, scaler.transform(raw), {0});
  const RMatrix unscaled = scaler.inverse(pred);
  const ChannelSet& ref = window.front();
  return netmodel::unreshape_channel_set(unscaled.row(0).transpose(), ref.K, ref.nr(), ref.mt());
}

double nmse_db(const std::vector<ChannelSet>& truth, const std::vector<ChannelSet>& predicted) {
  if (truth.empty() || truth.size() != predicted.size())
    fail(ErrorCode::DimensionMismatch, "nmse: need equal non-empty sequences");
  double total = 0.0;
  std::size_t terms = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    total += link_error_ratio(truth[t], predicted[t]);
    terms += truth[t].H.size();
  }
  return to_db(total / static_cast<double>(terms));
}

ForecastReport evaluate_forecaster(const TransformerModel& model, const ScaledDataset& dataset) {
  const int L = model.config().L;
  const std::vector<int> starts = window_starts(dataset.test, L);
  if (starts.empty()) fail(ErrorCode::InsufficientData, "test split too short for one window");
  const RMatrix pred = dataset.scaler.inverse(predict_scaled(model, dataset.scaled, starts));
  ForecastReport report;
  report.windows = static_cast<int>(starts.size());
  double model_total = 0.0;
  double persist_total = 0.0;
  std::size_t terms = 0;
  for (std::size_t n = 0; n < starts.size(); ++n) {
    const int target = starts[n] + L;
    const ChannelSet truth =
        netmodel::unreshape_channel_set(dataset.raw.row(target).transpose(), dataset.K, dataset.nr, dataset.mt);
    const ChannelSet guess = netmodel::unreshape_channel_set(pred.row(static_cast<Eigen::Index>(n)).transpose(),
                                                             dataset.K, dataset.nr, dataset.mt);
    const ChannelSet last =
        netmodel::unreshape_channel_set(dataset.raw.row(target - 1).transpose(), dataset.K, dataset.nr, dataset.mt);
    const double e = link_error_ratio(truth, guess);
    model_total += e;
    persist_total += link_error_ratio(truth, last);
    terms += truth.H.size();
    report.per_step_nmse_db.push_back(to_db(e / static_cast<double>(truth.H.size())));
  }
  report.model_nmse_db = to_db(model_total / static_cast<double>(terms));
  report.persistence_nmse_db = to_db(persist_total / static_cast<double>(terms));
  return report;
}

}  // namespace ialab::forecaster
