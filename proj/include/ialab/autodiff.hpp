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

// Small define-by-run reverse-mode engine over row-major double tensors of
// rank 1..3. Enough for the forecaster and the actor/critic networks.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ialab::ad {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until needed
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // pushes this->grad into parents
  std::string name;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(int axis) const;
  int rank() const { return static_cast<int>(node_->shape.size()); }
  std::size_t size() const { return node_->value.size(); }

  std::vector<double>& value() { return node_->value; }
  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& grad();
  const std::vector<double>& grad() const { return node_->grad; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  const std::string& name() const { return node_->name; }
  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& ptr() const { return node_; }

  void zero_grad();

 private:
  std::shared_ptr<Node> node_;
};

/// Trainable leaf.
Tensor parameter(Shape shape, std::vector<double> values, std::string name = {});
/// Constant leaf (no gradient).
Tensor constant(Shape shape, std::vector<double> values);
Tensor zeros(Shape shape);

/// Disables tape recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---- primitives -----------------------------------------------------------

/// a[..., M, K] x b[K, N], or batched a[B, M, K] x b[B, K, N].
Tensor matmul(const Tensor& a, const Tensor& b);
/// Same shape, or b matching the trailing dimensions of a (broadcast).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
/// Softmax over the last axis.
Tensor softmax_rows(const Tensor& a);
/// Normalises the last axis, then gain * x_hat + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
/// x[B, L, Cin], w[k, Cin, Cout], b[Cout]; zero padding keeps length L.
Tensor conv1d_same(const Tensor& x, const Tensor& w, const Tensor& b);
/// Swaps the last two axes.
Tensor transpose(const Tensor& a);
/// [begin, end) along axis.
Tensor slice(const Tensor& a, int axis, int begin, int end);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor reshape(const Tensor& a, Shape shape);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// mean((a - b)^2) over every element.
Tensor mse(const Tensor& a, const Tensor& b);
/// sum(a * w) with a constant weight buffer of the same size.
Tensor weighted_sum(const Tensor& a, const std::vector<double>& w);

/// Gradients of loss (a scalar) with respect to everything it reaches.
/// Intermediate gradients are reset first; leaf gradients accumulate.
void backward(const Tensor& loss);

// ---- parameters and optimiser ----------------------------------------------

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor init_uniform(Shape shape, int fan_in, std::mt19937_64& rng, std::string name = {});

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr);

  /// Bias-corrected update from the current gradients.
  void step();
  void zero_grad();

  const std::vector<Tensor>& params() const { return params_; }
  const AdamState& state() const { return state_; }

 private:
  std::vector<Tensor> params_;
  AdamState state_;
};

/// Standalone update of one buffer set; throws ShapeMismatch on misaligned input.
void adam_step(std::vector<Tensor>& params, AdamState& state);

// ---- verification and persistence -----------------------------------------

struct GradCheckOptions {
  double h = 1e-5;
  /// Entries checked per parameter; 0 checks all of them.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
};

/// max |analytic - numeric| / max(1e-8, |numeric|) over the checked entries,
/// using central differences. forward must rebuild the graph on each call.
double grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& params,
                  const GradCheckOptions& options = {});

/// One line per tensor: name,d0xd1x..,v0,v1,... with %.17g values.
void save_checkpoint(const std::vector<Tensor>& params, const std::string& path);
/// Restores values by name; shapes must match exactly.
void load_checkpoint(std::vector<Tensor>& params, const std::string& path);

}  // namespace ialab::ad
