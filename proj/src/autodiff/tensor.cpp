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
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "ialab/autodiff.hpp"
#include "ialab/error.hpp"

namespace ialab::ad {
namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> values, bool requires_grad, std::string name) {
  for (int d : shape)
    if (d < 1) fail(ErrorCode::ShapeMismatch, "tensor dimensions must be positive, got " + shape_str(shape));
  if (values.size() != numel(shape))
    fail(ErrorCode::ShapeMismatch, "tensor of shape " + shape_str(shape) + " given " + std::to_string(values.size()) +
                                       " values");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->name = std::move(name);
  return node;
}

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(shape[k]);
  }
  return s + "]";
}

int Tensor::dim(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) fail(ErrorCode::ShapeMismatch, "axis out of range for " + shape_str(shape()));
  return node_->shape[static_cast<std::size_t>(axis)];
}

std::vector<double>& Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}

double Tensor::item() const {
  if (size() != 1) fail(ErrorCode::NotScalarLoss, "item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor parameter(Shape shape, std::vector<double> values, std::string name) {
  return Tensor(make_leaf(std::move(shape), std::move(values), true, std::move(name)));
}

Tensor constant(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), false, {}));
}

Tensor zeros(Shape shape) {
  const std::size_t n = numel(shape);
  return constant(std::move(shape), std::vector<double>(n, 0.0));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    fail(ErrorCode::NotScalarLoss, "backward needs a scalar loss, got " + (loss.defined() ? shape_str(loss.shape()) : "undefined"));
  if (!loss.requires_grad()) return;

  // Post-order over nodes that carry gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(&loss.node(), 0);
  seen.insert(&loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  for (Node* node : order) {
    if (!node->parents.empty() || node->backward) {
      node->grad.assign(node->value.size(), 0.0);
    } else {
      node->ensure_grad();
    }
  }
  loss.node().grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward) (*it)->backward(**it);
}

Tensor init_uniform(Shape shape, int fan_in, std::mt19937_64& rng, std::string name) {
  if (fan_in < 1) fail(ErrorCode::ShapeMismatch, "fan_in must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(numel(shape));
  for (double& v : values) v = dist(rng);
  return parameter(std::move(shape), std::move(values), std::move(name));
}

}  // namespace ialab::ad
