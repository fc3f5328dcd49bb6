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
#include <numeric>
#include <random>
#include <string>

#include "ialab/autodiff.hpp"
#include "ialab/error.hpp"

namespace ialab::ad {

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size())
    fail(ErrorCode::ShapeMismatch, "adam_step: optimiser state tracks " + std::to_string(state.m.size()) +
                                       " tensors, given " + std::to_string(params.size()));
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    std::vector<double>& m = state.m[k];
    std::vector<double>& v = state.v[k];
    if (m.size() != p.size()) fail(ErrorCode::ShapeMismatch, "adam_step: moment size differs for " + p.name());
    std::vector<double>& g = p.grad();
    std::vector<double>& x = p.value();
    for (std::size_t e = 0; e < x.size(); ++e) {
      m[e] = state.beta1 * m[e] + (1.0 - state.beta1) * g[e];
      v[e] = state.beta2 * v[e] + (1.0 - state.beta2) * g[e] * g[e];
      const double mhat = m[e] / c1;
      const double vhat = v[e] / c2;
      x[e] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

Adam::Adam(std::vector<Tensor> params, double lr) : params_(std::move(params)) {
  state_.lr = lr;
  for (const Tensor& p : params_)
    if (!p.requires_grad()) fail(ErrorCode::ShapeMismatch, "Adam given a tensor without gradient");
}

void Adam::step() { adam_step(params_, state_); }

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

double grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& params,
                  const GradCheckOptions& options) {
  for (Tensor p : params) p.zero_grad();
  backward(forward());
  std::mt19937_64 rng(options.seed);
  double worst = 0.0;
  for (Tensor p : params) {
    const std::vector<double> analytic = p.grad();
    std::vector<std::size_t> entries(p.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries != 0 && entries.size() > options.max_entries) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries);
      std::sort(entries.begin(), entries.end());
    }
    NoGradGuard no_grad;
    for (std::size_t e : entries) {
      double& x = p.value()[e];
      const double saved = x;
      x = saved + options.h;
      const double up = forward().item();
      x = saved - options.h;
      const double down = forward().item();
      x = saved;
      const double numeric = (up - down) / (2.0 * options.h);
      worst = std::max(worst, std::abs(analytic[e] - numeric) / std::max(1e-8, std::abs(numeric)));
    }
  }
  return worst;
}

}  // namespace ialab::ad
