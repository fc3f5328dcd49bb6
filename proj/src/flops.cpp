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

namespace ialab::bench {

std::int64_t flops_tf(const forecaster::EncoderConfig& c) {
  const std::int64_t L = c.L;
  // An empty window feeds nothing to the head either.
  if (L <= 0) return 0;
  const std::int64_t f_in = c.f_in;
  const std::int64_t D = c.d_model;
  const std::int64_t N = c.layers;
  const std::int64_t f = c.ff;
  const std::int64_t embed = 2 * L * f_in * D;
  const std::int64_t encoder = 8 * L * D * D + 4 * L * L * D + 2 * L * (f * D * c.k1 + D * f * c.k2);
  const std::int64_t head = 2 * D * f_in;
  return embed + N * encoder + head;
}

std::int64_t flops_rl(std::int64_t state_dim, std::int64_t action_dim, std::int64_t h1, std::int64_t h2) {
  return 2 * (h1 * (2 * state_dim + action_dim) + 2 * h1 * h2 + h2 * (action_dim + 1));
}

}  // namespace ialab::bench
