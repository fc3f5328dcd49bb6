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

// Subspace geometry for the distance-minimisation view of alignment:
// projectors, chordal distance, desired/interference subspaces, the
// weighted distance objective and the non-learning baseline precoders.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "ialab/ia_core.hpp"
#include "ialab/linops.hpp"
#include "ialab/netmodel.hpp"

namespace ialab::subspace {

using ia::PrecoderSet;
using netmodel::ChannelSet;
using netmodel::Topology;

inline constexpr double kProjectorTol = 1e-9;

struct SubspaceAssignment {
  std::vector<CMatrix> S_D;  // n_r x d_j
  std::vector<CMatrix> S_I;  // n_r x (n_r - d_j)
  std::vector<CMatrix> W_D;  // S_D S_D^H
};

enum class AssignmentStrategy { Blind, MaxSnr };
enum class BaselineStrategy { Blind, MaxSnr, IciscBlind, IciscMaxSnr };

BaselineStrategy parse_baseline(std::string_view name);
std::string_view baseline_name(BaselineStrategy s);

/// What p2_value does when an effective channel loses column rank.
enum class RankPolicy {
  Throw,  // propagate RankDeficient
  Limit,  // vanished desired signal counts sqrt(d_j), vanished interferer 0
};

/// G (G^H G)^{-1} G^H, computed through an orthonormal basis of span(G).
CMatrix orthogonal_projector(const CMatrix& g);

/// True when w is Hermitian and idempotent to tol.
bool is_projector(const CMatrix& w, double tol = kProjectorTol);

/// ||W1 - W2||_F / sqrt(2)
double chordal_distance(const CMatrix& w1, const CMatrix& w2);

/// Deterministic per-stream seed for user j.
std::uint64_t user_seed(std::uint64_t seed, int j);

SubspaceAssignment build_assignment(AssignmentStrategy strategy, const ChannelSet& channels,
                                    const Topology& topology, std::uint64_t seed);

struct P2Value {
  RVector per_transmitter;  // s_j
  RVector desired;          // delta_jj d(G_jj, S^D_j)
  RVector interference;     // sum_{i != j} delta_ij d(G_ij, S^D_i)
  double total = 0.0;
};

/// s_j = delta_jj d(G_jj, S^D_j) - sum_{i != j} delta_ij d(G_ij, S^D_i)
P2Value p2_value(const ChannelSet& channels, const PrecoderSet& precoders, const SubspaceAssignment& assignment,
                 const RMatrix& delta, const Topology& topology, RankPolicy policy = RankPolicy::Throw);

/// Same objective with squared distances.
double p2_squared_value(const ChannelSet& channels, const PrecoderSet& precoders,
                        const SubspaceAssignment& assignment, const RMatrix& delta, const Topology& topology);

/// Trace form of the squared objective:
/// sum_j d_j (2 delta_jj - 1) - delta_jj Tr[W_Gjj W_Dj] + sum_{i != j} delta_ij Tr[W_Gij W_Di].
/// Equals p2_squared_value when every user carries the same stream count.
double p2_expanded_check(const ChannelSet& channels, const PrecoderSet& precoders,
                         const SubspaceAssignment& assignment, const RMatrix& delta);

/// Non-learning precoders. fallbacks, when given, counts users whose
/// QR failed and received canonical basis columns instead.
PrecoderSet baseline_precoders(BaselineStrategy strategy, const ChannelSet& channels, const Topology& topology,
                               std::uint64_t seed, int* fallbacks = nullptr);

/// First d columns of the m x m identity.
CMatrix canonical_columns(int m, int d);

}  // namespace ialab::subspace
