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

// Alignment conditions, interference whitening, precoder and receiver
// construction, and the SINR / rate functionals.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ialab/linops.hpp"
#include "ialab/netmodel.hpp"

namespace ialab::ia {

using netmodel::ChannelSet;
using netmodel::Topology;

/// V[j] is m_t x d_j with orthonormal columns.
struct PrecoderSet {
  std::vector<CMatrix> V;
};

/// U[j] is n_r x d_j with unit-norm columns.
struct ReceiveFilterSet {
  std::vector<CMatrix> U;
};

struct Whitening {
  CMatrix phi;  // sum_{i != j} H_ji V_i V_i^H H_ji^H + I
  CMatrix psi;  // phi^{-1/2}
};

struct RateResult {
  RVector rates;
  double sum_rate = 0.0;
  double avg_user_throughput = 0.0;
};

struct IterativeResult {
  PrecoderSet precoders;
  ReceiveFilterSet filters;
  int iterations_used = 0;
  std::vector<double> leakage_history;  // after each sweep
};

Whitening interference_covariance(const ChannelSet& channels, const PrecoderSet& precoders, int j);

/// Column i of U_j is Psi_j H_jj v_j^(i), normalised to unit length.
ReceiveFilterSet matched_receive_filters(const ChannelSet& channels, const PrecoderSet& precoders,
                                         const Topology& topology);

/// Exact three-user alignment for 2x2 links with one stream each. U_j spans
/// the complement of the aligned interference direction at receiver j.
std::pair<PrecoderSet, ReceiveFilterSet> closed_form_ia_3user(const ChannelSet& channels);

/// Gauss-Seidel fixed point: each V_j becomes the top d_j right singular
/// vectors of Psi_j H_jj, then U_j follows from matched_receive_filters.
/// Stops when the largest chordal change of any V_j drops below tol.
IterativeResult iterative_whitened_ia(const ChannelSet& channels, const Topology& topology, int max_iters,
                                      double tol, std::uint64_t seed);

/// Alternating leakage minimisation over the reciprocal network. Receivers
/// take the weakest eigenvectors of their weighted interference covariance,
/// then transmitters do the same on H^H.
IterativeResult distributed_ia(const ChannelSet& channels, const Topology& topology, int max_iters,
                               std::uint64_t seed);

/// sum_j sum_{i != j} ||U_j^H H_ji V_i||_F^2
double leakage(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters);

/// Per-user SINR with link powers sqrt(alpha_ji P / d_i) folded into H_ji.
RVector sinr_per_user(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters,
                      const Topology& topology);

/// log2(1 + sinr) per user, summed.
RateResult sinr_rates(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters,
                      const Topology& topology);

/// MMSE receiver rate: R_j = log2 det(I + G_jj^H (sum_{i != j} G_ji G_ji^H + s^2 I)^{-1} G_jj).
RateResult mmse_rates(const ChannelSet& channels, const PrecoderSet& precoders, const Topology& topology);

/// Orthonormal m x d matrix drawn from complex Gaussian entries.
CMatrix random_orthonormal(int m, int d, std::uint64_t seed);

/// Chordal distance between the column spans of two orthonormal bases.
double subspace_change(const CMatrix& a, const CMatrix& b);

}  // namespace ialab::ia
