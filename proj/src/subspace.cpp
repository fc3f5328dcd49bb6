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


#include "ialab/subspace.hpp"

#include <cmath>
#include <string>

#include "ialab/error.hpp"

namespace ialab::subspace {
namespace {

constexpr double kIciscRidge = 1e-9;

void check_assignment(const ChannelSet& channels, const SubspaceAssignment& a) {
  const auto K = static_cast<std::size_t>(channels.K);
  if (a.S_D.size() != K || a.W_D.size() != K)
    fail(ErrorCode::DimensionMismatch, "assignment does not cover every receiver");
  for (std::size_t j = 0; j < K; ++j)
    if (a.W_D[j].rows() != channels.nr() || a.W_D[j].cols() != channels.nr())
      fail(ErrorCode::DimensionMismatch, "desired projector of receiver " + std::to_string(j) + " has wrong size");
}

void check_delta(const ChannelSet& channels, const RMatrix& delta) {
  if (delta.rows() != channels.K || delta.cols() != channels.K)
    fail(ErrorCode::DimensionMismatch, "delta must be K x K");
}

// Projector of the signal from transmitter j as seen at receiver i. Gains are
// dropped since the projector only depends on the span.
CMatrix signal_projector(const ChannelSet& channels, const PrecoderSet& precoders, int i, int j) {
  return orthogonal_projector(channels(i, j) * precoders.V[static_cast<std::size_t>(j)]);
}

}  // namespace

BaselineStrategy parse_baseline(std::string_view name) {
  if (name == "blind") return BaselineStrategy::Blind;
  if (name == "maxsnr") return BaselineStrategy::MaxSnr;
  if (name == "icisc_blind") return BaselineStrategy::IciscBlind;
  if (name == "icisc_maxsnr") return BaselineStrategy::IciscMaxSnr;
  fail(ErrorCode::BadConfig, "unknown baseline '" + std::string(name) + "'");
}

std::string_view baseline_name(BaselineStrategy s) {
  switch (s) {
    case BaselineStrategy::Blind: return "blind";
    case BaselineStrategy::MaxSnr: return "maxsnr";
    case BaselineStrategy::IciscBlind: return "icisc_blind";
    case BaselineStrategy::IciscMaxSnr: return "icisc_maxsnr";
  }
  return "?";
}

CMatrix orthogonal_projector(const CMatrix& g) {
  const CMatrix q = linops::thin_qr_positive(g);
  CMatrix w = q * q.adjoint();
  return 0.5 * (w + w.adjoint());
}

bool is_projector(const CMatrix& w, double tol) {
  if (w.rows() != w.cols()) return false;
  if (linops::hermitian_defect(w) > tol) return false;
  return (w * w - w).cwiseAbs().maxCoeff() <= tol;
}

double chordal_distance(const CMatrix& w1, const CMatrix& w2) {
  if (w1.rows() != w2.rows() || w1.cols() != w2.cols())
    fail(ErrorCode::DimensionMismatch, "chordal_distance: projector sizes differ");
  if (!is_projector(w1) || !is_projector(w2)) fail(ErrorCode::NotProjector, "chordal_distance: argument is not a projector");
  return (w1 - w2).norm() / std::sqrt(2.0);
}

std::uint64_t user_seed(std::uint64_t seed, int j) {
  // splitmix64 finaliser over (seed, j)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(j + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CMatrix canonical_columns(int m, int d) { return CMatrix::Identity(m, m).leftCols(d); }

SubspaceAssignment build_assignment(AssignmentStrategy strategy, const ChannelSet& channels,
                                    const Topology& topology, std::uint64_t seed) {
  topology.validate();
  if (topology.K != channels.K || topology.nr != channels.nr() || topology.mt != channels.mt())
    fail(ErrorCode::DimensionMismatch, "build_assignment: topology does not match channels");
  SubspaceAssignment a;
  const auto K = static_cast<std::size_t>(channels.K);
  a.S_D.resize(K);
  a.S_I.resize(K);
  a.W_D.resize(K);
  for (int j = 0; j < channels.K; ++j) {
    const int dj = topology.d[static_cast<std::size_t>(j)];
    if (dj >= channels.nr())
      fail(ErrorCode::InfeasibleConfig, "receiver " + std::to_string(j) + " has no interference subspace (d = n_r)");
    CMatrix sd;
    if (strategy == AssignmentStrategy::Blind) {
      sd = ia::random_orthonormal(channels.nr(), dj, user_seed(seed, j));
    } else {
      const CMatrix& h = channels(j, j);
      sd = linops::hermitian_eig(h * h.adjoint()).vectors.leftCols(dj);
    }
    const auto uj = static_cast<std::size_t>(j);
    a.S_I[uj] = linops::null_basis(sd);
    a.W_D[uj] = sd * sd.adjoint();
    a.W_D[uj] = 0.5 * (a.W_D[uj] + a.W_D[uj].adjoint());
    a.S_D[uj] = std::move(sd);
  }
  return a;
}

P2Value p2_value(const ChannelSet& channels, const PrecoderSet& precoders, const SubspaceAssignment& assignment,
                 const RMatrix& delta, const Topology& topology, RankPolicy policy) {
  check_assignment(channels, assignment);
  check_delta(channels, delta);
  if (static_cast<int>(precoders.V.size()) != channels.K)
    fail(ErrorCode::DimensionMismatch, "p2_value: precoder count differs from K");
  const int K = channels.K;
  P2Value out;
  out.per_transmitter.setZero(K);
  out.desired.setZero(K);
  out.interference.setZero(K);
  // Distance from the span of H_ij V_j to S^D_i, with the limiting values
  // for a vanished signal under RankPolicy::Limit.
  const auto distance = [&](int i, int j) -> double {
    try {
      return chordal_distance(signal_projector(channels, precoders, i, j), assignment.W_D[static_cast<std::size_t>(i)]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient || policy == RankPolicy::Throw) throw;
      return i == j ? std::sqrt(static_cast<double>(topology.d[static_cast<std::size_t>(j)])) : 0.0;
    }
  };
  for (int j = 0; j < K; ++j) {
    out.desired(j) = delta(j, j) * distance(j, j);
    double interference = 0.0;
    for (int i = 0; i < K; ++i)
      if (i != j) interference += delta(i, j) * distance(i, j);
    out.interference(j) = interference;
    out.per_transmitter(j) = out.desired(j) - interference;
  }
  out.total = out.per_transmitter.sum();
  return out;
}

double p2_squared_value(const ChannelSet& channels, const PrecoderSet& precoders,
                        const SubspaceAssignment& assignment, const RMatrix& delta, const Topology& topology) {
  (void)topology;
  check_assignment(channels, assignment);
  check_delta(channels, delta);
  double total = 0.0;
  for (int j = 0; j < channels.K; ++j) {
    const auto sq = [&](int i) {
      const double d = chordal_distance(signal_projector(channels, precoders, i, j),
                                        assignment.W_D[static_cast<std::size_t>(i)]);
      return d * d;
    };
    total += delta(j, j) * sq(j);
    for (int i = 0; i < channels.K; ++i)
      if (i != j) total -= delta(i, j) * sq(i);
  }
  return total;
}

double p2_expanded_check(const ChannelSet& channels, const PrecoderSet& precoders,
                         const SubspaceAssignment& assignment, const RMatrix& delta) {
  check_assignment(channels, assignment);
  check_delta(channels, delta);
  double total = 0.0;
  for (int j = 0; j < channels.K; ++j) {
    const double dj = static_cast<double>(precoders.V[static_cast<std::size_t>(j)].cols());
    const auto tr = [&](int i) {
      const CMatrix& wd = assignment.W_D[static_cast<std::size_t>(i)];
      return (signal_projector(channels, precoders, i, j) * wd.adjoint()).trace().real();
    };
    total += dj * (2.0 * delta(j, j) - 1.0) - delta(j, j) * tr(j);
    for (int i = 0; i < channels.K; ++i)
      if (i != j) total += delta(i, j) * tr(i);
  }
  return total;
}

PrecoderSet baseline_precoders(BaselineStrategy strategy, const ChannelSet& channels, const Topology& topology,
                               std::uint64_t seed, int* fallbacks) {
  topology.validate();
  if (topology.K != channels.K || topology.nr != channels.nr() || topology.mt != channels.mt())
    fail(ErrorCode::DimensionMismatch, "baseline_precoders: topology does not match channels");
  const int K = channels.K;
  const int mt = channels.mt();
  if (fallbacks != nullptr) *fallbacks = 0;
  PrecoderSet out;
  out.V.resize(static_cast<std::size_t>(K));
  const auto dof = [&](int j) { return topology.d[static_cast<std::size_t>(j)]; };

  if (strategy == BaselineStrategy::Blind) {
    for (int j = 0; j < K; ++j) out.V[static_cast<std::size_t>(j)] = ia::random_orthonormal(mt, dof(j), user_seed(seed, j));
    return out;
  }
  if (strategy == BaselineStrategy::MaxSnr) {
    for (int j = 0; j < K; ++j)
      out.V[static_cast<std::size_t>(j)] = linops::thin_svd(channels(j, j)).v.leftCols(dof(j));
    return out;
  }

  const AssignmentStrategy assign =
      strategy == BaselineStrategy::IciscBlind ? AssignmentStrategy::Blind : AssignmentStrategy::MaxSnr;
  const SubspaceAssignment a = build_assignment(assign, channels, topology, seed);
  const RMatrix delta = netmodel::delta_weights(topology.alpha);
  for (int j = 0; j < K; ++j) {
    const CMatrix& hjj = channels(j, j);
    CMatrix m = delta(j, j) * (hjj.adjoint() * a.W_D[static_cast<std::size_t>(j)] * hjj);
    CMatrix n = delta(j, j) * (hjj.adjoint() * hjj);
    for (int i = 0; i < K; ++i) {
      if (i == j) continue;
      const CMatrix& hij = channels(i, j);
      m -= delta(i, j) * (hij.adjoint() * a.W_D[static_cast<std::size_t>(i)] * hij);
      n += delta(i, j) * (hij.adjoint() * hij);
    }
    n += (kIciscRidge * std::max(1.0, n.trace().real() / mt)) * CMatrix::Identity(mt, mt);
    // M v = lambda N v through the Cholesky factor N = L L^H.
    const Eigen::LLT<CMatrix> llt(0.5 * (n + n.adjoint()));
    CMatrix& v = out.V[static_cast<std::size_t>(j)];
    try {
      if (llt.info() != Eigen::Success) fail(ErrorCode::RankDeficient, "gram matrix not positive definite");
      const CMatrix linv = llt.matrixL().solve(CMatrix::Identity(mt, mt));
      const CMatrix c = linv * m * linv.adjoint();
      const CMatrix y = linops::hermitian_eig(0.5 * (c + c.adjoint())).vectors.leftCols(dof(j));
      v = linops::thin_qr_positive(linv.adjoint() * y);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      v = canonical_columns(mt, dof(j));
      if (fallbacks != nullptr) ++*fallbacks;
    }
  }
  return out;
}

}  // namespace ialab::subspace
