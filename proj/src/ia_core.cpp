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


#include "ialab/ia_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ialab/error.hpp"

namespace ialab::ia {
namespace {

constexpr double kDegenerateNorm = 1e-12;
constexpr double kCrossSingularTol = 1e-10;

void check_precoders(const ChannelSet& channels, const PrecoderSet& precoders) {
  if (static_cast<int>(precoders.V.size()) != channels.K)
    fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(channels.K) + " precoders, got " +
                                           std::to_string(precoders.V.size()));
  for (const CMatrix& v : precoders.V)
    if (v.rows() != channels.mt() || v.cols() < 1)
      fail(ErrorCode::DimensionMismatch, "precoder has " + std::to_string(v.rows()) + " rows, channel has " +
                                             std::to_string(channels.mt()) + " transmit antennas");
}

void check_filters(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters) {
  check_precoders(channels, precoders);
  if (static_cast<int>(filters.U.size()) != channels.K)
    fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(channels.K) + " receive filters");
  for (int j = 0; j < channels.K; ++j) {
    const CMatrix& u = filters.U[static_cast<std::size_t>(j)];
    if (u.rows() != channels.nr())
      fail(ErrorCode::DimensionMismatch, "receive filter " + std::to_string(j) + " has wrong row count");
  }
}

void check_topology(const ChannelSet& channels, const Topology& topology) {
  if (topology.K != channels.K || topology.mt != channels.mt() || topology.nr != channels.nr())
    fail(ErrorCode::DimensionMismatch, "topology does not match the channel set");
  topology.validate();
}

// sqrt(alpha_ji P / d_i) H_ji V_i
CMatrix effective_channel(const ChannelSet& channels, const PrecoderSet& precoders, const Topology& topology,
                          int j, int i) {
  const double d_i = static_cast<double>(precoders.V[static_cast<std::size_t>(i)].cols());
  const double gain = std::sqrt(topology.alpha(j, i) * topology.power / d_i);
  return gain * (channels(j, i) * precoders.V[static_cast<std::size_t>(i)]);
}

// The d weakest eigenvectors of a Hermitian matrix (eigenvalues descending).
CMatrix weakest_eigvecs(const CMatrix& q, int d) {
  const linops::EigResult eig = linops::hermitian_eig(0.5 * (q + q.adjoint()));
  return eig.vectors.rightCols(d);
}

}  // namespace

CMatrix random_orthonormal(int m, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix a(m, d);
  // Column-major fill order keeps draws stable across Eigen versions.
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < m; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      a(r, c) = cd(re, im);
    }
  return linops::thin_qr_positive(a);
}

double subspace_change(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::DimensionMismatch, "subspace_change: row mismatch");
  const CMatrix pa = a * a.adjoint();
  const CMatrix pb = b * b.adjoint();
  return (pa - pb).norm() / std::sqrt(2.0);
}

Whitening interference_covariance(const ChannelSet& channels, const PrecoderSet& precoders, int j) {
  check_precoders(channels, precoders);
  if (j < 0 || j >= channels.K) fail(ErrorCode::DimensionMismatch, "user index out of range");
  const int nr = channels.nr();
  Whitening w;
  w.phi = CMatrix::Identity(nr, nr);
  for (int i = 0; i < channels.K; ++i) {
    if (i == j) continue;
    const CMatrix hv = channels(j, i) * precoders.V[static_cast<std::size_t>(i)];
    w.phi.noalias() += hv * hv.adjoint();
  }
  w.phi = 0.5 * (w.phi + w.phi.adjoint());
  // The identity term keeps phi positive definite, so a failure here is internal.
  w.psi = linops::inv_sqrt_psd(w.phi);
  return w;
}

ReceiveFilterSet matched_receive_filters(const ChannelSet& channels, const PrecoderSet& precoders,
                                         const Topology& topology) {
  check_precoders(channels, precoders);
  check_topology(channels, topology);
  ReceiveFilterSet out;
  out.U.resize(static_cast<std::size_t>(channels.K));
  for (int j = 0; j < channels.K; ++j) {
    const Whitening w = interference_covariance(channels, precoders, j);
    const CMatrix hv = w.psi * channels(j, j) * precoders.V[static_cast<std::size_t>(j)];
    CMatrix& u = out.U[static_cast<std::size_t>(j)];
    u.resize(hv.rows(), hv.cols());
    for (Eigen::Index c = 0; c < hv.cols(); ++c) {
      const double lambda = hv.col(c).norm();
      if (!(lambda >= kDegenerateNorm))
        fail(ErrorCode::DegenerateChannel, "whitened desired channel of user " + std::to_string(j) + " vanishes");
      u.col(c) = hv.col(c) / lambda;
    }
  }
  return out;
}

std::pair<PrecoderSet, ReceiveFilterSet> closed_form_ia_3user(const ChannelSet& channels) {
  if (channels.K != 3 || channels.nr() != 2 || channels.mt() != 2)
    fail(ErrorCode::InfeasibleConfig, "closed form needs K=3 with 2x2 links, got K=" + std::to_string(channels.K) +
                                          " " + std::to_string(channels.nr()) + "x" + std::to_string(channels.mt()));
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      if (i == j) continue;
      const RVector s = Eigen::JacobiSVD<CMatrix>(channels(j, i)).singularValues();
      if (!(s(1) > kCrossSingularTol))
        fail(ErrorCode::SingularCrossChannel,
             "cross channel H(" + std::to_string(j) + "," + std::to_string(i) + ") is singular");
    }
  const auto inv = [&](int j, int i) { return CMatrix(channels(j, i).inverse()); };
  // Users are 0-based here: E = H20^-1 H21 H01^-1 H02 H12^-1 H10.
  const CMatrix e = inv(2, 0) * channels(2, 1) * inv(0, 1) * channels(0, 2) * inv(1, 2) * channels(1, 0);
  Eigen::ComplexEigenSolver<CMatrix> solver(e);
  if (solver.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "closed_form_ia_3user: eigen solver");
  Eigen::Index pick = 0;
  for (Eigen::Index k = 1; k < solver.eigenvalues().size(); ++k)
    if (std::abs(solver.eigenvalues()(k)) > std::abs(solver.eigenvalues()(pick)) + 1e-12) pick = k;

  PrecoderSet pre;
  pre.V.resize(3);
  pre.V[0] = solver.eigenvectors().col(pick).normalized();
  pre.V[1] = (inv(2, 1) * channels(2, 0) * pre.V[0]).normalized();
  pre.V[2] = (inv(1, 2) * channels(1, 0) * pre.V[0]).normalized();
  for (CMatrix& v : pre.V) linops::normalize_column_phases(v);

  ReceiveFilterSet filt;
  filt.U.resize(3);
  for (int j = 0; j < 3; ++j) {
    // Both interferers point the same way; take the stronger one.
    const int a = (j + 1) % 3;
    const int b = (j + 2) % 3;
    const CMatrix ia = channels(j, a) * pre.V[static_cast<std::size_t>(a)];
    const CMatrix ib = channels(j, b) * pre.V[static_cast<std::size_t>(b)];
    const CMatrix dir = ia.norm() >= ib.norm() ? ia : ib;
    filt.U[static_cast<std::size_t>(j)] = linops::null_basis(dir.normalized());
  }
  return {std::move(pre), std::move(filt)};
}

IterativeResult iterative_whitened_ia(const ChannelSet& channels, const Topology& topology, int max_iters,
                                      double tol, std::uint64_t seed) {
  check_topology(channels, topology);
  if (max_iters < 1) fail(ErrorCode::BadConfig, "max_iters must be at least 1");
  const int K = channels.K;
  IterativeResult out;
  out.precoders.V.resize(static_cast<std::size_t>(K));
  for (int j = 0; j < K; ++j)
    out.precoders.V[static_cast<std::size_t>(j)] =
        random_orthonormal(channels.mt(), topology.d[static_cast<std::size_t>(j)], seed + static_cast<std::uint64_t>(j));

  for (int it = 1; it <= max_iters; ++it) {
    double change = 0.0;
    for (int j = 0; j < K; ++j) {
      const Whitening w = interference_covariance(channels, out.precoders, j);
      const linops::SvdResult svd = linops::thin_svd(w.psi * channels(j, j));
      const int dj = topology.d[static_cast<std::size_t>(j)];
      CMatrix next = svd.v.leftCols(dj);
      CMatrix& v = out.precoders.V[static_cast<std::size_t>(j)];
      change = std::max(change, subspace_change(v, next));
      v = std::move(next);
    }
    out.filters = matched_receive_filters(channels, out.precoders, topology);
    out.leakage_history.push_back(leakage(channels, out.precoders, out.filters));
    out.iterations_used = it;
    if (change < tol) break;
  }
  return out;
}

IterativeResult distributed_ia(const ChannelSet& channels, const Topology& topology, int max_iters,
                               std::uint64_t seed) {
  check_topology(channels, topology);
  if (max_iters < 1) fail(ErrorCode::BadConfig, "max_iters must be at least 1");
  const int K = channels.K;
  const auto dof = [&](int j) { return topology.d[static_cast<std::size_t>(j)]; };
  IterativeResult out;
  out.precoders.V.resize(static_cast<std::size_t>(K));
  out.filters.U.resize(static_cast<std::size_t>(K));
  for (int j = 0; j < K; ++j)
    out.precoders.V[static_cast<std::size_t>(j)] =
        random_orthonormal(channels.mt(), dof(j), seed + static_cast<std::uint64_t>(j));

  for (int it = 1; it <= max_iters; ++it) {
    // Forward network: receivers suppress interference.
    for (int j = 0; j < K; ++j) {
      CMatrix q = CMatrix::Zero(channels.nr(), channels.nr());
      for (int i = 0; i < K; ++i) {
        if (i == j) continue;
        const CMatrix hv = channels(j, i) * out.precoders.V[static_cast<std::size_t>(i)];
        q.noalias() += (topology.power / dof(i)) * (hv * hv.adjoint());
      }
      out.filters.U[static_cast<std::size_t>(j)] = weakest_eigvecs(q, dof(j));
    }
    // Reciprocal network: receivers transmit through H^H.
    for (int i = 0; i < K; ++i) {
      CMatrix q = CMatrix::Zero(channels.mt(), channels.mt());
      for (int j = 0; j < K; ++j) {
        if (j == i) continue;
        const CMatrix hu = channels(j, i).adjoint() * out.filters.U[static_cast<std::size_t>(j)];
        q.noalias() += (topology.power / dof(j)) * (hu * hu.adjoint());
      }
      out.precoders.V[static_cast<std::size_t>(i)] = weakest_eigvecs(q, dof(i));
    }
    out.leakage_history.push_back(leakage(channels, out.precoders, out.filters));
    out.iterations_used = it;
    if (out.leakage_history.back() < std::numeric_limits<double>::min()) break;
  }
  return out;
}

double leakage(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters) {
  check_filters(channels, precoders, filters);
  double total = 0.0;
  for (int j = 0; j < channels.K; ++j)
    for (int i = 0; i < channels.K; ++i) {
      if (i == j) continue;
      const CMatrix& u = filters.U[static_cast<std::size_t>(j)];
      const CMatrix& v = precoders.V[static_cast<std::size_t>(i)];
      if (u.cols() == 0 || v.cols() == 0) continue;
      total += (u.adjoint() * channels(j, i) * v).squaredNorm();
    }
  return total;
}

RVector sinr_per_user(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters,
                      const Topology& topology) {
  check_filters(channels, precoders, filters);
  check_topology(channels, topology);
  const int K = channels.K;
  RVector gamma(K);
  for (int j = 0; j < K; ++j) {
    const CMatrix uh = filters.U[static_cast<std::size_t>(j)].adjoint();
    const double signal = (uh * effective_channel(channels, precoders, topology, j, j)).squaredNorm();
    double interference = 0.0;
    for (int i = 0; i < K; ++i)
      if (i != j) interference += (uh * effective_channel(channels, precoders, topology, j, i)).squaredNorm();
    const double noise = topology.noise_var * precoders.V[static_cast<std::size_t>(j)].squaredNorm();
    gamma(j) = signal / (interference + noise);
  }
  return gamma;
}

RateResult sinr_rates(const ChannelSet& channels, const PrecoderSet& precoders, const ReceiveFilterSet& filters,
                      const Topology& topology) {
  const RVector gamma = sinr_per_user(channels, precoders, filters, topology);
  RateResult r;
  r.rates = (1.0 + gamma.array()).log() / std::log(2.0);
  r.sum_rate = r.rates.sum();
  r.avg_user_throughput = r.sum_rate / static_cast<double>(channels.K);
  return r;
}

RateResult mmse_rates(const ChannelSet& channels, const PrecoderSet& precoders, const Topology& topology) {
  check_precoders(channels, precoders);
  check_topology(channels, topology);
  const int K = channels.K;
  const int nr = channels.nr();
  RateResult r;
  r.rates.resize(K);
  for (int j = 0; j < K; ++j) {
    CMatrix q = topology.noise_var * CMatrix::Identity(nr, nr);
    for (int i = 0; i < K; ++i) {
      if (i == j) continue;
      const CMatrix g = effective_channel(channels, precoders, topology, j, i);
      q.noalias() += g * g.adjoint();
    }
    const CMatrix gjj = effective_channel(channels, precoders, topology, j, j);
    const Eigen::LLT<CMatrix> q_llt(0.5 * (q + q.adjoint()));
    if (q_llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "mmse_rates: interference covariance");
    CMatrix m = CMatrix::Identity(gjj.cols(), gjj.cols()) + gjj.adjoint() * q_llt.solve(gjj);
    m = 0.5 * (m + m.adjoint());
    const Eigen::LLT<CMatrix> m_llt(m);
    if (m_llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "mmse_rates: rate matrix");
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < m.rows(); ++k) logdet += 2.0 * std::log(m_llt.matrixL()(k, k).real());
    r.rates(j) = std::max(0.0, logdet / std::log(2.0));
  }
  r.sum_rate = r.rates.sum();
  r.avg_user_throughput = r.sum_rate / static_cast<double>(K);
  return r;
}

}  // namespace ialab::ia
