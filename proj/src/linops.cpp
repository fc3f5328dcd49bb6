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

#include "ialab/linops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ialab/error.hpp"

namespace ialab::linops {
namespace {

std::string shape(const CMatrix& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); }

// Hermitian check scaled by the matrix magnitude so products such as
// H * H^H of large channels are not rejected for round-off.
void require_hermitian(const CMatrix& a, const char* where) {
  if (a.rows() != a.cols()) fail(ErrorCode::DimensionMismatch, std::string(where) + ": matrix is " + shape(a));
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (hermitian_defect(a) > kHermitianTol * scale)
    fail(ErrorCode::NotHermitian, std::string(where) + ": |A - A^H| = " + std::to_string(hermitian_defect(a)));
}

}  // namespace

double hermitian_defect(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double orthonormality_defect(const CMatrix& q) {
  if (q.size() == 0) return 0.0;
  return (q.adjoint() * q - CMatrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

void normalize_column_phases(CMatrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      // Ties go to the lowest index; the 1e-12 slack keeps that stable
      // against round-off between nearly equal magnitudes.
      const double mag = std::abs(vectors(r, c));
      if (mag > best + 1e-12) {
        best = mag;
        arg = r;
      }
    }
    if (best > 0.0) vectors.col(c) *= std::conj(vectors(arg, c)) / best;
  }
}

EigResult hermitian_eig(const CMatrix& a) {
  require_hermitian(a, "hermitian_eig");
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "hermitian_eig: solver did not converge");
  const Eigen::Index n = a.rows();
  EigResult out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  normalize_column_phases(out.vectors);
  return out;
}

SvdResult thin_svd(const CMatrix& a) {
  if (a.size() == 0) fail(ErrorCode::DimensionMismatch, "thin_svd: empty matrix");
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "thin_svd: iteration limit hit");
  SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  // Fix the joint phase of each singular pair through v, then carry it to u.
  for (Eigen::Index c = 0; c < out.v.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < out.v.rows(); ++r) {
      const double mag = std::abs(out.v(r, c));
      if (mag > best + 1e-12) {
        best = mag;
        arg = r;
      }
    }
    if (best > 0.0) {
      const cd phase = std::conj(out.v(arg, c)) / best;
      out.v.col(c) *= phase;
      out.u.col(c) *= phase;
    }
  }
  return out;
}

CMatrix thin_qr_positive(const CMatrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0)
    fail(ErrorCode::DimensionMismatch, "thin_qr_positive: need rows >= cols >= 1, got " + shape(a));
  const RVector s = Eigen::JacobiSVD<CMatrix>(a).singularValues();
  if (!(s(s.size() - 1) > kRankTol))
    fail(ErrorCode::RankDeficient, "thin_qr_positive: smallest singular value " + std::to_string(s(s.size() - 1)));
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(a.rows(), a.cols());
  const CMatrix& r = qr.matrixQR();
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const cd diag = r(k, k);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(k) *= diag / mag;
  }
  return q;
}

CMatrix inv_sqrt_psd(const CMatrix& a) {
  const EigResult eig = hermitian_eig(a);
  const double min_eig = eig.values(eig.values.size() - 1);
  if (!(min_eig > kPositiveDefiniteTol))
    fail(ErrorCode::NotPositiveDefinite, "inv_sqrt_psd: minimum eigenvalue " + std::to_string(min_eig));
  const RVector scale = eig.values.array().rsqrt();
  CMatrix b = eig.vectors * scale.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (b + b.adjoint());
}

CMatrix null_basis(const CMatrix& b) {
  const Eigen::Index n = b.rows();
  const Eigen::Index d = b.cols();
  if (d >= n) fail(ErrorCode::DimensionMismatch, "null_basis: basis " + shape(b) + " has no complement");
  if (orthonormality_defect(b) > kOrthonormalTol)
    fail(ErrorCode::DimensionMismatch, "null_basis: input columns are not orthonormal");
  Eigen::HouseholderQR<CMatrix> qr(b);
  const CMatrix full = qr.householderQ() * CMatrix::Identity(n, n);
  CMatrix comp = full.rightCols(n - d);
  // Re-orthogonalise once against b; Householder output is already close.
  comp -= b * (b.adjoint() * comp);
  comp = thin_qr_positive(comp);
  normalize_column_phases(comp);
  return comp;
}

}  // namespace ialab::linops
