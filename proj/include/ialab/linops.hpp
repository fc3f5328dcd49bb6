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

// Complex dense kernels shared by the channel, alignment and subspace code.
// Thin wrappers over Eigen that pin down ordering, phase and sign
// conventions so every caller sees deterministic results.

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ialab {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

namespace linops {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kPositiveDefiniteTol = 1e-12;
inline constexpr double kOrthonormalTol = 1e-10;

struct EigResult {
  RVector values;   // descending
  CMatrix vectors;  // column k pairs with values(k)
};

struct SvdResult {
  CMatrix u;
  RVector s;  // non-negative, descending
  CMatrix v;
};

/// Eigen-decomposition of a Hermitian matrix. Each eigenvector is rotated so
/// its largest-magnitude entry is real positive.
EigResult hermitian_eig(const CMatrix& a);

/// Thin SVD, a = u * diag(s) * v^H.
SvdResult thin_svd(const CMatrix& a);

/// Orthonormal basis of span(a) with the implicit R factor's diagonal real
/// positive. Throws RankDeficient when the smallest singular value of a is
/// at or below kRankTol.
CMatrix thin_qr_positive(const CMatrix& a);

/// b with b * a * b^H = I for Hermitian positive definite a; b is Hermitian.
CMatrix inv_sqrt_psd(const CMatrix& a);

/// n x (n - d) orthonormal complement of the orthonormal columns of b.
CMatrix null_basis(const CMatrix& b);

/// max |a - a^H| entry.
double hermitian_defect(const CMatrix& a);

/// max |q^H q - I| entry.
double orthonormality_defect(const CMatrix& q);

/// Forces the largest-magnitude entry of every column to be real positive.
void normalize_column_phases(CMatrix& vectors);

}  // namespace linops
}  // namespace ialab
