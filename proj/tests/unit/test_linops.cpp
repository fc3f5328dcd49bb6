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


#include <doctest.h>

#include <cmath>

#include "ialab/error.hpp"
#include "ialab/linops.hpp"
#include "util.hpp"

using namespace ialab;
using namespace ialab::linops;

TEST_SUITE("linops") {
  TEST_CASE("hermitian_eig on hand-solvable matrices") {
    const EigResult id = hermitian_eig(CMatrix::Identity(3, 3));
    CHECK((id.values.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(orthonormality_defect(id.vectors) < 1e-10);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 5.0;
    const EigResult e = hermitian_eig(d);
    CHECK(e.values(0) == doctest::Approx(5.0));
    CHECK(e.values(1) == doctest::Approx(2.0));
    CHECK(std::abs(e.vectors(1, 0) - cd(1.0)) < 1e-12);
    CHECK(std::abs(e.vectors(0, 1) - cd(1.0)) < 1e-12);

    // [[2,1],[1,2]]: roots of l^2 - 4l + 3 from the quadratic formula.
    CMatrix s(2, 2);
    s << 2.0, 1.0, 1.0, 2.0;
    const double disc = std::sqrt(16.0 - 12.0);
    const EigResult r = hermitian_eig(s);
    CHECK(r.values(0) == doctest::Approx((4.0 + disc) / 2.0).epsilon(1e-12));
    CHECK(r.values(1) == doctest::Approx((4.0 - disc) / 2.0).epsilon(1e-12));
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(r.vectors(0, 0) - cd(h)) < 1e-12);
    CHECK(std::abs(r.vectors(1, 0) - cd(h)) < 1e-12);
    // Second vector is (1, -1)/sqrt(2) up to the largest-entry phase rule.
    CHECK(std::abs(std::abs(r.vectors(0, 1)) - h) < 1e-12);
    CHECK(std::abs(r.vectors(0, 1) + r.vectors(1, 1)) < 1e-12);
  }

  TEST_CASE("hermitian_eig errors and recomposition") {
    CMatrix ns(2, 2);
    ns << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_WITH_AS(hermitian_eig(ns), doctest::Contains("NotHermitian"), Error);
    CHECK_THROWS_WITH_AS(hermitian_eig(CMatrix::Zero(2, 3)), doctest::Contains("DimensionMismatch"), Error);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CMatrix g = testutil::random_cmatrix(5, 5, seed);
      const CMatrix a = g + g.adjoint();
      const EigResult e = hermitian_eig(a);
      const CMatrix back = e.vectors * e.values.cast<cd>().asDiagonal() * e.vectors.adjoint();
      CHECK((back - a).norm() / a.norm() < 1e-8);
      CHECK(orthonormality_defect(e.vectors) < 1e-10);
      for (Eigen::Index k = 1; k < e.values.size(); ++k) CHECK(e.values(k - 1) >= e.values(k));
      for (Eigen::Index k = 0; k < 5; ++k)
        CHECK((a * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm() < 1e-8 * std::max(1.0, a.norm()));
    }
  }

  TEST_CASE("thin_svd on hand-solvable matrices") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    const SvdResult s = thin_svd(d);
    CHECK(s.s(0) == doctest::Approx(3.0));
    CHECK(s.s(1) == doctest::Approx(1.0));
    const SvdResult z = thin_svd(CMatrix::Zero(2, 2));
    CHECK(z.s.cwiseAbs().maxCoeff() == 0.0);

    // A^H A = [[2,0],[0,0]]: singular values sqrt(2), 0; top right vector e1.
    CMatrix a(2, 2);
    a << 1.0, 0.0, 1.0, 0.0;
    const SvdResult r = thin_svd(a);
    CHECK(r.s(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(r.s(1)) < 1e-12);
    CHECK(std::abs(r.v(0, 0) - cd(1.0)) < 1e-12);
    CHECK_THROWS_AS(thin_svd(CMatrix(0, 0)), Error);
  }

  TEST_CASE("thin_svd reconstructs random matrices") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CMatrix a = testutil::random_cmatrix(6, 4, 100 + seed);
      const SvdResult s = thin_svd(a);
      const CMatrix back = s.u * s.s.cast<cd>().asDiagonal() * s.v.adjoint();
      CHECK((back - a).norm() / a.norm() < 1e-8);
      CHECK(orthonormality_defect(s.u) < 1e-10);
      CHECK(orthonormality_defect(s.v) < 1e-10);
      CHECK((s.s.array() >= 0.0).all());
    }
  }

  TEST_CASE("thin_qr_positive examples") {
    const CMatrix q0 = thin_qr_positive(CMatrix::Identity(4, 2));
    CHECK(testutil::max_abs(q0 - CMatrix::Identity(4, 2)) < 1e-12);

    CMatrix e1 = CMatrix::Zero(4, 1);
    e1(0, 0) = 2.0;
    const CMatrix q1 = thin_qr_positive(e1);
    CHECK(std::abs(q1(0, 0) - cd(1.0)) < 1e-12);
    CHECK(q1.bottomRows(3).norm() < 1e-12);

    CMatrix ones = CMatrix::Ones(2, 1);
    const CMatrix q2 = thin_qr_positive(ones);
    CHECK(std::abs(q2(0, 0) - cd(1.0 / std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(q2(1, 0) - cd(1.0 / std::sqrt(2.0))) < 1e-12);

    CMatrix dep(3, 2);
    dep.col(0) = testutil::random_cmatrix(3, 1, 5);
    dep.col(1) = 2.0 * dep.col(0);
    CHECK_THROWS_WITH_AS(thin_qr_positive(dep), doctest::Contains("RankDeficient"), Error);
    CHECK_THROWS_AS(thin_qr_positive(CMatrix::Zero(2, 3)), Error);
  }

  TEST_CASE("thin_qr_positive spans the input, is orthonormal and deterministic") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CMatrix a = testutil::random_cmatrix(5, 3, 200 + seed);
      const CMatrix q = thin_qr_positive(a);
      CHECK(orthonormality_defect(q) < 1e-10);
      // R = Q^H A is upper triangular with a positive real diagonal.
      const CMatrix r = q.adjoint() * a;
      for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(r(c, c).imag()) < 1e-10);
        CHECK(r(c, c).real() > 0.0);
        for (int row = c + 1; row < 3; ++row) CHECK(std::abs(r(row, c)) < 1e-10);
      }
      CHECK((q * r - a).norm() < 1e-10 * a.norm());
      const CMatrix q2 = thin_qr_positive(a);
      CHECK((q2 - q).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("inv_sqrt_psd examples and properties") {
    CHECK(testutil::max_abs(inv_sqrt_psd(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)) < 1e-12);
    CHECK(testutil::max_abs(inv_sqrt_psd(4.0 * CMatrix::Identity(2, 2)) - 0.5 * CMatrix::Identity(2, 2)) < 1e-12);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const CMatrix b = inv_sqrt_psd(d);
    CHECK(std::abs(b(0, 0) - cd(1.0 / std::sqrt(4.0))) < 1e-12);
    CHECK(std::abs(b(1, 1) - cd(1.0 / std::sqrt(9.0))) < 1e-12);
    CHECK(std::abs(b(0, 1)) < 1e-12);
    CHECK_THROWS_WITH_AS(inv_sqrt_psd(CMatrix::Zero(2, 2)), doctest::Contains("NotPositiveDefinite"), Error);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CMatrix g = testutil::random_cmatrix(4, 4, 300 + seed);
      const CMatrix a = g * g.adjoint() + CMatrix::Identity(4, 4);
      const CMatrix w = inv_sqrt_psd(a);
      CHECK(testutil::max_abs(w * a * w.adjoint() - CMatrix::Identity(4, 4)) < 1e-8);
      CHECK(hermitian_defect(w) < 1e-12);
      CHECK(testutil::max_abs(w * w * a - CMatrix::Identity(4, 4)) < 1e-7);
    }
  }

  TEST_CASE("null_basis examples and properties") {
    CMatrix e1 = CMatrix::Zero(2, 1);
    e1(0, 0) = 1.0;
    const CMatrix n1 = null_basis(e1);
    REQUIRE(n1.cols() == 1);
    CHECK(std::abs(std::abs(n1(1, 0)) - 1.0) < 1e-12);

    const CMatrix n2 = null_basis(CMatrix::Identity(3, 2));
    REQUIRE(n2.cols() == 1);
    CHECK(std::abs(std::abs(n2(2, 0)) - 1.0) < 1e-12);

    CMatrix diag = CMatrix::Ones(2, 1) / std::sqrt(2.0);
    const CMatrix n3 = null_basis(diag);
    // (1, -1)/sqrt(2) up to a unit phase.
    CHECK(std::abs(std::abs(n3(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(n3(0, 0) + n3(1, 0)) < 1e-12);

    CHECK_THROWS_WITH_AS(null_basis(CMatrix::Identity(2, 2)), doctest::Contains("DimensionMismatch"), Error);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CMatrix b = thin_qr_positive(testutil::random_cmatrix(5, 2, 400 + seed));
      const CMatrix n = null_basis(b);
      CHECK(n.cols() == 3);
      CHECK(orthonormality_defect(n) < 1e-10);
      CHECK(testutil::max_abs(b.adjoint() * n) < 1e-10);
    }
  }
}
