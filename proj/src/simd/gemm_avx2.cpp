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

// This file is built with -mavx2 -mfma. It must not instantiate any
// standard-library template: a COMDAT copy compiled with AVX2 could be the
// one the linker keeps for the whole program.

#include "ialab/simd/gemm.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace ialab::simd::detail {
namespace {

constexpr std::size_t kNr = 8;  // two ymm registers per row
constexpr std::size_t kMr = 4;

// Copies b[0..k) x [j0, j0 + width) into a dense k x 8 panel, zero padded.
void pack_panel(std::size_t k, const double* b, std::size_t ldb, std::size_t j0,
                std::size_t width, double* pack) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* src = b + p * ldb + j0;
    double* dst = pack + p * kNr;
    std::size_t j = 0;
    for (; j < width; ++j) dst[j] = src[j];
    for (; j < kNr; ++j) dst[j] = 0.0;
  }
}

template <int MR>
inline void micro_kernel(std::size_t k, const double* a, std::size_t lda, const double* pack,
                         double* c, std::size_t ldc, std::size_t width) {
  __m256d acc_lo[MR];
  __m256d acc_hi[MR];
  for (int r = 0; r < MR; ++r) {
    acc_lo[r] = _mm256_setzero_pd();
    acc_hi[r] = _mm256_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b_lo = _mm256_loadu_pd(pack + p * kNr);
    const __m256d b_hi = _mm256_loadu_pd(pack + p * kNr + 4);
    for (int r = 0; r < MR; ++r) {
      const __m256d av = _mm256_broadcast_sd(a + r * lda + p);
      acc_lo[r] = _mm256_fmadd_pd(av, b_lo, acc_lo[r]);
      acc_hi[r] = _mm256_fmadd_pd(av, b_hi, acc_hi[r]);
    }
  }
  if (width == kNr) {
    for (int r = 0; r < MR; ++r) {
      double* crow = c + r * ldc;
      _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), acc_lo[r]));
      _mm256_storeu_pd(crow + 4, _mm256_add_pd(_mm256_loadu_pd(crow + 4), acc_hi[r]));
    }
    return;
  }
  alignas(32) double tile[kNr];
  for (int r = 0; r < MR; ++r) {
    _mm256_store_pd(tile, acc_lo[r]);
    _mm256_store_pd(tile + 4, acc_hi[r]);
    double* crow = c + r * ldc;
    for (std::size_t j = 0; j < width; ++j) crow[j] += tile[j];
  }
}

}  // namespace

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc, double* pack) {
  for (std::size_t j0 = 0; j0 < n; j0 += kNr) {
    const std::size_t width = (n - j0 < kNr) ? n - j0 : kNr;
    pack_panel(k, b, ldb, j0, width, pack);
    std::size_t i = 0;
    for (; i + kMr <= m; i += kMr) micro_kernel<4>(k, a + i * lda, lda, pack, c + i * ldc + j0, ldc, width);
    switch (m - i) {
      case 3: micro_kernel<3>(k, a + i * lda, lda, pack, c + i * ldc + j0, ldc, width); break;
      case 2: micro_kernel<2>(k, a + i * lda, lda, pack, c + i * ldc + j0, ldc, width); break;
      case 1: micro_kernel<1>(k, a + i * lda, lda, pack, c + i * ldc + j0, ldc, width); break;
      default: break;
    }
  }
}

bool avx2_compiled() { return true; }

}  // namespace ialab::simd::detail

#else

namespace ialab::simd::detail {

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc, double* pack) {
  gemm_nn_scalar(m, n, k, a, lda, b, ldb, c, ldc, pack);
}

bool avx2_compiled() { return false; }

}  // namespace ialab::simd::detail

#endif
