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

// Built with -mavx512f -mfma. Same no-std-template rule as gemm_avx2.cpp.

#include "ialab/simd/gemm.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>

namespace ialab::simd::detail {
namespace {

constexpr std::size_t kNr = 16;  // two zmm registers per row
constexpr std::size_t kMr = 6;

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
  __m512d acc_lo[MR];
  __m512d acc_hi[MR];
  for (int r = 0; r < MR; ++r) {
    acc_lo[r] = _mm512_setzero_pd();
    acc_hi[r] = _mm512_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m512d b_lo = _mm512_loadu_pd(pack + p * kNr);
    const __m512d b_hi = _mm512_loadu_pd(pack + p * kNr + 8);
    for (int r = 0; r < MR; ++r) {
      const __m512d av = _mm512_set1_pd(a[r * lda + p]);
      acc_lo[r] = _mm512_fmadd_pd(av, b_lo, acc_lo[r]);
      acc_hi[r] = _mm512_fmadd_pd(av, b_hi, acc_hi[r]);
    }
  }
  if (width == kNr) {
    for (int r = 0; r < MR; ++r) {
      double* crow = c + r * ldc;
      _mm512_storeu_pd(crow, _mm512_add_pd(_mm512_loadu_pd(crow), acc_lo[r]));
      _mm512_storeu_pd(crow + 8, _mm512_add_pd(_mm512_loadu_pd(crow + 8), acc_hi[r]));
    }
    return;
  }
  const __mmask8 lo_mask = static_cast<__mmask8>(width >= 8 ? 0xFF : (1u << width) - 1u);
  const __mmask8 hi_mask = static_cast<__mmask8>(width <= 8 ? 0 : (1u << (width - 8)) - 1u);
  for (int r = 0; r < MR; ++r) {
    double* crow = c + r * ldc;
    const __m512d c_lo = _mm512_maskz_loadu_pd(lo_mask, crow);
    _mm512_mask_storeu_pd(crow, lo_mask, _mm512_add_pd(c_lo, acc_lo[r]));
    if (hi_mask) {
      const __m512d c_hi = _mm512_maskz_loadu_pd(hi_mask, crow + 8);
      _mm512_mask_storeu_pd(crow + 8, hi_mask, _mm512_add_pd(c_hi, acc_hi[r]));
    }
  }
}

}  // namespace

void gemm_nn_avx512(std::size_t m, std::size_t n, std::size_t k, const double* a,
                    std::size_t lda, const double* b, std::size_t ldb, double* c,
                    std::size_t ldc, double* pack) {
  for (std::size_t j0 = 0; j0 < n; j0 += kNr) {
    const std::size_t width = (n - j0 < kNr) ? n - j0 : kNr;
    pack_panel(k, b, ldb, j0, width, pack);
    std::size_t i = 0;
    for (; i + kMr <= m; i += kMr) micro_kernel<6>(k, a + i * lda, lda, pack, c + i * ldc + j0, ldc, width);
    double* ct = c + i * ldc + j0;
    const double* at = a + i * lda;
    switch (m - i) {
      case 5: micro_kernel<5>(k, at, lda, pack, ct, ldc, width); break;
      case 4: micro_kernel<4>(k, at, lda, pack, ct, ldc, width); break;
      case 3: micro_kernel<3>(k, at, lda, pack, ct, ldc, width); break;
      case 2: micro_kernel<2>(k, at, lda, pack, ct, ldc, width); break;
      case 1: micro_kernel<1>(k, at, lda, pack, ct, ldc, width); break;
      default: break;
    }
  }
}

bool avx512_compiled() { return true; }

}  // namespace ialab::simd::detail

#else

namespace ialab::simd::detail {

void gemm_nn_avx512(std::size_t m, std::size_t n, std::size_t k, const double* a,
                    std::size_t lda, const double* b, std::size_t ldb, double* c,
                    std::size_t ldc, double* pack) {
  gemm_nn_scalar(m, n, k, a, lda, b, ldb, c, ldc, pack);
}

bool avx512_compiled() { return false; }

}  // namespace ialab::simd::detail

#endif
