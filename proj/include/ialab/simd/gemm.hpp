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

// Dense real GEMM used by the autodiff engine. One scalar reference kernel
// plus AVX2/FMA and AVX-512 kernels; the widest one the CPU supports is
// picked at first use. IALAB_ISA=scalar|avx2|avx512 overrides the choice.

#pragma once

#include <cstddef>
#include <string_view>

namespace ialab::simd {

enum class Isa { Scalar, Avx2, Avx512 };

std::string_view isa_name(Isa isa);

/// Widest instruction set this CPU and build support.
Isa detected_isa();

/// Instruction set gemm() currently routes to.
Isa active_isa();

/// Force a kernel (tests, benchmarks). Returns false and leaves the active
/// kernel unchanged when the CPU cannot run the requested one.
bool set_active_isa(Isa isa);

/// Row-major view: element (r, c) lives at data[r * stride + c].
struct ConstMatView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;
};

struct MatView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;
};

enum class Op { None, Transpose };

/// c += op(a) * op(b). Shapes are checked; throws ialab::Error(ShapeMismatch).
void gemm(ConstMatView a, Op op_a, ConstMatView b, Op op_b, MatView c);

/// Same contract, always through the given kernel. Used by equivalence tests.
void gemm_with(Isa isa, ConstMatView a, Op op_a, ConstMatView b, Op op_b, MatView c);

namespace detail {

// c[m x n] += a[m x k] * b[k x n]; `pack` holds at least k * 16 doubles.
using GemmNN = void (*)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        std::size_t lda, const double* b, std::size_t ldb, double* c,
                        std::size_t ldc, double* pack);

void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a,
                    std::size_t lda, const double* b, std::size_t ldb, double* c,
                    std::size_t ldc, double* pack);
void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc, double* pack);
void gemm_nn_avx512(std::size_t m, std::size_t n, std::size_t k, const double* a,
                    std::size_t lda, const double* b, std::size_t ldb, double* c,
                    std::size_t ldc, double* pack);

bool avx2_compiled();
bool avx512_compiled();

}  // namespace detail
}  // namespace ialab::simd
