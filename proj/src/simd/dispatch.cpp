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

#include <atomic>
#include <cstdlib>
#include <string>
#include <vector>

#include "ialab/error.hpp"
#include "ialab/simd/gemm.hpp"

namespace ialab::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return detail::avx2_compiled() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool cpu_has_avx512() {
#if defined(__x86_64__) || defined(__i386__)
  return detail::avx512_compiled() && __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return cpu_has_avx2();
    case Isa::Avx512: return cpu_has_avx512();
  }
  return false;
}

Isa initial_isa() {
  Isa best = detected_isa();
  if (const char* env = std::getenv("IALAB_ISA")) {
    const std::string want(env);
    Isa forced = best;
    if (want == "scalar") forced = Isa::Scalar;
    else if (want == "avx2") forced = Isa::Avx2;
    else if (want == "avx512") forced = Isa::Avx512;
    if (supported(forced)) best = forced;
  }
  return best;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

detail::GemmNN kernel_for(Isa isa) {
  switch (isa) {
    case Isa::Avx512: return detail::gemm_nn_avx512;
    case Isa::Avx2: return detail::gemm_nn_avx2;
    case Isa::Scalar: break;
  }
  return detail::gemm_nn_scalar;
}

struct Scratch {
  std::vector<double> pack;
  std::vector<double> a_t;
  std::vector<double> b_t;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// dst (cols x rows) = src^T
void transpose_into(ConstMatView src, std::vector<double>& dst) {
  dst.resize(src.rows * src.cols);
  for (std::size_t r = 0; r < src.rows; ++r)
    for (std::size_t c = 0; c < src.cols; ++c) dst[c * src.rows + r] = src.data[r * src.stride + c];
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Avx512: return "avx512";
  }
  return "unknown";
}

Isa detected_isa() {
  if (cpu_has_avx512()) return Isa::Avx512;
  if (cpu_has_avx2()) return Isa::Avx2;
  return Isa::Scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!supported(isa)) return false;
  active().store(isa, std::memory_order_relaxed);
  return true;
}

void gemm_with(Isa isa, ConstMatView a, Op op_a, ConstMatView b, Op op_b, MatView c) {
  const std::size_t m = op_a == Op::None ? a.rows : a.cols;
  const std::size_t ka = op_a == Op::None ? a.cols : a.rows;
  const std::size_t kb = op_b == Op::None ? b.rows : b.cols;
  const std::size_t n = op_b == Op::None ? b.cols : b.rows;
  if (ka != kb || c.rows != m || c.cols != n)
    fail(ErrorCode::ShapeMismatch, "gemm: op(a) is " + std::to_string(m) + "x" + std::to_string(ka) +
                                       ", op(b) is " + std::to_string(kb) + "x" + std::to_string(n) +
                                       ", c is " + std::to_string(c.rows) + "x" + std::to_string(c.cols));
  if (m == 0 || n == 0 || ka == 0) return;
  if (!supported(isa)) isa = Isa::Scalar;

  Scratch& s = scratch();
  const double* a_ptr = a.data;
  std::size_t lda = a.stride;
  if (op_a == Op::Transpose) {
    transpose_into(a, s.a_t);
    a_ptr = s.a_t.data();
    lda = a.rows;
  }
  const double* b_ptr = b.data;
  std::size_t ldb = b.stride;
  if (op_b == Op::Transpose) {
    transpose_into(b, s.b_t);
    b_ptr = s.b_t.data();
    ldb = b.rows;
  }
  s.pack.resize(ka * 16);
  kernel_for(isa)(m, n, ka, a_ptr, lda, b_ptr, ldb, c.data, c.stride, s.pack.data());
}

void gemm(ConstMatView a, Op op_a, ConstMatView b, Op op_b, MatView c) {
  gemm_with(active_isa(), a, op_a, b, op_b, c);
}

}  // namespace ialab::simd
