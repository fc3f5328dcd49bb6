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


#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "ialab/autodiff.hpp"
#include "ialab/error.hpp"
#include "ialab/simd/gemm.hpp"

namespace ialab::ad {
namespace {

using simd::ConstMatView;
using simd::MatView;
using simd::Op;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + detail);
}

// Result node; keeps parents only when a gradient has to flow back.
std::shared_ptr<Node> make_node(Shape shape, std::vector<double> value, std::initializer_list<const Tensor*> inputs) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (!grad_enabled()) return node;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) node->requires_grad = true;
  if (node->requires_grad)
    for (const Tensor* t : inputs) node->parents.push_back(t->ptr());
  return node;
}

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (!grad_enabled()) return node;
  for (const Tensor& t : inputs)
    if (t.requires_grad()) node->requires_grad = true;
  if (node->requires_grad)
    for (const Tensor& t : inputs) node->parents.push_back(t.ptr());
  return node;
}

// Parent k's gradient buffer, or nullptr when it takes none.
double* grad_of(Node& self, std::size_t k) {
  Node& p = *self.parents[k];
  if (!p.requires_grad) return nullptr;
  p.ensure_grad();
  return p.grad.data();
}

ConstMatView cview(const double* data, std::size_t rows, std::size_t cols) { return {data, rows, cols, cols}; }
MatView mview(double* data, std::size_t rows, std::size_t cols) { return {data, rows, cols, cols}; }

// outer x mid x inner decomposition around one axis.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t mid = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, int axis) {
  AxisSplit s;
  for (int k = 0; k < axis; ++k) s.outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(k)]);
  s.mid = static_cast<std::size_t>(shape[static_cast<std::size_t>(axis)]);
  for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < shape.size(); ++k)
    s.inner *= static_cast<std::size_t>(shape[k]);
  return s;
}

int normalize_axis(int axis, int rank, const char* op) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) shape_error(op, "axis out of range");
  return axis;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() == 3 && b.rank() == 3) {
    const int B = a.dim(0);
    const std::size_t M = static_cast<std::size_t>(a.dim(1));
    const std::size_t K = static_cast<std::size_t>(a.dim(2));
    const std::size_t N = static_cast<std::size_t>(b.dim(2));
    if (b.dim(0) != B || static_cast<std::size_t>(b.dim(1)) != K)
      shape_error("matmul", shape_str(a.shape()) + " x " + shape_str(b.shape()));
    std::vector<double> out(static_cast<std::size_t>(B) * M * N, 0.0);
    for (int n = 0; n < B; ++n) {
      const auto bn = static_cast<std::size_t>(n);
      simd::gemm(cview(a.value().data() + bn * M * K, M, K), Op::None, cview(b.value().data() + bn * K * N, K, N),
                 Op::None, mview(out.data() + bn * M * N, M, N));
    }
    auto node = make_node({B, a.dim(1), b.dim(2)}, std::move(out), {&a, &b});
    if (node->requires_grad)
      node->backward = [B, M, K, N](Node& self) {
        const double* g = self.grad.data();
        const double* av = self.parents[0]->value.data();
        const double* bv = self.parents[1]->value.data();
        double* ga = grad_of(self, 0);
        double* gb = grad_of(self, 1);
        for (int n = 0; n < B; ++n) {
          const auto bn = static_cast<std::size_t>(n);
          if (ga)
            simd::gemm(cview(g + bn * M * N, M, N), Op::None, cview(bv + bn * K * N, K, N), Op::Transpose,
                       mview(ga + bn * M * K, M, K));
          if (gb)
            simd::gemm(cview(av + bn * M * K, M, K), Op::Transpose, cview(g + bn * M * N, M, N), Op::None,
                       mview(gb + bn * K * N, K, N));
        }
      };
    return Tensor(node);
  }
  if (b.rank() != 2 || a.rank() < 1) shape_error("matmul", shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t K = static_cast<std::size_t>(a.dim(-1));
  const std::size_t N = static_cast<std::size_t>(b.dim(1));
  if (static_cast<std::size_t>(b.dim(0)) != K)
    shape_error("matmul", shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t M = a.size() / K;
  std::vector<double> out(M * N, 0.0);
  simd::gemm(cview(a.value().data(), M, K), Op::None, cview(b.value().data(), K, N), Op::None,
             mview(out.data(), M, N));
  Shape shape = a.shape();
  shape.back() = static_cast<int>(N);
  auto node = make_node(std::move(shape), std::move(out), {&a, &b});
  if (node->requires_grad)
    node->backward = [M, K, N](Node& self) {
      const double* g = self.grad.data();
      if (double* ga = grad_of(self, 0))
        simd::gemm(cview(g, M, N), Op::None, cview(self.parents[1]->value.data(), K, N), Op::Transpose,
                   mview(ga, M, K));
      if (double* gb = grad_of(self, 1))
        simd::gemm(cview(self.parents[0]->value.data(), M, K), Op::Transpose, cview(g, M, N), Op::None,
                   mview(gb, K, N));
    };
  return Tensor(node);
}

namespace {

// Number of times b repeats inside a, or 0 when b is not a trailing suffix.
std::size_t broadcast_reps(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) return 0;
  for (std::size_t k = 0; k < b.size(); ++k)
    if (b[b.size() - 1 - k] != a[a.size() - 1 - k]) return 0;
  return numel(a) / numel(b);
}

Tensor add_scaled(const Tensor& a, const Tensor& b, double sb, const char* op) {
  const std::size_t reps = broadcast_reps(a.shape(), b.shape());
  if (reps == 0) shape_error(op, shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const std::size_t nb = b.size();
  std::vector<double> out(a.value());
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t k = 0; k < nb; ++k) out[r * nb + k] += sb * b.value()[k];
  auto node = make_node(a.shape(), std::move(out), {&a, &b});
  if (node->requires_grad)
    node->backward = [reps, nb, sb](Node& self) {
      const std::vector<double>& g = self.grad;
      if (double* ga = grad_of(self, 0))
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
      if (double* gb = grad_of(self, 1))
        for (std::size_t r = 0; r < reps; ++r)
          for (std::size_t k = 0; k < nb; ++k) gb[k] += sb * g[r * nb + k];
    };
  return Tensor(node);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_scaled(a, b, 1.0, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_scaled(a, b, -1.0, "sub"); }

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.value());
  for (double& v : out) v *= s;
  auto node = make_node(a.shape(), std::move(out), {&a});
  if (node->requires_grad)
    node->backward = [s](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t k = 0; k < self.grad.size(); ++k) ga[k] += s * self.grad[k];
    };
  return Tensor(node);
}

Tensor tanh(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::tanh(a.value()[k]);
  auto node = make_node(a.shape(), std::move(out), {&a});
  if (node->requires_grad)
    node->backward = [](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t k = 0; k < self.grad.size(); ++k) {
        const double y = self.value[k];
        ga[k] += self.grad[k] * (1.0 - y * y);
      }
    };
  return Tensor(node);
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a.value()[k] > 0.0 ? a.value()[k] : 0.0;
  auto node = make_node(a.shape(), std::move(out), {&a});
  if (node->requires_grad)
    node->backward = [](Node& self) {
      double* ga = grad_of(self, 0);
      const double* x = self.parents[0]->value.data();
      for (std::size_t k = 0; k < self.grad.size(); ++k)
        if (x[k] > 0.0) ga[k] += self.grad[k];
    };
  return Tensor(node);
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t n = static_cast<std::size_t>(a.dim(-1));
  const std::size_t rows = a.size() / n;
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = a.value().data() + r * n;
    double* y = out.data() + r * n;
    double mx = x[0];
    for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, x[k]);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += (y[k] = std::exp(x[k] - mx));
    for (std::size_t k = 0; k < n; ++k) y[k] /= total;
  }
  auto node = make_node(a.shape(), std::move(out), {&a});
  if (node->requires_grad)
    node->backward = [rows, n](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* y = self.value.data() + r * n;
        const double* g = self.grad.data() + r * n;
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += g[k] * y[k];
        for (std::size_t k = 0; k < n; ++k) ga[r * n + k] += y[k] * (g[k] - dot);
      }
    };
  return Tensor(node);
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t n = static_cast<std::size_t>(x.dim(-1));
  if (gain.size() != n || bias.size() != n)
    shape_error("layer_norm", "gain/bias must have " + std::to_string(n) + " entries");
  const std::size_t rows = x.size() / n;
  std::vector<double> out(x.size());
  std::vector<double> xhat(x.size());
  std::vector<double> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.value().data() + r * n;
    double mu = 0.0;
    for (std::size_t k = 0; k < n; ++k) mu += xr[k];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t k = 0; k < n; ++k) var += (xr[k] - mu) * (xr[k] - mu);
    var /= static_cast<double>(n);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t k = 0; k < n; ++k) {
      xhat[r * n + k] = (xr[k] - mu) * rstd[r];
      out[r * n + k] = gain.value()[k] * xhat[r * n + k] + bias.value()[k];
    }
  }
  auto node = make_node(x.shape(), std::move(out), {&x, &gain, &bias});
  if (node->requires_grad)
    node->backward = [rows, n, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
      const double* g = self.grad.data();
      const double* gamma = self.parents[1]->value.data();
      double* gx = grad_of(self, 0);
      double* gg = grad_of(self, 1);
      double* gb = grad_of(self, 2);
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gr = g + r * n;
        const double* xh = xhat.data() + r * n;
        if (gg)
          for (std::size_t k = 0; k < n; ++k) gg[k] += gr[k] * xh[k];
        if (gb)
          for (std::size_t k = 0; k < n; ++k) gb[k] += gr[k];
        if (gx) {
          double mean_d = 0.0;
          double mean_dx = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            const double d = gr[k] * gamma[k];
            mean_d += d;
            mean_dx += d * xh[k];
          }
          mean_d *= inv_n;
          mean_dx *= inv_n;
          for (std::size_t k = 0; k < n; ++k)
            gx[r * n + k] += rstd[r] * (gr[k] * gamma[k] - mean_d - xh[k] * mean_dx);
        }
      }
    };
  return Tensor(node);
}

Tensor conv1d_same(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 3 || w.rank() != 3 || w.dim(1) != x.dim(2) || b.size() != static_cast<std::size_t>(w.dim(2)))
    shape_error("conv1d_same", "x " + shape_str(x.shape()) + ", w " + shape_str(w.shape()) + ", b " +
                                   shape_str(b.shape()));
  const std::size_t B = static_cast<std::size_t>(x.dim(0));
  const std::size_t L = static_cast<std::size_t>(x.dim(1));
  const std::size_t cin = static_cast<std::size_t>(x.dim(2));
  const std::size_t k = static_cast<std::size_t>(w.dim(0));
  const std::size_t cout = static_cast<std::size_t>(w.dim(2));
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((k - 1) / 2);

  // Output rows [t0, t1) of each sequence see input rows shifted by q - pad.
  struct Tap {
    std::size_t t0, t1;
    std::ptrdiff_t shift;
  };
  std::vector<Tap> taps;
  for (std::size_t q = 0; q < k; ++q) {
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(q) - pad;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(L), static_cast<std::ptrdiff_t>(L) - shift);
    taps.push_back({static_cast<std::size_t>(std::max<std::ptrdiff_t>(lo, 0)),
                    static_cast<std::size_t>(std::max<std::ptrdiff_t>(hi, lo)), shift});
  }

  std::vector<double> out(B * L * cout);
  for (std::size_t r = 0; r < B * L; ++r)
    for (std::size_t c = 0; c < cout; ++c) out[r * cout + c] = b.value()[c];
  const double* xv = x.value().data();
  const double* wv = w.value().data();
  for (std::size_t q = 0; q < k; ++q) {
    const Tap& tap = taps[q];
    if (tap.t1 <= tap.t0) continue;
    if (tap.shift == 0) {
      simd::gemm(cview(xv, B * L, cin), Op::None, cview(wv + q * cin * cout, cin, cout), Op::None,
                 mview(out.data(), B * L, cout));
      continue;
    }
    const std::size_t rows = tap.t1 - tap.t0;
    for (std::size_t n = 0; n < B; ++n) {
      const std::size_t src = n * L + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(tap.t0) + tap.shift);
      simd::gemm(cview(xv + src * cin, rows, cin), Op::None, cview(wv + q * cin * cout, cin, cout), Op::None,
                 mview(out.data() + (n * L + tap.t0) * cout, rows, cout));
    }
  }
  auto node = make_node({x.dim(0), x.dim(1), w.dim(2)}, std::move(out), {&x, &w, &b});
  if (node->requires_grad)
    node->backward = [B, L, cin, k, cout, taps = std::move(taps)](Node& self) {
      const double* g = self.grad.data();
      const double* xv = self.parents[0]->value.data();
      const double* wv = self.parents[1]->value.data();
      double* gx = grad_of(self, 0);
      double* gw = grad_of(self, 1);
      double* gb = grad_of(self, 2);
      if (gb)
        for (std::size_t r = 0; r < B * L; ++r)
          for (std::size_t c = 0; c < cout; ++c) gb[c] += g[r * cout + c];
      for (std::size_t q = 0; q < k; ++q) {
        const Tap& tap = taps[q];
        if (tap.t1 <= tap.t0) continue;
        if (tap.shift == 0) {
          if (gx)
            simd::gemm(cview(g, B * L, cout), Op::None, cview(wv + q * cin * cout, cin, cout), Op::Transpose,
                       mview(gx, B * L, cin));
          if (gw)
            simd::gemm(cview(xv, B * L, cin), Op::Transpose, cview(g, B * L, cout), Op::None,
                       mview(gw + q * cin * cout, cin, cout));
          continue;
        }
        const std::size_t rows = tap.t1 - tap.t0;
        for (std::size_t n = 0; n < B; ++n) {
          const std::size_t src = n * L + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(tap.t0) + tap.shift);
          const double* gr = g + (n * L + tap.t0) * cout;
          if (gx)
            simd::gemm(cview(gr, rows, cout), Op::None, cview(wv + q * cin * cout, cin, cout), Op::Transpose,
                       mview(gx + src * cin, rows, cin));
          if (gw)
            simd::gemm(cview(xv + src * cin, rows, cin), Op::Transpose, cview(gr, rows, cout), Op::None,
                       mview(gw + q * cin * cout, cin, cout));
        }
      }
    };
  return Tensor(node);
}

Tensor transpose(const Tensor& a) {
  if (a.rank() < 2) shape_error("transpose", "needs rank >= 2, got " + shape_str(a.shape()));
  const std::size_t R = static_cast<std::size_t>(a.dim(-2));
  const std::size_t C = static_cast<std::size_t>(a.dim(-1));
  const std::size_t batch = a.size() / (R * C);
  std::vector<double> out(a.size());
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) out[n * R * C + c * R + r] = a.value()[n * R * C + r * C + c];
  Shape shape = a.shape();
  std::swap(shape[shape.size() - 1], shape[shape.size() - 2]);
  auto node = make_node(std::move(shape), std::move(out), {&a});
  if (node->requires_grad)
    node->backward = [batch, R, C](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t c = 0; c < C; ++c) ga[n * R * C + r * C + c] += self.grad[n * R * C + c * R + r];
    };
  return Tensor(node);
}

Tensor slice(const Tensor& a, int axis, int begin, int end) {
  axis = normalize_axis(axis, a.rank(), "slice");
  if (begin < 0 || end > a.dim(axis) || begin >= end)
    shape_error("slice", "range [" + std::to_string(begin) + "," + std::to_string(end) + ") on " + shape_str(a.shape()));
  const AxisSplit s = split_at(a.shape(), axis);
  const std::size_t width = static_cast<std::size_t>(end - begin);
  const std::size_t off = static_cast<std::size_t>(begin);
  std::vector<double> out(s.outer * width * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o)
    std::copy_n(a.value().data() + (o * s.mid + off) * s.inner, width * s.inner, out.data() + o * width * s.inner);
  Shape shape = a.shape();
  shape[static_cast<std::size_t>(axis)] = end - begin;
  auto node = make_node(std::move(shape), std::move(out), {&a});
  if (node->requires_grad)
    node->backward = [s, width, off](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t o = 0; o < s.outer; ++o) {
        const double* g = self.grad.data() + o * width * s.inner;
        double* dst = ga + (o * s.mid + off) * s.inner;
        for (std::size_t k = 0; k < width * s.inner; ++k) dst[k] += g[k];
      }
    };
  return Tensor(node);
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) shape_error("concat", "no inputs");
  axis = normalize_axis(axis, parts.front().rank(), "concat");
  Shape shape = parts.front().shape();
  int total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != static_cast<int>(shape.size())) shape_error("concat", "rank mismatch");
    for (std::size_t k = 0; k < shape.size(); ++k)
      if (static_cast<int>(k) != axis && p.shape()[k] != shape[k])
        shape_error("concat", shape_str(p.shape()) + " vs " + shape_str(shape));
    total += p.dim(axis);
  }
  shape[static_cast<std::size_t>(axis)] = total;
  const AxisSplit s = split_at(shape, axis);
  std::vector<double> out(numel(shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(off);
    const std::size_t w = static_cast<std::size_t>(p.dim(axis));
    for (std::size_t o = 0; o < s.outer; ++o)
      std::copy_n(p.value().data() + o * w * s.inner, w * s.inner, out.data() + (o * s.mid + off) * s.inner);
    off += w;
  }
  auto node = make_node(std::move(shape), std::move(out), parts);
  if (node->requires_grad) {
    std::vector<std::size_t> widths;
    for (const Tensor& p : parts) widths.push_back(static_cast<std::size_t>(p.dim(axis)));
    node->backward = [s, offsets = std::move(offsets), widths = std::move(widths)](Node& self) {
      for (std::size_t k = 0; k < widths.size(); ++k) {
        double* gp = grad_of(self, k);
        if (!gp) continue;
        for (std::size_t o = 0; o < s.outer; ++o) {
          const double* g = self.grad.data() + (o * s.mid + offsets[k]) * s.inner;
          double* dst = gp + o * widths[k] * s.inner;
          for (std::size_t e = 0; e < widths[k] * s.inner; ++e) dst[e] += g[e];
        }
      }
    };
  }
  return Tensor(node);
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size()) shape_error("reshape", shape_str(a.shape()) + " to " + shape_str(shape));
  auto node = make_node(std::move(shape), a.value(), {&a});
  if (node->requires_grad)
    node->backward = [](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t k = 0; k < self.grad.size(); ++k) ga[k] += self.grad[k];
    };
  return Tensor(node);
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.value()) total += v;
  auto node = make_node({1}, {total}, {&a});
  if (node->requires_grad)
    node->backward = [](Node& self) {
      double* ga = grad_of(self, 0);
      const std::size_t n = self.parents[0]->value.size();
      for (std::size_t k = 0; k < n; ++k) ga[k] += self.grad[0];
    };
  return Tensor(node);
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor mse(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) shape_error("mse", shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const double inv_n = 1.0 / static_cast<double>(a.size());
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double e = a.value()[k] - b.value()[k];
    total += e * e;
  }
  auto node = make_node({1}, {total * inv_n}, {&a, &b});
  if (node->requires_grad)
    node->backward = [inv_n](Node& self) {
      const double* av = self.parents[0]->value.data();
      const double* bv = self.parents[1]->value.data();
      const std::size_t n = self.parents[0]->value.size();
      const double g = 2.0 * inv_n * self.grad[0];
      double* ga = grad_of(self, 0);
      double* gb = grad_of(self, 1);
      for (std::size_t k = 0; k < n; ++k) {
        const double e = g * (av[k] - bv[k]);
        if (ga) ga[k] += e;
        if (gb) gb[k] -= e;
      }
    };
  return Tensor(node);
}

Tensor weighted_sum(const Tensor& a, const std::vector<double>& w) {
  if (w.size() != a.size()) shape_error("weighted_sum", "weight count differs from " + shape_str(a.shape()));
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) total += w[k] * a.value()[k];
  auto node = make_node({1}, {total}, {&a});
  if (node->requires_grad)
    node->backward = [w](Node& self) {
      double* ga = grad_of(self, 0);
      for (std::size_t k = 0; k < w.size(); ++k) ga[k] += w[k] * self.grad[0];
    };
  return Tensor(node);
}

}  // namespace ialab::ad
