// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/ops.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {
namespace detail {

// Unrolls a batch of 1-d sequences into the patch matrix used by the GEMM
// formulation of convolution. x is [B, C, L]; col is [C*K, B*Lout] with
// col[c*K + k][b*Lout + l] = x[b, c, l*stride + k - pad] (zero outside).
template <typename S>
void im2col(const S* x, int b_n, int c_n, int l_in, int k_n, int stride,
            int pad, int l_out, S* col) {
  const std::size_t cols = static_cast<std::size_t>(b_n) *
                           static_cast<std::size_t>(l_out);
  for (int c = 0; c < c_n; ++c)
    for (int k = 0; k < k_n; ++k) {
      S* row = col + (static_cast<std::size_t>(c) * k_n + k) * cols;
      for (int b = 0; b < b_n; ++b) {
        const S* src = x + (static_cast<std::size_t>(b) * c_n + c) * l_in;
        S* dst = row + static_cast<std::size_t>(b) * l_out;
        for (int l = 0; l < l_out; ++l) {
          const int s = l * stride + k - pad;
          dst[l] = (s >= 0 && s < l_in) ? src[s] : S(0);
        }
      }
    }
}

// Adjoint of im2col: accumulates patch-matrix entries back onto the
// sequences they were read from.
template <typename S>
void col2im_add(const S* col, int b_n, int c_n, int l_in, int k_n, int stride,
                int pad, int l_out, S* x) {
  const std::size_t cols = static_cast<std::size_t>(b_n) *
                           static_cast<std::size_t>(l_out);
  for (int c = 0; c < c_n; ++c)
    for (int k = 0; k < k_n; ++k) {
      const S* row = col + (static_cast<std::size_t>(c) * k_n + k) * cols;
      for (int b = 0; b < b_n; ++b) {
        S* dst = x + (static_cast<std::size_t>(b) * c_n + c) * l_in;
        const S* src = row + static_cast<std::size_t>(b) * l_out;
        for (int l = 0; l < l_out; ++l) {
          const int s = l * stride + k - pad;
          if (s >= 0 && s < l_in) dst[s] += src[l];
        }
      }
    }
}

// [B, C, L] tensor data <-> [C, B*L] matrix (channel-major for GEMM).
template <typename S>
void gather_cm(const S* x, int b_n, int c_n, int l_n, S* m) {
  for (int c = 0; c < c_n; ++c)
    for (int b = 0; b < b_n; ++b)
      std::copy(x + (static_cast<std::size_t>(b) * c_n + c) * l_n,
                x + (static_cast<std::size_t>(b) * c_n + c + 1) * l_n,
                m + (static_cast<std::size_t>(c) * b_n + b) * l_n);
}
template <typename S>
void scatter_cm_add(const S* m, int b_n, int c_n, int l_n, S* x) {
  for (int c = 0; c < c_n; ++c)
    for (int b = 0; b < b_n; ++b) {
      const S* src = m + (static_cast<std::size_t>(c) * b_n + b) * l_n;
      S* dst = x + (static_cast<std::size_t>(b) * c_n + c) * l_n;
      for (int l = 0; l < l_n; ++l) dst[l] += src[l];
    }
}

struct ConvGeom {
  int b_n, c_in, l_in, c_out, k_n, stride, pad, l_out;
  bool had_batch;  // rank-2 input was promoted to batch size 1
};

template <typename S>
ConvGeom conv_geometry(const Tensor<S>& input, const Tensor<S>& weight,
                       const Tensor<S>& bias, int stride, int padding,
                       bool transposed) {
  if (stride < 1) throw ParamError("conv1d: stride must be >= 1");
  if (padding < 0) throw ParamError("conv1d: padding must be >= 0");
  if (input.rank() != 2 && input.rank() != 3)
    throw ShapeError("conv1d: input must be [C, L] or [B, C, L]");
  if (weight.rank() != 3) throw ShapeError("conv1d: weight must be rank-3");
  ConvGeom g{};
  g.had_batch = input.rank() == 3;
  g.b_n = g.had_batch ? input.dim(0) : 1;
  g.c_in = input.dim(g.had_batch ? 1 : 0);
  g.l_in = input.dim(g.had_batch ? 2 : 1);
  g.k_n = weight.dim(2);
  g.stride = stride;
  g.pad = padding;
  if (transposed) {
    // Weight layout matches the forward convolution it is adjoint to:
    // [C_in_here, C_out_here, K].
    if (weight.dim(0) != g.c_in)
      throw ShapeError("tconv1d: weight leading extent must match channels");
    g.c_out = weight.dim(1);
    g.l_out = (g.l_in - 1) * stride - 2 * padding + g.k_n;
    if (g.l_out < 1)
      throw ShapeError("tconv1d: output length would be non-positive");
  } else {
    if (weight.dim(1) != g.c_in)
      throw ShapeError("conv1d: weight channel extent must match input");
    g.c_out = weight.dim(0);
    g.l_out = (g.l_in + 2 * padding - g.k_n) / stride + 1;
    if (g.l_in + 2 * padding < g.k_n || g.l_out < 1)
      throw ShapeError("conv1d: output length would be non-positive");
  }
  if (bias.defined()) {
    if (bias.rank() != 1 || bias.dim(0) != g.c_out)
      throw ShapeError("conv1d: bias must be [out_channels]");
  }
  return g;
}

}  // namespace detail

// 1-d convolution over the last axis. input [B, Cin, L] (or [Cin, L]),
// weight [Cout, Cin, K], bias [Cout]; output [B, Cout, L'] with
// L' = floor((L + 2*padding - K) / stride) + 1. Implemented as an im2col
// patch matrix times the flattened weight (one GEMM per call).
template <typename S>
Tensor<S> conv1d(const Tensor<S>& input, const Tensor<S>& weight,
                 const Tensor<S>& bias, int stride = 1, int padding = 0) {
  const auto g =
      detail::conv_geometry(input, weight, bias, stride, padding, false);
  const std::size_t cols = static_cast<std::size_t>(g.b_n) *
                           static_cast<std::size_t>(g.l_out);
  const int ck = g.c_in * g.k_n;
  std::vector<S> col(static_cast<std::size_t>(ck) * cols);
  detail::im2col(input.data().data(), g.b_n, g.c_in, g.l_in, g.k_n, g.stride,
                 g.pad, g.l_out, col.data());
  std::vector<S> ymat(static_cast<std::size_t>(g.c_out) * cols);
  MatMap<S>(ymat.data(), g.c_out, static_cast<Eigen::Index>(cols))
      .noalias() =
      ConstMatMap<S>(weight.data().data(), g.c_out, ck) *
      ConstMatMap<S>(col.data(), ck, static_cast<Eigen::Index>(cols));
  if (bias.defined())
    for (int c = 0; c < g.c_out; ++c) {
      S* row = ymat.data() + static_cast<std::size_t>(c) * cols;
      const S b = bias.data()[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < cols; ++i) row[i] += b;
    }
  std::vector<int> osh = g.had_batch
                             ? std::vector<int>{g.b_n, g.c_out, g.l_out}
                             : std::vector<int>{g.c_out, g.l_out};
  auto out = Tensor<S>::zeros(osh);
  // ymat is [Cout, B*Lout]; the tensor wants [B, Cout, Lout].
  for (int b = 0; b < g.b_n; ++b)
    for (int c = 0; c < g.c_out; ++c)
      std::copy(ymat.data() + (static_cast<std::size_t>(c) * g.b_n + b) *
                                  g.l_out,
                ymat.data() + (static_cast<std::size_t>(c) * g.b_n + b + 1) *
                                  g.l_out,
                out.data().data() +
                    (static_cast<std::size_t>(b) * g.c_out + c) * g.l_out);
  std::vector<Tensor<S>> parents = {input, weight};
  if (bias.defined()) parents.push_back(bias);
  record_op(out, parents,
            [xi = input.impl(), wi = weight.impl(),
             bi = bias.defined() ? bias.impl() : nullptr, oo = out.raw(),
             g] {
              const std::size_t cols = static_cast<std::size_t>(g.b_n) *
                                       static_cast<std::size_t>(g.l_out);
              const int ck = g.c_in * g.k_n;
              // Output grad back to the GEMM layout [Cout, B*Lout].
              std::vector<S> gy(static_cast<std::size_t>(g.c_out) * cols);
              for (int b = 0; b < g.b_n; ++b)
                for (int c = 0; c < g.c_out; ++c)
                  std::copy(
                      oo->grad.data() +
                          (static_cast<std::size_t>(b) * g.c_out + c) *
                              g.l_out,
                      oo->grad.data() +
                          (static_cast<std::size_t>(b) * g.c_out + c + 1) *
                              g.l_out,
                      gy.data() +
                          (static_cast<std::size_t>(c) * g.b_n + b) *
                              g.l_out);
              ConstMatMap<S> gym(gy.data(), g.c_out,
                                 static_cast<Eigen::Index>(cols));
              if (bi && bi->requires_grad) {
                bi->ensure_grad();
                for (int c = 0; c < g.c_out; ++c)
                  bi->grad[static_cast<std::size_t>(c)] +=
                      gym.row(c).sum();
              }
              if (wi->requires_grad) {
                // The patch matrix is recomputed rather than kept alive;
                // it is the largest buffer in the op.
                std::vector<S> col(static_cast<std::size_t>(ck) * cols);
                detail::im2col(xi->data.data(), g.b_n, g.c_in, g.l_in, g.k_n,
                               g.stride, g.pad, g.l_out, col.data());
                wi->ensure_grad();
                MatMap<S>(wi->grad.data(), g.c_out, ck).noalias() +=
                    gym * ConstMatMap<S>(col.data(), ck,
                                         static_cast<Eigen::Index>(cols))
                              .transpose();
              }
              if (xi->requires_grad) {
                std::vector<S> gcol(static_cast<std::size_t>(ck) * cols);
                MatMap<S>(gcol.data(), ck, static_cast<Eigen::Index>(cols))
                    .noalias() =
                    ConstMatMap<S>(wi->data.data(), g.c_out, ck)
                        .transpose() *
                    gym;
                xi->ensure_grad();
                detail::col2im_add(gcol.data(), g.b_n, g.c_in, g.l_in, g.k_n,
                                   g.stride, g.pad, g.l_out,
                                   xi->grad.data());
              }
            });
  return out;
}

// Transposed 1-d convolution: the exact adjoint of conv1d in its data
// argument. input [B, Cin, L] (or [Cin, L]), weight [Cin, Cout, K] — the
// same layout a conv1d mapping Cout -> Cin would use, so forwarding through
// tconv1d equals back-propagating data through that conv1d. Output length is
// (L-1)*stride - 2*padding + K; bias is added per output channel.
template <typename S>
Tensor<S> tconv1d(const Tensor<S>& input, const Tensor<S>& weight,
                  const Tensor<S>& bias, int stride = 1, int padding = 0) {
  const auto g =
      detail::conv_geometry(input, weight, bias, stride, padding, true);
  // Names below follow the adjoint convolution: its input length is our
  // output length, its output positions are our input positions.
  const std::size_t cols = static_cast<std::size_t>(g.b_n) *
                           static_cast<std::size_t>(g.l_in);
  const int ck = g.c_out * g.k_n;
  std::vector<S> xmat(static_cast<std::size_t>(g.c_in) * cols);
  detail::gather_cm(input.data().data(), g.b_n, g.c_in, g.l_in, xmat.data());
  std::vector<S> colv(static_cast<std::size_t>(ck) * cols);
  MatMap<S>(colv.data(), ck, static_cast<Eigen::Index>(cols)).noalias() =
      ConstMatMap<S>(weight.data().data(), g.c_in, ck).transpose() *
      ConstMatMap<S>(xmat.data(), g.c_in, static_cast<Eigen::Index>(cols));
  std::vector<int> osh = g.had_batch
                             ? std::vector<int>{g.b_n, g.c_out, g.l_out}
                             : std::vector<int>{g.c_out, g.l_out};
  auto out = Tensor<S>::zeros(osh);
  detail::col2im_add(colv.data(), g.b_n, g.c_out, g.l_out, g.k_n, g.stride,
                     g.pad, g.l_in, out.data().data());
  if (bias.defined())
    for (int b = 0; b < g.b_n; ++b)
      for (int c = 0; c < g.c_out; ++c) {
        S* row = out.data().data() +
                 (static_cast<std::size_t>(b) * g.c_out + c) * g.l_out;
        const S bv = bias.data()[static_cast<std::size_t>(c)];
        for (int l = 0; l < g.l_out; ++l) row[l] += bv;
      }
  std::vector<Tensor<S>> parents = {input, weight};
  if (bias.defined()) parents.push_back(bias);
  record_op(out, parents,
            [xi = input.impl(), wi = weight.impl(),
             bi = bias.defined() ? bias.impl() : nullptr, oo = out.raw(),
             g] {
              const std::size_t cols = static_cast<std::size_t>(g.b_n) *
                                       static_cast<std::size_t>(g.l_in);
              const int ck = g.c_out * g.k_n;
              if (bi && bi->requires_grad) {
                bi->ensure_grad();
                for (int b = 0; b < g.b_n; ++b)
                  for (int c = 0; c < g.c_out; ++c) {
                    const S* row =
                        oo->grad.data() +
                        (static_cast<std::size_t>(b) * g.c_out + c) *
                            g.l_out;
                    double acc = 0;
                    for (int l = 0; l < g.l_out; ++l)
                      acc += static_cast<double>(row[l]);
                    bi->grad[static_cast<std::size_t>(c)] +=
                        static_cast<S>(acc);
                  }
              }
              // Patches of the output gradient, in adjoint-conv geometry.
              std::vector<S> gcol(static_cast<std::size_t>(ck) * cols);
              detail::im2col(oo->grad.data(), g.b_n, g.c_out, g.l_out, g.k_n,
                             g.stride, g.pad, g.l_in, gcol.data());
              ConstMatMap<S> gcm(gcol.data(), ck,
                                 static_cast<Eigen::Index>(cols));
              if (wi->requires_grad) {
                std::vector<S> xmat(static_cast<std::size_t>(g.c_in) * cols);
                detail::gather_cm(xi->data.data(), g.b_n, g.c_in, g.l_in,
                                  xmat.data());
                wi->ensure_grad();
                MatMap<S>(wi->grad.data(), g.c_in, ck).noalias() +=
                    ConstMatMap<S>(xmat.data(), g.c_in,
                                   static_cast<Eigen::Index>(cols)) *
                    gcm.transpose();
              }
              if (xi->requires_grad) {
                std::vector<S> gxm(static_cast<std::size_t>(g.c_in) * cols);
                MatMap<S>(gxm.data(), g.c_in,
                          static_cast<Eigen::Index>(cols))
                    .noalias() =
                    ConstMatMap<S>(wi->data.data(), g.c_in, ck) * gcm;
                xi->ensure_grad();
                detail::scatter_cm_add(gxm.data(), g.b_n, g.c_in, g.l_in,
                                       xi->grad.data());
              }
            });
  return out;
}

}  // namespace sts
