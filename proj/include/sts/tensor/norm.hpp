// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

// Instance normalization: each channel row is standardized over its own
// positions, then scaled and shifted by the learned per-channel gamma/beta.
//
//   y[c, i] = gamma[c] * (x[c, i] - mu_c) / sqrt(var_c + eps) + beta[c]
//
// input: [C, N] or [B, C, N]; statistics are per (batch, channel) row with
// the biased variance (divide by N). N must be at least 2 — a single
// position per row has no spread to normalize.
template <typename S>
Tensor<S> instance_norm(const Tensor<S>& input, const Tensor<S>& gamma,
                        const Tensor<S>& beta, S eps = S(1e-5)) {
  const bool had_batch = input.rank() == 3;
  if (!had_batch && input.rank() != 2)
    throw ShapeError("instance_norm: input must be [C, N] or [B, C, N]");
  const int b_n = had_batch ? input.dim(0) : 1;
  const int c_n = input.dim(had_batch ? 1 : 0);
  const int n_n = input.dim(had_batch ? 2 : 1);
  if (n_n < 2)
    throw ContractError(
        "instance_norm: needs at least 2 positions per channel");
  if (gamma.rank() != 1 || gamma.dim(0) != c_n || beta.rank() != 1 ||
      beta.dim(0) != c_n)
    throw ShapeError("instance_norm: gamma and beta must be [C]");

  auto out = Tensor<S>::zeros(input.shape());
  const std::size_t rows = static_cast<std::size_t>(b_n) * c_n;
  // Standardized values and inverse deviations are saved for backward.
  auto xhat = std::make_shared<std::vector<S>>(input.size());
  auto istd = std::make_shared<std::vector<S>>(rows);
  for (std::size_t rc = 0; rc < rows; ++rc) {
    const int c = static_cast<int>(rc % static_cast<std::size_t>(c_n));
    const S* x = input.data().data() + rc * n_n;
    S* xh = xhat->data() + rc * n_n;
    S* y = out.data().data() + rc * n_n;
    double mu = 0;
    for (int i = 0; i < n_n; ++i) mu += static_cast<double>(x[i]);
    mu /= n_n;
    double var = 0;
    for (int i = 0; i < n_n; ++i) {
      const double d = static_cast<double>(x[i]) - mu;
      var += d * d;
    }
    var /= n_n;
    const S is = static_cast<S>(
        1.0 / std::sqrt(var + static_cast<double>(eps)));
    (*istd)[rc] = is;
    const S g = gamma.data()[static_cast<std::size_t>(c)];
    const S b = beta.data()[static_cast<std::size_t>(c)];
    for (int i = 0; i < n_n; ++i) {
      xh[i] = (x[i] - static_cast<S>(mu)) * is;
      y[i] = g * xh[i] + b;
    }
  }
  record_op(
      out, {input, gamma, beta},
      [xi = input.impl(), gi = gamma.impl(), bi = beta.impl(),
       oo = out.raw(), xhat, istd, b_n, c_n, n_n] {
        const std::size_t rows = static_cast<std::size_t>(b_n) * c_n;
        for (std::size_t rc = 0; rc < rows; ++rc) {
          const int c = static_cast<int>(rc % static_cast<std::size_t>(c_n));
          const S* g = oo->grad.data() + rc * n_n;
          const S* xh = xhat->data() + rc * n_n;
          double sum_g = 0, sum_gx = 0;
          for (int i = 0; i < n_n; ++i) {
            sum_g += static_cast<double>(g[i]);
            sum_gx += static_cast<double>(g[i]) * xh[i];
          }
          if (bi->requires_grad) {
            bi->ensure_grad();
            bi->grad[static_cast<std::size_t>(c)] += static_cast<S>(sum_g);
          }
          if (gi->requires_grad) {
            gi->ensure_grad();
            gi->grad[static_cast<std::size_t>(c)] += static_cast<S>(sum_gx);
          }
          if (xi->requires_grad) {
            xi->ensure_grad();
            S* gx = xi->grad.data() + rc * n_n;
            const S gam = gi->data[static_cast<std::size_t>(c)];
            const S is = (*istd)[rc];
            const S mg = static_cast<S>(sum_g / n_n);
            const S mgx = static_cast<S>(sum_gx / n_n);
            for (int i = 0; i < n_n; ++i)
              gx[i] += gam * is * (g[i] - mg - xh[i] * mgx);
          }
        }
      });
  return out;
}

}  // namespace sts
