// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/ops.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {
namespace detail {

// Forward state kept for backpropagation through time.
template <typename S>
struct GruSaved {
  std::vector<S> z, r, n, gn, h;  // each [B, T, H]
};

}  // namespace detail

// Gated recurrent unit over the time axis, fused across all steps.
//
//   z_t = sigmoid(W_z x_t + b_iz + U_z h_{t-1} + b_hz)      (update gate)
//   r_t = sigmoid(W_r x_t + b_ir + U_r h_{t-1} + b_hr)      (reset gate)
//   n_t = tanh  (W_n x_t + b_in + r_t (.) (U_n h_{t-1} + b_hn))
//   h_t = (1 - z_t) (.) n_t + z_t (.) h_{t-1}
//
// input: [T, C] or [B, T, C]. w_ih: [3H, C], w_hh: [3H, H], b_ih/b_hh: [3H];
// gate blocks are packed in (update, reset, candidate) order. state0 may be
// undefined (zeros), [H] (shared across the batch), or [B, H]. Output is
// [T, H] / [B, T, H]. The whole sequence backward (BPTT) runs in one op so
// per-step graph nodes are never materialized.
template <typename S>
Tensor<S> gru(const Tensor<S>& input, const Tensor<S>& w_ih,
              const Tensor<S>& w_hh, const Tensor<S>& b_ih,
              const Tensor<S>& b_hh, const Tensor<S>& state0 = {}) {
  const bool had_batch = input.rank() == 3;
  if (!had_batch && input.rank() != 2)
    throw ShapeError("gru: input must be [T, C] or [B, T, C]");
  const int b_n = had_batch ? input.dim(0) : 1;
  const int t_n = input.dim(had_batch ? 1 : 0);
  const int c_n = input.dim(had_batch ? 2 : 1);
  if (w_hh.rank() != 2 || w_hh.dim(0) % 3 != 0 ||
      w_hh.dim(0) != 3 * w_hh.dim(1))
    throw ShapeError("gru: recurrent weight must be [3H, H]");
  const int h_n = w_hh.dim(1);
  if (w_ih.rank() != 2 || w_ih.dim(0) != 3 * h_n || w_ih.dim(1) != c_n)
    throw ShapeError("gru: input weight must be [3H, C]");
  if (b_ih.rank() != 1 || b_ih.dim(0) != 3 * h_n || b_hh.rank() != 1 ||
      b_hh.dim(0) != 3 * h_n)
    throw ShapeError("gru: biases must be [3H]");
  const bool has_state = state0.defined();
  if (has_state) {
    const bool ok1 = state0.rank() == 1 && state0.dim(0) == h_n;
    const bool ok2 = state0.rank() == 2 && state0.dim(0) == b_n &&
                     state0.dim(1) == h_n;
    if (!ok1 && !ok2)
      throw ShapeError("gru: initial state must be [H] or [B, H]");
  }

  const std::size_t bh = static_cast<std::size_t>(b_n) * h_n;
  const std::size_t bth = bh * static_cast<std::size_t>(t_n);
  auto saved = std::make_shared<detail::GruSaved<S>>();
  saved->z.resize(bth);
  saved->r.resize(bth);
  saved->n.resize(bth);
  saved->gn.resize(bth);
  saved->h.resize(bth);

  // Initial hidden state, expanded to [B, H].
  std::vector<S> h_prev(bh, S(0));
  if (has_state) {
    if (state0.rank() == 1)
      for (int b = 0; b < b_n; ++b)
        std::copy(state0.data().begin(), state0.data().end(),
                  h_prev.begin() + static_cast<std::size_t>(b) * h_n);
    else
      h_prev = state0.data();
  }

  std::vector<int> osh = had_batch ? std::vector<int>{b_n, t_n, h_n}
                                   : std::vector<int>{t_n, h_n};
  auto out = Tensor<S>::zeros(osh);

  // Per-step GEMMs over the whole batch: A = x_t W^T + b_ih,
  // G = h_{t-1} U^T + b_hh, both [B, 3H].
  std::vector<S> xt(static_cast<std::size_t>(b_n) * c_n);
  std::vector<S> a(static_cast<std::size_t>(b_n) * 3 * h_n);
  std::vector<S> gmat(static_cast<std::size_t>(b_n) * 3 * h_n);
  ConstMatMap<S> wim(w_ih.data().data(), 3 * h_n, c_n);
  ConstMatMap<S> whm(w_hh.data().data(), 3 * h_n, h_n);
  for (int t = 0; t < t_n; ++t) {
    for (int b = 0; b < b_n; ++b)
      std::copy(input.data().data() +
                    (static_cast<std::size_t>(b) * t_n + t) * c_n,
                input.data().data() +
                    (static_cast<std::size_t>(b) * t_n + t + 1) * c_n,
                xt.data() + static_cast<std::size_t>(b) * c_n);
    MatMap<S>(a.data(), b_n, 3 * h_n).noalias() =
        ConstMatMap<S>(xt.data(), b_n, c_n) * wim.transpose();
    MatMap<S>(gmat.data(), b_n, 3 * h_n).noalias() =
        ConstMatMap<S>(h_prev.data(), b_n, h_n) * whm.transpose();
    for (int b = 0; b < b_n; ++b) {
      const S* ab = a.data() + static_cast<std::size_t>(b) * 3 * h_n;
      const S* gb = gmat.data() + static_cast<std::size_t>(b) * 3 * h_n;
      const S* bi = b_ih.data().data();
      const S* bhv = b_hh.data().data();
      S* hp = h_prev.data() + static_cast<std::size_t>(b) * h_n;
      const std::size_t at =
          (static_cast<std::size_t>(b) * t_n + t) * h_n;
      for (int i = 0; i < h_n; ++i) {
        const S z =
            S(1) / (S(1) + std::exp(-(ab[i] + bi[i] + gb[i] + bhv[i])));
        const S r = S(1) / (S(1) + std::exp(-(ab[h_n + i] + bi[h_n + i] +
                                              gb[h_n + i] + bhv[h_n + i])));
        const S gn = gb[2 * h_n + i] + bhv[2 * h_n + i];
        const S n =
            std::tanh(ab[2 * h_n + i] + bi[2 * h_n + i] + r * gn);
        const S h = (S(1) - z) * n + z * hp[i];
        saved->z[at + i] = z;
        saved->r[at + i] = r;
        saved->n[at + i] = n;
        saved->gn[at + i] = gn;
        saved->h[at + i] = h;
        hp[i] = h;
        out.data()[at + i] = h;
      }
    }
  }

  std::vector<Tensor<S>> parents = {input, w_ih, w_hh, b_ih, b_hh};
  if (has_state) parents.push_back(state0);
  record_op(
      out, parents,
      [xi = input.impl(), wii = w_ih.impl(), whi = w_hh.impl(),
       bii = b_ih.impl(), bhi = b_hh.impl(),
       s0 = has_state ? state0.impl() : nullptr, oo = out.raw(), saved, b_n,
       t_n, c_n, h_n] {
        const std::size_t h3 = static_cast<std::size_t>(3) * h_n;
        // Running dL/dh_t per batch row; starts from the last step's output
        // gradient and picks up the recurrent terms walking backwards.
        std::vector<S> gh(static_cast<std::size_t>(b_n) * h_n, S(0));
        std::vector<S> d_ih(static_cast<std::size_t>(b_n) * h3);
        std::vector<S> d_hh(static_cast<std::size_t>(b_n) * h3);
        std::vector<S> hprev(static_cast<std::size_t>(b_n) * h_n);
        std::vector<S> xt(static_cast<std::size_t>(b_n) * c_n);
        ConstMatMap<S> wim(wii->data.data(), 3 * h_n, c_n);
        ConstMatMap<S> whm(whi->data.data(), 3 * h_n, h_n);
        const bool need_x = xi->requires_grad;
        if (need_x) xi->ensure_grad();
        wii->ensure_grad();
        whi->ensure_grad();
        bii->ensure_grad();
        bhi->ensure_grad();
        for (int t = t_n - 1; t >= 0; --t) {
          // State feeding this step: previous output or the initial state.
          if (t > 0) {
            for (int b = 0; b < b_n; ++b) {
              const std::size_t prev =
                  (static_cast<std::size_t>(b) * t_n + t - 1) * h_n;
              std::copy(saved->h.begin() + prev,
                        saved->h.begin() + prev + h_n,
                        hprev.begin() + static_cast<std::size_t>(b) * h_n);
            }
          } else if (s0) {
            if (s0->shape.size() == 1)
              for (int b = 0; b < b_n; ++b)
                std::copy(s0->data.begin(), s0->data.end(),
                          hprev.begin() + static_cast<std::size_t>(b) * h_n);
            else
              hprev = s0->data;
          } else {
            std::fill(hprev.begin(), hprev.end(), S(0));
          }
          for (int b = 0; b < b_n; ++b) {
            const std::size_t at =
                (static_cast<std::size_t>(b) * t_n + t) * h_n;
            const S* hp = hprev.data() + static_cast<std::size_t>(b) * h_n;
            S* ghb = gh.data() + static_cast<std::size_t>(b) * h_n;
            S* dib = d_ih.data() + static_cast<std::size_t>(b) * h3;
            S* dhb = d_hh.data() + static_cast<std::size_t>(b) * h3;
            for (int i = 0; i < h_n; ++i) {
              const S go = oo->grad[at + i] + ghb[i];
              const S z = saved->z[at + i];
              const S r = saved->r[at + i];
              const S n = saved->n[at + i];
              const S gnv = saved->gn[at + i];
              const S dn = go * (S(1) - z);
              const S dz = go * (hp[i] - n);
              const S dan = dn * (S(1) - n * n);
              const S dr = dan * gnv;
              const S dgn = dan * r;
              const S daz = dz * z * (S(1) - z);
              const S dar = dr * r * (S(1) - r);
              dib[i] = daz;
              dib[h_n + i] = dar;
              dib[2 * h_n + i] = dan;
              dhb[i] = daz;
              dhb[h_n + i] = dar;
              dhb[2 * h_n + i] = dgn;
              // Direct path h_t = ... + z (.) h_{t-1}.
              ghb[i] = go * z;
            }
          }
          // Parameter and data gradients for this step, batched.
          ConstMatMap<S> dim(d_ih.data(), b_n, 3 * h_n);
          ConstMatMap<S> dhm(d_hh.data(), b_n, 3 * h_n);
          for (int b = 0; b < b_n; ++b)
            std::copy(xi->data.data() +
                          (static_cast<std::size_t>(b) * t_n + t) * c_n,
                      xi->data.data() +
                          (static_cast<std::size_t>(b) * t_n + t + 1) * c_n,
                      xt.data() + static_cast<std::size_t>(b) * c_n);
          MatMap<S>(wii->grad.data(), 3 * h_n, c_n).noalias() +=
              dim.transpose() * ConstMatMap<S>(xt.data(), b_n, c_n);
          MatMap<S>(whi->grad.data(), 3 * h_n, h_n).noalias() +=
              dhm.transpose() * ConstMatMap<S>(hprev.data(), b_n, h_n);
          for (int b = 0; b < b_n; ++b) {
            const S* dib = d_ih.data() + static_cast<std::size_t>(b) * h3;
            const S* dhb = d_hh.data() + static_cast<std::size_t>(b) * h3;
            for (std::size_t i = 0; i < h3; ++i) {
              bii->grad[i] += dib[i];
              bhi->grad[i] += dhb[i];
            }
          }
          if (need_x) {
            std::vector<S> gx(static_cast<std::size_t>(b_n) * c_n);
            MatMap<S>(gx.data(), b_n, c_n).noalias() = dim * wim;
            for (int b = 0; b < b_n; ++b) {
              S* dst = xi->grad.data() +
                       (static_cast<std::size_t>(b) * t_n + t) * c_n;
              const S* src = gx.data() + static_cast<std::size_t>(b) * c_n;
              for (int c = 0; c < c_n; ++c) dst[c] += src[c];
            }
          }
          // Recurrent path through the pre-activations.
          MatMap<S>(gh.data(), b_n, h_n).noalias() += dhm * whm;
        }
        if (s0 && s0->requires_grad) {
          s0->ensure_grad();
          if (s0->shape.size() == 1) {
            for (int b = 0; b < b_n; ++b)
              for (int i = 0; i < h_n; ++i)
                s0->grad[static_cast<std::size_t>(i)] +=
                    gh[static_cast<std::size_t>(b) * h_n + i];
          } else {
            for (std::size_t i = 0; i < gh.size(); ++i) s0->grad[i] += gh[i];
          }
        }
      });
  return out;
}

}  // namespace sts
