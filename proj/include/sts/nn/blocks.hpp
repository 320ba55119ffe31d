// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/conv.hpp"
#include "sts/tensor/gru.hpp"
#include "sts/tensor/norm.hpp"
#include "sts/tensor/ops.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

// Building blocks of the encoder/decoder. Feature maps are single-sample
// rank-3 tensors [channels, frequency, time]. Every block convolves along
// exactly one spatial axis — the other spatial axis is folded into the GEMM
// batch — so downsampling alternates between halving time and halving
// frequency while the fold keeps parameters shared across the other axis.

enum class Axis { Time, Frequency };

namespace detail {

// [C, F, T] -> [batch=other, C, axis] so conv1d runs along `axis`.
template <typename S>
Tensor<S> fold_to_axis(const Tensor<S>& x, Axis axis) {
  if (x.rank() != 3)
    throw ShapeError("block input must be [channels, frequency, time]");
  return axis == Axis::Time ? permute3(x, 1, 0, 2) : permute3(x, 2, 0, 1);
}

// Inverse of fold_to_axis once the channel count has changed.
template <typename S>
Tensor<S> unfold_from_axis(const Tensor<S>& y, Axis axis) {
  return axis == Axis::Time ? permute3(y, 1, 0, 2) : permute3(y, 1, 2, 0);
}

// Fan-in-scaled centered uniform init, one tensor per call; the caller's
// generator fixes the draw order, which makes initialization reproducible.
template <typename S>
Tensor<S> init_uniform(std::vector<int> shape, int fan_in,
                       std::mt19937& rng) {
  const S bound = static_cast<S>(1.0 / std::sqrt(static_cast<double>(
                                           fan_in > 0 ? fan_in : 1)));
  return Tensor<S>::uniform(std::move(shape), bound, rng);
}

}  // namespace detail

// Optional pre-block normalization shared by the down/up blocks: one
// instance norm over all positions of each channel.
template <typename S>
struct PreNorm {
  Tensor<S> gamma, beta;
  bool enabled() const { return gamma.defined(); }

  void init(int channels) {
    gamma = Tensor<S>::full({channels}, S(1));
    beta = Tensor<S>::zeros({channels});
  }
  Tensor<S> apply(const Tensor<S>& x) const {
    if (!enabled()) return x;
    auto flat = reshape(x, {x.dim(0), x.dim(1) * x.dim(2)});
    auto y = instance_norm(flat, gamma, beta);
    return reshape(y, x.shape());
  }
};

// Stride-2 convolution along one axis followed by ReLU; halves that axis
// (odd extents are right-padded by one zero first, so the result is always
// ceil(extent / 2)).
template <typename S>
struct DownBlock {
  Axis axis = Axis::Time;
  Tensor<S> weight, bias;  // [C_out, C_in, 4], [C_out]
  PreNorm<S> norm;
  static constexpr int kKernel = 4, kStride = 2, kPad = 1;

  void init(Axis a, int c_in, int c_out, bool pre_norm, std::mt19937& rng) {
    axis = a;
    weight = detail::init_uniform<S>({c_out, c_in, kKernel}, c_in * kKernel,
                                     rng);
    bias = detail::init_uniform<S>({c_out}, c_in * kKernel, rng);
    if (pre_norm) norm.init(c_in);
  }
};

template <typename S>
Tensor<S> down_block(const Tensor<S>& x, const DownBlock<S>& p) {
  auto folded = detail::fold_to_axis(p.norm.apply(x), p.axis);
  if (folded.dim(2) < 2)
    throw ShapeError("down_block: extent along the axis must be >= 2");
  if (folded.dim(2) % 2 != 0) folded = pad_axis(folded, 2, 0, 1);
  auto y = conv1d(folded, p.weight, p.bias, DownBlock<S>::kStride,
                  DownBlock<S>::kPad);
  return relu(detail::unfold_from_axis(y, p.axis));
}

// Stride-2 transposed convolution along one axis, cropped to the skip's
// extent when a skip is present (the doubling overshoots by one exactly when
// the matching down_block padded an odd input), then channel-concatenated
// with the skip and passed through ReLU.
template <typename S>
struct UpBlock {
  Axis axis = Axis::Time;
  Tensor<S> weight, bias;  // [C_in, C_out, 4], [C_out]
  PreNorm<S> norm;
  static constexpr int kKernel = 4, kStride = 2, kPad = 1;

  void init(Axis a, int c_in, int c_out, bool pre_norm, std::mt19937& rng) {
    axis = a;
    weight = detail::init_uniform<S>({c_in, c_out, kKernel}, c_in * kKernel,
                                     rng);
    bias = detail::init_uniform<S>({c_out}, c_in * kKernel, rng);
    if (pre_norm) norm.init(c_in);
  }
};

template <typename S>
Tensor<S> up_block(const Tensor<S>& x, const Tensor<S>& skip,
                   const UpBlock<S>& p) {
  auto folded = detail::fold_to_axis(p.norm.apply(x), p.axis);
  auto y = tconv1d(folded, p.weight, p.bias, UpBlock<S>::kStride,
                   UpBlock<S>::kPad);
  auto up = detail::unfold_from_axis(y, p.axis);
  if (!skip.defined()) return relu(up);
  if (skip.rank() != 3)
    throw ShapeError("up_block: skip must be [channels, frequency, time]");
  const int ax = p.axis == Axis::Frequency ? 1 : 2;
  const int have = up.dim(ax), want = skip.dim(ax);
  if (want > have || have - want > 1)
    throw ShapeError("up_block: skip extent differs beyond crop tolerance 1");
  if (want < have) up = slice(up, ax, 0, want);
  const int other = ax == 1 ? 2 : 1;
  if (skip.dim(other) != up.dim(other))
    throw ShapeError("up_block: skip mismatched off the upsampling axis");
  return relu(concat<S>({up, skip}, 0));
}

// Instance norm (optional) followed by a GRU along time. Input [C, F, T] or
// [C, T]; frequency rows share the GRU parameters (folded into the batch).
// Output channel count is the GRU hidden size.
template <typename S>
struct NormGruBlock {
  Tensor<S> gamma, beta;  // defined when the norm is enabled
  Tensor<S> w_ih, w_hh, b_ih, b_hh;

  void init(int channels, int hidden, bool with_norm, std::mt19937& rng) {
    if (with_norm) {
      gamma = Tensor<S>::full({channels}, S(1));
      beta = Tensor<S>::zeros({channels});
    }
    w_ih = detail::init_uniform<S>({3 * hidden, channels}, hidden, rng);
    w_hh = detail::init_uniform<S>({3 * hidden, hidden}, hidden, rng);
    b_ih = detail::init_uniform<S>({3 * hidden}, hidden, rng);
    b_hh = detail::init_uniform<S>({3 * hidden}, hidden, rng);
  }
  int hidden() const { return w_hh.dim(1); }
};

template <typename S>
Tensor<S> norm_gru_block(const Tensor<S>& x, const NormGruBlock<S>& p) {
  Tensor<S> cube = x;
  const bool flat = x.rank() == 2;
  if (flat) cube = reshape(x, {x.dim(0), 1, x.dim(1)});
  if (cube.rank() != 3)
    throw ShapeError("norm_gru_block: input must be [C, T] or [C, F, T]");
  if (p.gamma.defined()) {
    auto rows = reshape(cube, {cube.dim(0), cube.dim(1) * cube.dim(2)});
    cube = reshape(instance_norm(rows, p.gamma, p.beta), cube.shape());
  }
  // [C, F, T] -> [F, T, C]: frequency becomes the batch, time the sequence.
  auto seq = permute3(cube, 1, 2, 0);
  auto h = gru(seq, p.w_ih, p.w_hh, p.b_ih, p.b_hh);
  auto out = permute3(h, 2, 0, 1);  // [H, F, T]
  if (flat) return reshape(out, {out.dim(0), out.dim(2)});
  return out;
}

}  // namespace sts
