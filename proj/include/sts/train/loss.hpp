// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/ops.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

// Training objective: spectrogram reconstruction plus, when a phoneme head
// is present, frame-wise phoneme classification weighted by lambda. The
// reconstruction term is the mean squared error over the valid frequency x
// time region by default; sum_mse switches to the raw summed squared error
// (length-dependent, kept for comparability with sum-style reporting).
struct LossOptions {
  double lambda = 0.015;
  bool sum_mse = false;
};

// One sample's loss: `total` stays connected to the autodiff graph so the
// caller can run backward on it; the doubles are detached readings for logs.
template <typename S>
struct SampleLoss {
  Tensor<S> total;
  double total_value = 0.0;
  double mse = 0.0;
  double ce = 0.0;
};

// pred/target: [F, T] log-magnitude spectrograms, possibly padded beyond
// valid_frames columns; padding never contributes to either term. logits:
// [T, classes] from the phoneme head, or undefined when lambda = 0. Labels
// < 0 mark ignored frames. The classification term is averaged over the
// valid frames (the per-frame weighting of the combined objective).
template <typename S>
SampleLoss<S> mtl_sample_loss(const Tensor<S>& pred, const Tensor<S>& target,
                              const Tensor<S>& logits,
                              const std::vector<int>& frame_phones,
                              int valid_frames,
                              const LossOptions& opts = {}) {
  if (!pred.defined() || !target.defined())
    throw ContractError("mtl_sample_loss: prediction and target required");
  if (pred.rank() != 2)
    throw ShapeError("mtl_sample_loss: expected [frequency, time] inputs");
  if (pred.shape() != target.shape())
    throw ShapeError("mtl_sample_loss: prediction/target shapes differ");
  if (opts.lambda < 0) throw ParamError("mtl_sample_loss: lambda must be >= 0");
  const int f = pred.dim(0), t = pred.dim(1);
  if (valid_frames <= 0)
    throw ContractError("mtl_sample_loss: no valid frames to score");
  if (valid_frames > t)
    throw ShapeError("mtl_sample_loss: valid_frames exceeds the time axis");

  // Constant 0/1 column mask; no gradient flows into it.
  auto mask = Tensor<S>::zeros({f, t});
  for (int i = 0; i < f; ++i)
    for (int j = 0; j < valid_frames; ++j)
      mask.data()[static_cast<std::size_t>(i) * t + j] = S(1);

  auto diff = sub(pred, target);
  auto sse = sum(mul(mask, mul(diff, diff)));
  auto mse = opts.sum_mse
                 ? sse
                 : scalar_mul(sse, static_cast<S>(1.0 / (static_cast<double>(f) *
                                                         valid_frames)));

  SampleLoss<S> out;
  out.mse = static_cast<double>(mse.item());
  out.total = mse;

  if (opts.lambda > 0) {
    if (!logits.defined())
      throw ContractError(
          "mtl_sample_loss: lambda > 0 requires phoneme logits");
    if (logits.rank() != 2 || logits.dim(0) != t)
      throw ShapeError("mtl_sample_loss: logits must be [time, classes]");
    if (static_cast<int>(frame_phones.size()) != t)
      throw ShapeError("mtl_sample_loss: one label per frame required");
    // Padded frames must not be scored even if the caller left labels there.
    std::vector<int> labels = frame_phones;
    for (int j = valid_frames; j < t; ++j)
      labels[static_cast<std::size_t>(j)] = -1;
    auto ce =
        scalar_mul(sum(cross_entropy_rows(logits, labels)),
                   static_cast<S>(1.0 / valid_frames));
    out.ce = static_cast<double>(ce.item());
    out.total = add(out.total, scalar_mul(ce, static_cast<S>(opts.lambda)));
  }

  out.total_value = static_cast<double>(out.total.item());
  return out;
}

}  // namespace sts
