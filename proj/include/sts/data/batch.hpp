// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "sts/data/samples.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

// A padded training batch. x/c/y are [B, F, T] with T the longest sample in
// the batch rounded up to a multiple of 8; padded frames are zero. mask is
// [B, T] with 1 on real frames; frame_phones rows are padded with -1, which
// the cross-entropy treats as "ignore".
struct Batch {
  TensorF x;     // processed speech log-magnitude spectrograms
  TensorF c;     // rasterized melody contours
  TensorF y;     // target singing log-magnitude spectrograms
  TensorF mask;  // [B, T]
  std::vector<std::vector<int>> frame_phones;
  std::vector<int> lengths;  // real frame count per sample

  int batch_size() const { return mask.defined() ? mask.dim(0) : 0; }
  int frames() const { return mask.defined() ? mask.dim(1) : 0; }
};

struct BatchOptions {
  StftConfig stft{};
  bool phsync = false;  // per-phone alignment instead of silence removal
  int max_frames = 0;   // 0: no cap; otherwise truncate longer samples
};

// Turns samples into aligned tensors. Per sample the speech is optionally
// pitch-shifted (speech_semitones, one entry per sample, 0 = untouched),
// then either phone-aligned to the singing (phsync) or stripped of long
// silences, then uniformly stretched so its frame count matches the
// contour's; all three spectrogram tensors therefore share the singing's
// frame count before padding. Raises ContractError on an empty batch and
// ShapeError when speech_semitones has the wrong length.
Batch make_batch(const std::vector<const TrainSample*>& samples,
                 const BatchOptions& opts = {},
                 const std::vector<double>* speech_semitones = nullptr);

}  // namespace sts
