// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sts/prep/contour.hpp"
#include "sts/signal/stft.hpp"
#include "sts/signal/wav.hpp"

namespace sts {

struct YinConfig {
  int frame_len = 1024;     // analysis segment per frame
  int hop = 256;            // matches the STFT grid
  float threshold = 0.1f;   // cumulative-mean-normalized difference dip
  float f0_min = 50.0f;
  float f0_max = 1500.0f;
};

// Deterministic YIN core: cumulative-mean-normalized difference with
// threshold dip selection and parabolic interpolation. Frames align with the
// centered STFT grid, so the contour length equals stft_frame_count(len).
MelodyContour yin_f0(const Waveform& w, const YinConfig& cfg = {});

}  // namespace sts
