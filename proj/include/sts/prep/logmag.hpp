// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>

#include "sts/signal/stft.hpp"

namespace sts {

// Compressed magnitude spectrogram: values[f, t] = log(1 + |X[f, t]|).
// Non-negative by construction; F = 513 for the standard 1024-point analysis.
struct LogMagSpectrogram {
  Eigen::ArrayXXf values;          // F x T
  double frame_hop_sec = 0.016;

  int num_bins() const { return static_cast<int>(values.rows()); }
  int num_frames() const { return static_cast<int>(values.cols()); }
};

// Log(1+x) compression of STFT magnitudes; shape preserved, monotone in the
// magnitude, and exactly invertible via exp(v)-1.
LogMagSpectrogram log_mag(const ComplexSpectrogram& s);

}  // namespace sts
