// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <vector>

#include "sts/prep/logmag.hpp"
#include "sts/signal/stft.hpp"
#include "sts/signal/wav.hpp"

namespace sts {

// Inverse of the log(1+x) magnitude compression: exp(v) - 1 element-wise.
// Maps 0 to 0, e.g. 1 to e-1, and keeps non-negative inputs non-negative;
// round-trips with log_mag to within a few float ulps.
Eigen::ArrayXXf inv_log_mag(const LogMagSpectrogram& y);

struct GriffinLimConfig {
  StftConfig stft{};        // framing of the magnitude grid
  int iterations = 60;      // refinement rounds; 0 = initial phase only
  double power = 1.2;       // magnitude exponent applied before recovery
  unsigned seed = 0;        // seeds the random initial phase
  int sample_rate = 16000;  // stamped on the output waveform
};

// Recovers a time-domain signal whose short-time spectral magnitude matches
// mag^power. The target magnitudes are paired with seeded uniform random
// phases and refined by alternating projections: synthesize by least-squares
// overlap-add, re-analyze, keep the measured phase, restore the target
// magnitude. iterations = 0 returns the synthesis of the target magnitude
// under the initial phase. With cfg.stft.centered the edge convention
// matches stft(): the result has (frames-1)*hop samples, so re-analyzing it
// yields `frames` frames again.
//
// All-zero magnitudes synthesize an all-zero waveform. Equal configs give
// bit-identical output. If projection_errors is non-null it receives one
// value per iteration: the distance between the re-analyzed magnitude and
// the target in the conjugate-symmetric Frobenius norm (interior bins
// counted twice, matching signal energy); the projection structure makes
// this sequence non-increasing.
//
// Throws ShapeError when mag rows differ from cfg.stft.bins(), ParamError
// for a negative iteration count or non-positive power, and ContractError
// for empty, negative, or non-finite magnitudes.
Waveform griffin_lim(const Eigen::ArrayXXf& mag,
                     const GriffinLimConfig& cfg = {},
                     std::vector<double>* projection_errors = nullptr);

}  // namespace sts
