// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "sts/prep/contour.hpp"
#include "sts/signal/wav.hpp"

namespace sts {

// Phase-vocoder time stretch: output length = round(len/rate) within one
// frame hop, pitch preserved. rate > 1 shortens, rate < 1 lengthens.
// rate outside [0.1, 10] is a parameter error.
Waveform time_stretch(const Waveform& w, double rate);

// Uniform stretch so the output's analysis frame count equals the contour
// length. If the counts already match the waveform is returned unchanged.
// Propagates the time_stretch rate guard.
Waveform stretch_to_contour(const Waveform& w, const MelodyContour& c);

// Pitch shift by resampling (factor 2^(-semitones/12)) and stretching back to
// the original duration. Duration is preserved within one hop; detected f0
// scales by 2^(semitones/12). |semitones| must be <= 12.
Waveform pitch_shift(const Waveform& w, double semitones);

namespace detail {

// Phase-vocoder resynthesis along an arbitrary monotone time map.
// positions[k] is the fractional analysis-frame index (input frame units)
// rendered at output frame k; output length is (positions.size()-1) * hop.
// Magnitudes are linearly interpolated between bracketing analysis frames and
// per-bin phase advances by the locally measured instantaneous frequency, so
// an integer ramp 0,1,2,... reproduces the input up to rounding.
Waveform pv_resynth(const Waveform& w, const std::vector<double>& positions);

}  // namespace detail

}  // namespace sts
