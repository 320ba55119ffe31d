// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sts/prep/contour.hpp"
#include "sts/prep/logmag.hpp"

namespace sts {

struct LsdOptions {
  double band_low_hz = 100.0;   // band edges, inclusive by bin center
  double band_high_hz = 3500.0;
  int sample_rate = 16000;      // fixes the bin-center frequencies
  double floor_db = -80.0;      // amplitudes are clamped up to this level
};

// Log-spectral distance in dB: mean over frames of the euclidean distance
// between the two spectra restricted to the frequency band, measured on a
// 20*log10 amplitude scale with the floor applied to both sides. Inputs are
// log(1+magnitude) spectrograms (the network domain); the dB conversion
// happens inside. At 16 kHz with 1024-point analysis the default band keeps
// bins 7..224 inclusive. Symmetric, zero iff the banded spectra match, and
// a constant offset of c dB across the band gives c*sqrt(band size).
// Throws ShapeError on shape mismatch, ContractError when there are no
// frames or the band holds no bins, ParamError on a malformed option set.
double lsd(const LogMagSpectrogram& ref, const LogMagSpectrogram& est,
           const LsdOptions& opts = {});

// Raw chroma accuracy: over the reference's voiced frames, the fraction
// whose estimated pitch lands within 50 cents of the reference pitch after
// folding away whole octaves (error = min over k of |1200*log2(est/ref) -
// 1200k|, so any integer-octave transposition of the estimate scores
// identically). Unvoiced estimate frames count as misses. Estimates on a
// different frame grid are looked up at the nearest reference-frame time;
// times outside the estimate count as misses. Throws ContractError when the
// reference has no voiced frames.
double rca(const MelodyContour& reference, const MelodyContour& estimate);

}  // namespace sts
