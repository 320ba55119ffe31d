// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace sts {

// Per-frame fundamental frequency in Hz; 0 encodes an unvoiced frame.
// Voiced values are constrained to [50, 1500] Hz.
struct MelodyContour {
  std::vector<float> f0;
  double frame_hop_sec = 0.016;

  std::size_t size() const { return f0.size(); }
  int voiced_count() const;
  double duration_sec() const { return frame_hop_sec * f0.size(); }
};

// F x T {0,1} raster of a contour: one 1 per voiced column at the nearest
// frequency bin, all-zero columns where unvoiced.
struct ContourImage {
  Eigen::ArrayXXf mask;  // F x T
};

// Nearest-bin index for a frequency; ties round half-up.
int frequency_to_bin(double f0_hz, int fft_size, int sample_rate);

// Throws ParamError when a voiced frame reaches Nyquist or beyond.
ContourImage rasterize_contour(const MelodyContour& c, int num_bins,
                               int fft_size, int sample_rate);

// Text format: one line per frame, "time_sec<TAB>f0_hz", 0 for unvoiced.
// The reader insists on a 16 ms frame grid and the voiced range invariant.
MelodyContour read_contour(const std::string& path);
void write_contour(const MelodyContour& c, const std::string& path);

}  // namespace sts
