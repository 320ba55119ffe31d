// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/prep/logmag.hpp"

#include <cmath>

#include "sts/error.hpp"

namespace sts {

LogMagSpectrogram log_mag(const ComplexSpectrogram& s) {
  LogMagSpectrogram out;
  out.frame_hop_sec =
      static_cast<double>(s.frame_hop) / static_cast<double>(s.sample_rate);
  out.values.resize(s.num_bins(), s.num_frames());
  for (int t = 0; t < s.num_frames(); ++t) {
    for (int f = 0; f < s.num_bins(); ++f) {
      const float m = std::abs(s.bins(f, t));
      if (!std::isfinite(m)) throw ParamError("log_mag: non-finite magnitude");
      out.values(f, t) = std::log1p(m);
    }
  }
  return out;
}

}  // namespace sts
