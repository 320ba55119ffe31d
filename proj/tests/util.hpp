// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sts/prep/contour.hpp"
#include "sts/signal/wav.hpp"

namespace tst {

inline sts::Waveform tone(double freq, double seconds, int rate = 16000,
                          double amp = 0.5, double phase = 0.0) {
  sts::Waveform w;
  w.sample_rate = rate;
  const int n = static_cast<int>(std::lround(seconds * rate));
  w.samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w.samples[static_cast<std::size_t>(i)] = static_cast<float>(
        amp * std::sin(2.0 * M_PI * freq * i / rate + phase));
  return w;
}

inline std::vector<float> rand_signal(int n, std::uint32_t seed,
                                      double amp = 0.5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  std::vector<float> v(static_cast<std::size_t>(n));
  for (auto& s : v) s = static_cast<float>(dist(rng));
  return v;
}

// Largest relative f0 error over the voiced interior frames of a contour
// (`margin` frames dropped at each end, where analysis windows overhang the
// signal). voiced receives the number of frames checked.
inline double max_rel_f0_err(const sts::MelodyContour& c, double target_hz,
                             int* voiced, int margin = 4) {
  int n = 0;
  double worst = 0.0;
  const int t_end = static_cast<int>(c.size()) - margin;
  for (int t = margin; t < t_end; ++t) {
    const float f = c.f0[static_cast<std::size_t>(t)];
    if (f <= 0.f) continue;
    ++n;
    worst = std::max(worst, std::abs(f - target_hz) / target_hz);
  }
  if (voiced) *voiced = n;
  return worst;
}

// SNR of est against ref over their overlap, with `skip` samples dropped from
// both ends (edge effects). Returns +inf-ish (999) for an exact match.
inline double snr_db(const std::vector<float>& ref,
                     const std::vector<float>& est, int skip = 0) {
  const int n = static_cast<int>(std::min(ref.size(), est.size()));
  double sig = 0.0, err = 0.0;
  for (int i = skip; i < n - skip; ++i) {
    const double r = ref[static_cast<std::size_t>(i)];
    const double e = est[static_cast<std::size_t>(i)];
    sig += r * r;
    err += (r - e) * (r - e);
  }
  if (err == 0.0) return 999.0;
  return 10.0 * std::log10(sig / err);
}

}  // namespace tst
