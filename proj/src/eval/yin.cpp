// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/eval/yin.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sts/error.hpp"

namespace sts {

MelodyContour yin_f0(const Waveform& w, const YinConfig& cfg) {
  if (w.sample_rate <= 0) throw ParamError("yin_f0: bad sample rate");
  const int rate = w.sample_rate;
  const int win = cfg.frame_len / 2;
  const int tau_min =
      std::max(2, static_cast<int>(std::ceil(rate / cfg.f0_max)));
  const int tau_max = std::min(
      win - 1, static_cast<int>(std::floor(rate / cfg.f0_min)));
  if (tau_min >= tau_max) throw ParamError("yin_f0: empty lag range");

  StftConfig grid;
  grid.fft_size = cfg.frame_len;
  grid.window_len = cfg.frame_len;
  grid.hop = cfg.hop;
  const int frames = stft_frame_count(w.samples.size(), grid);

  MelodyContour c;
  c.frame_hop_sec = static_cast<double>(cfg.hop) / rate;
  c.f0.assign(static_cast<std::size_t>(std::max(0, frames)), 0.f);

  const int n = static_cast<int>(w.samples.size());
  std::vector<double> seg(static_cast<std::size_t>(cfg.frame_len));
  std::vector<double> d(static_cast<std::size_t>(tau_max + 1));
  std::vector<double> dn(static_cast<std::size_t>(tau_max + 1));

  for (int t = 0; t < frames; ++t) {
    const int start = t * cfg.hop - cfg.frame_len / 2;
    double power = 0.0;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const int j = start + i;
      const double v = (j >= 0 && j < n) ? w.samples[static_cast<std::size_t>(j)] : 0.0;
      seg[static_cast<std::size_t>(i)] = v;
      power += v * v;
    }
    if (power < 1e-10) continue;  // silence stays unvoiced

    // Difference function and its cumulative-mean normalization.
    double cum = 0.0;
    dn[0] = 1.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (int i = 0; i < win; ++i) {
        const double diff = seg[static_cast<std::size_t>(i)] -
                            seg[static_cast<std::size_t>(i + tau)];
        acc += diff * diff;
      }
      d[static_cast<std::size_t>(tau)] = acc;
      cum += acc;
      dn[static_cast<std::size_t>(tau)] =
          cum > 0.0 ? acc * tau / cum : 1.0;
    }

    // First dip below threshold, descended to its local minimum.
    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (dn[static_cast<std::size_t>(tau)] < cfg.threshold) {
        while (tau + 1 <= tau_max &&
               dn[static_cast<std::size_t>(tau + 1)] <
                   dn[static_cast<std::size_t>(tau)])
          ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) continue;

    double tau_star = best;
    if (best > 1 && best < tau_max) {
      const double a = dn[static_cast<std::size_t>(best - 1)];
      const double b = dn[static_cast<std::size_t>(best)];
      const double c2 = dn[static_cast<std::size_t>(best + 1)];
      const double denom = a - 2.0 * b + c2;
      if (std::abs(denom) > 1e-12)
        tau_star = best + 0.5 * (a - c2) / denom;
    }
    const double f0 =
        std::clamp(rate / tau_star, static_cast<double>(cfg.f0_min),
                   static_cast<double>(cfg.f0_max));
    c.f0[static_cast<std::size_t>(t)] = static_cast<float>(f0);
  }
  return c;
}

}  // namespace sts
