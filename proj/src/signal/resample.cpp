// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/signal/resample.hpp"

#include <cmath>

#include "sts/error.hpp"

namespace sts {

namespace {

constexpr int kHalfTaps = 32;  // 64-tap kernel
constexpr double kKaiserBeta = 8.0;

double bessel_i0(double x) {
  // Series expansion; converges fast for the beta range we use.
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 32; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-12 * sum) break;
  }
  return sum;
}

double kaiser(double t_over_half) {
  const double a = 1.0 - t_over_half * t_over_half;
  if (a <= 0.0) return 0.0;
  return bessel_i0(kKaiserBeta * std::sqrt(a)) / bessel_i0(kKaiserBeta);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw ParamError("resample: target_rate must be > 0");
  if (w.sample_rate <= 0) throw ParamError("resample: source rate must be > 0");
  if (target_rate == w.sample_rate) return w;

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) * ratio));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  if (w.samples.empty()) return out;

  // Cutoff at the narrower Nyquist; unity passband gain.
  const double fc = 0.5 * std::min(1.0, ratio);
  const int n = static_cast<int>(w.samples.size());
  for (std::size_t i = 0; i < out_len; ++i) {
    const double p = static_cast<double>(i) / ratio;  // position in source
    const int j0 = static_cast<int>(std::ceil(p)) - kHalfTaps;
    const int j1 = static_cast<int>(std::floor(p)) + kHalfTaps;
    double acc = 0.0;
    for (int j = std::max(0, j0); j <= std::min(n - 1, j1); ++j) {
      const double t = p - j;
      acc += w.samples[static_cast<std::size_t>(j)] * 2.0 * fc *
             sinc(2.0 * fc * t) * kaiser(t / kHalfTaps);
    }
    out.samples[i] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace sts
