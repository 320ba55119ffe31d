// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/eval/metrics.hpp"

#include <cmath>
#include <vector>

#include "sts/error.hpp"

namespace sts {

double lsd(const LogMagSpectrogram& ref, const LogMagSpectrogram& est,
           const LsdOptions& opts) {
  if (ref.values.rows() != est.values.rows() ||
      ref.values.cols() != est.values.cols())
    throw ShapeError("lsd: spectrogram shapes differ");
  if (ref.values.rows() < 2) throw ShapeError("lsd: too few frequency bins");
  if (ref.values.cols() == 0) throw ContractError("lsd: no frames to average");
  if (opts.sample_rate <= 0 || !(opts.band_low_hz <= opts.band_high_hz) ||
      !std::isfinite(opts.floor_db))
    throw ParamError("lsd: malformed band options");

  const int bins = static_cast<int>(ref.values.rows());
  const int fft_size = 2 * (bins - 1);
  std::vector<int> band;
  for (int f = 0; f < bins; ++f) {
    const double center =
        static_cast<double>(f) * opts.sample_rate / fft_size;
    if (center >= opts.band_low_hz && center <= opts.band_high_hz)
      band.push_back(f);
  }
  if (band.empty()) throw ContractError("lsd: band holds no bins");

  const double amp_floor = std::pow(10.0, opts.floor_db / 20.0);
  const auto to_db = [amp_floor](float log_value) {
    const double amp = std::expm1(static_cast<double>(log_value));
    return 20.0 * std::log10(std::max(amp, amp_floor));
  };
  double mean = 0.0;
  for (Eigen::Index t = 0; t < ref.values.cols(); ++t) {
    double sq = 0.0;
    for (int f : band) {
      const double d = to_db(ref.values(f, t)) - to_db(est.values(f, t));
      sq += d * d;
    }
    mean += std::sqrt(sq);
  }
  return mean / static_cast<double>(ref.values.cols());
}

double rca(const MelodyContour& reference, const MelodyContour& estimate) {
  int voiced = 0;
  int hits = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const float ref_hz = reference.f0[i];
    if (ref_hz <= 0.0f) continue;
    ++voiced;
    const double t = static_cast<double>(i) * reference.frame_hop_sec;
    const auto j = std::llround(t / estimate.frame_hop_sec);
    if (j < 0 || j >= static_cast<long long>(estimate.size())) continue;
    const float est_hz = estimate.f0[static_cast<std::size_t>(j)];
    if (est_hz <= 0.0f) continue;
    const double cents = 1200.0 * std::log2(static_cast<double>(est_hz) /
                                            static_cast<double>(ref_hz));
    const double folded = std::abs(cents - 1200.0 * std::round(cents / 1200.0));
    if (folded <= 50.0) ++hits;
  }
  if (voiced == 0)
    throw ContractError("rca: reference has no voiced frames");
  return static_cast<double>(hits) / static_cast<double>(voiced);
}

}  // namespace sts
