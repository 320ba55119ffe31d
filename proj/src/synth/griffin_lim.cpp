// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/synth/griffin_lim.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "sts/error.hpp"

namespace sts {

Eigen::ArrayXXf inv_log_mag(const LogMagSpectrogram& y) {
  Eigen::ArrayXXf out(y.values.rows(), y.values.cols());
  for (Eigen::Index t = 0; t < y.values.cols(); ++t)
    for (Eigen::Index f = 0; f < y.values.rows(); ++f)
      out(f, t) = std::expm1(y.values(f, t));
  return out;
}

Waveform griffin_lim(const Eigen::ArrayXXf& mag, const GriffinLimConfig& cfg,
                     std::vector<double>* projection_errors) {
  cfg.stft.validate();
  if (cfg.iterations < 0)
    throw ParamError("griffin_lim: negative iteration count");
  if (!(cfg.power > 0))
    throw ParamError("griffin_lim: magnitude exponent must be positive");
  if (mag.rows() != cfg.stft.bins())
    throw ShapeError("griffin_lim: magnitude rows must match cfg.stft.bins()");
  if (mag.cols() == 0) throw ContractError("griffin_lim: empty spectrogram");
  if (!mag.isFinite().all() || (mag < 0.0f).any())
    throw ContractError("griffin_lim: magnitudes must be finite and >= 0");

  // Exponent 1 short-circuits so it stays exact rather than exp(log(x)).
  const Eigen::ArrayXXf target =
      cfg.power == 1.0 ? mag : mag.pow(static_cast<float>(cfg.power)).eval();

  const int bins = static_cast<int>(target.rows());
  const int frames = static_cast<int>(target.cols());
  ComplexSpectrogram spec;
  spec.frame_hop = cfg.stft.hop;
  spec.window_len = cfg.stft.window_len;
  spec.fft_size = cfg.stft.fft_size;
  spec.sample_rate = cfg.sample_rate;
  spec.bins.resize(bins, frames);
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<float> phase(-static_cast<float>(M_PI),
                                              static_cast<float>(M_PI));
  for (int t = 0; t < frames; ++t)
    for (int f = 0; f < bins; ++f)
      spec.bins(f, t) = std::polar(target(f, t), phase(rng));

  // The refinement runs uncentered over the full overlap-add extent, where
  // istft is the exact least-squares inverse of stft; only the final
  // synthesis applies the caller's edge convention. This is what makes the
  // reported projection error genuinely non-increasing instead of picking up
  // boundary noise from re-padding every round.
  StftConfig inner = cfg.stft;
  inner.centered = false;
  for (int k = 0; k < cfg.iterations; ++k) {
    const Waveform x = istft(spec, inner);
    const ComplexSpectrogram re = stft(x, inner);
    double err = 0.0;
    for (int t = 0; t < frames; ++t)
      for (int f = 0; f < bins; ++f) {
        const float a = std::abs(re.bins(f, t));
        const double d = static_cast<double>(a) - target(f, t);
        const double w = (f == 0 || f == bins - 1) ? 1.0 : 2.0;
        err += w * d * d;
        spec.bins(f, t) = a > 0.0f
                              ? re.bins(f, t) * (target(f, t) / a)
                              : std::complex<float>(target(f, t), 0.0f);
      }
    if (projection_errors) projection_errors->push_back(std::sqrt(err));
  }
  Waveform out = istft(spec, cfg.stft);
  out.sample_rate = cfg.sample_rate;
  return out;
}

}  // namespace sts
