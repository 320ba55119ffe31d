// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/signal/stft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "sts/error.hpp"

namespace sts {

namespace {

// Reflect without repeating the edge sample (abcd -> cb|abcd|cb).
std::vector<float> reflect_pad(const std::vector<float>& x, int pad) {
  const int n = static_cast<int>(x.size());
  std::vector<float> out(x.size() + 2 * static_cast<std::size_t>(pad));
  for (int i = -pad; i < n + pad; ++i) {
    int j = i;
    if (n == 1) {
      j = 0;
    } else {
      const int period = 2 * (n - 1);
      j = ((j % period) + period) % period;
      if (j >= n) j = period - j;
    }
    out[static_cast<std::size_t>(i + pad)] = x[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace

std::vector<float> make_window(WindowKind kind, int len) {
  std::vector<float> w(static_cast<std::size_t>(len), 1.0f);
  if (kind == WindowKind::Hann) {
    // Periodic Hann: exact COLA at hop = len/4.
    for (int i = 0; i < len; ++i)
      w[static_cast<std::size_t>(i)] = static_cast<float>(
          0.5 - 0.5 * std::cos(2.0 * M_PI * i / len));
  }
  return w;
}

void StftConfig::validate() const {
  if (fft_size < 2 || window_len < 2 || hop < 1)
    throw ParamError("stft: non-positive framing parameters");
  if (window_len > fft_size)
    throw ParamError("stft: window_len exceeds fft_size");
  if (window_len % hop != 0)
    throw ParamError("stft: hop must divide window_len");
  // Constant-overlap-add check for the analysis window at this hop.
  std::vector<float> w = make_window(window, window_len);
  double lo = 1e30, hi = -1e30;
  for (int i = 0; i < hop; ++i) {
    double s = 0;
    for (int j = i; j < window_len; j += hop) s += w[static_cast<std::size_t>(j)];
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (hi - lo > 1e-4 * hi)
    throw ParamError("stft: window does not satisfy COLA at this hop");
}

int stft_frame_count(std::size_t num_samples, const StftConfig& cfg) {
  const long len = static_cast<long>(num_samples);
  const long padded = cfg.centered ? len + 2 * (cfg.fft_size / 2) : len;
  if (padded < cfg.window_len) return 0;
  return static_cast<int>(1 + (padded - cfg.window_len) / cfg.hop);
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  if (w.samples.empty()) throw ParamError("stft: empty waveform");

  const int pad = cfg.centered ? cfg.fft_size / 2 : 0;
  const std::vector<float> x =
      cfg.centered ? reflect_pad(w.samples, pad) : w.samples;
  const int frames = stft_frame_count(w.samples.size(), cfg);
  const std::vector<float> win = make_window(cfg.window, cfg.window_len);

  ComplexSpectrogram s;
  s.frame_hop = cfg.hop;
  s.window_len = cfg.window_len;
  s.fft_size = cfg.fft_size;
  s.sample_rate = w.sample_rate;
  s.bins.resize(cfg.bins(), frames);

  Eigen::FFT<float> fft;
  fft.SetFlag(Eigen::FFT<float>::HalfSpectrum);
  std::vector<float> frame(static_cast<std::size_t>(cfg.fft_size), 0.f);
  std::vector<std::complex<float>> spec;
  for (int t = 0; t < frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i)
      frame[static_cast<std::size_t>(i)] =
          x[off + static_cast<std::size_t>(i)] * win[static_cast<std::size_t>(i)];
    for (int i = cfg.window_len; i < cfg.fft_size; ++i)
      frame[static_cast<std::size_t>(i)] = 0.f;
    fft.fwd(spec, frame);
    for (int f = 0; f < cfg.bins(); ++f)
      s.bins(f, t) = spec[static_cast<std::size_t>(f)];
  }
  return s;
}

Waveform istft(const ComplexSpectrogram& s, const StftConfig& cfg) {
  cfg.validate();
  if (s.num_bins() != cfg.bins())
    throw ParamError("istft: spectrogram bins do not match config");

  const int frames = s.num_frames();
  const int raw_len = frames > 0 ? (frames - 1) * cfg.hop + cfg.window_len : 0;
  const std::vector<float> win = make_window(cfg.window, cfg.window_len);

  std::vector<double> acc(static_cast<std::size_t>(raw_len), 0.0);
  std::vector<double> wsq(static_cast<std::size_t>(raw_len), 0.0);

  Eigen::FFT<float> fft;
  fft.SetFlag(Eigen::FFT<float>::HalfSpectrum);
  std::vector<std::complex<float>> spec(static_cast<std::size_t>(cfg.bins()));
  std::vector<float> frame;
  for (int t = 0; t < frames; ++t) {
    for (int f = 0; f < cfg.bins(); ++f)
      spec[static_cast<std::size_t>(f)] = s.bins(f, t);
    fft.inv(frame, spec, cfg.fft_size);
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i) {
      const double wi = win[static_cast<std::size_t>(i)];
      acc[off + static_cast<std::size_t>(i)] += wi * frame[static_cast<std::size_t>(i)];
      wsq[off + static_cast<std::size_t>(i)] += wi * wi;
    }
  }

  const int pad = cfg.centered ? cfg.fft_size / 2 : 0;
  const int out_len = std::max(0, raw_len - 2 * pad);
  Waveform w;
  w.sample_rate = s.sample_rate;
  w.samples.resize(static_cast<std::size_t>(out_len));
  for (int i = 0; i < out_len; ++i) {
    const std::size_t j = static_cast<std::size_t>(i + pad);
    w.samples[static_cast<std::size_t>(i)] =
        static_cast<float>(acc[j] / std::max(wsq[j], 1e-8));
  }
  return w;
}

}  // namespace sts
