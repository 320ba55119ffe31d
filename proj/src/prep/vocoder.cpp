// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/prep/vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "sts/error.hpp"
#include "sts/signal/resample.hpp"
#include "sts/signal/stft.hpp"

namespace sts {

namespace {
constexpr double kPi = 3.14159265358979323846;

double princarg(double phase) {
  return phase - 2.0 * kPi * std::round(phase / (2.0 * kPi));
}
}  // namespace

namespace detail {

Waveform pv_resynth(const Waveform& w, const std::vector<double>& positions) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  if (w.samples.empty() || positions.empty()) return out;

  const StftConfig cfg;  // 1024-pt Hann, hop 256, centered
  const ComplexSpectrogram X = stft(w, cfg);
  const int bins = X.num_bins();
  const int t_in = X.num_frames();
  const int t_out = static_cast<int>(positions.size());
  const int hop = cfg.hop;

  // Per-bin unwrapped magnitude/phase of the analysis frames.
  Eigen::ArrayXXd mag(bins, t_in);
  Eigen::ArrayXXd arg(bins, t_in);
  for (int t = 0; t < t_in; ++t) {
    for (int b = 0; b < bins; ++b) {
      const std::complex<float> v = X.bins(b, t);
      mag(b, t) = std::abs(std::complex<double>(v.real(), v.imag()));
      arg(b, t) = std::atan2(static_cast<double>(v.imag()),
                             static_cast<double>(v.real()));
    }
  }

  ComplexSpectrogram Y;
  Y.frame_hop = hop;
  Y.window_len = cfg.window_len;
  Y.fft_size = cfg.fft_size;
  Y.sample_rate = w.sample_rate;
  Y.bins.resize(bins, t_out);

  // Identity phase locking: spectral peaks advance by their measured
  // instantaneous frequency; the bins around each peak are re-locked every
  // frame to the current analysis frame's phase structure, so synthesized
  // frames keep a proper envelope and overlap-add coherently. On an integer
  // ramp every bin reproduces the analysis phases exactly.
  std::vector<double> carry(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> emit(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> m(static_cast<std::size_t>(bins), 0.0);
  std::vector<int> peak_of(static_cast<std::size_t>(bins), -1);
  std::vector<int> peaks;
  for (int k = 0; k < t_out; ++k) {
    double p = std::clamp(positions[static_cast<std::size_t>(k)], 0.0,
                          static_cast<double>(t_in - 1));
    const int i = std::min(static_cast<int>(std::floor(p)), t_in - 1);
    const int j = std::min(i + 1, t_in - 1);
    const double frac = p - i;
    for (int b = 0; b < bins; ++b)
      m[static_cast<std::size_t>(b)] =
          (1.0 - frac) * mag(b, i) + frac * mag(b, j);

    // Local maxima over two neighbours on each side; region boundaries at
    // midpoints between consecutive peaks.
    peaks.clear();
    auto at = [&](int b) {
      return (b < 0 || b >= bins) ? -1.0 : m[static_cast<std::size_t>(b)];
    };
    for (int b = 0; b < bins; ++b) {
      const double v = m[static_cast<std::size_t>(b)];
      if (v > 0.0 && v >= at(b - 1) && v >= at(b - 2) && v > at(b + 1) &&
          v > at(b + 2))
        peaks.push_back(b);
    }
    std::fill(peak_of.begin(), peak_of.end(), -1);
    for (std::size_t q = 0; q < peaks.size(); ++q) {
      const int lo = q == 0 ? 0 : (peaks[q - 1] + peaks[q] + 1) / 2;
      const int hi =
          q + 1 == peaks.size() ? bins : (peaks[q] + peaks[q + 1] + 1) / 2;
      for (int b = lo; b < hi; ++b)
        peak_of[static_cast<std::size_t>(b)] = peaks[q];
    }

    // Peak (and unassigned) bins take the phase carried from the previous
    // frame; the rest are locked to the current analysis frame's structure
    // around their peak. On an integer ramp both cases reduce to the
    // analysis phases themselves.
    for (int b = 0; b < bins; ++b) {
      const int q = peak_of[static_cast<std::size_t>(b)];
      if (k == 0)
        emit[static_cast<std::size_t>(b)] = arg(b, i);
      else if (q == b || q < 0)
        emit[static_cast<std::size_t>(b)] = carry[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      const int q = peak_of[static_cast<std::size_t>(b)];
      if (k > 0 && q >= 0 && q != b)
        emit[static_cast<std::size_t>(b)] =
            emit[static_cast<std::size_t>(q)] + arg(b, i) - arg(q, i);
      const double ph = emit[static_cast<std::size_t>(b)];
      Y.bins(b, k) = std::complex<float>(
          static_cast<float>(m[static_cast<std::size_t>(b)] * std::cos(ph)),
          static_cast<float>(m[static_cast<std::size_t>(b)] * std::sin(ph)));
    }
    // Prime the next frame: every bin advances one synthesis hop at the
    // instantaneous frequency measured between the current analysis pair.
    for (int b = 0; b < bins; ++b) {
      const double omega = 2.0 * kPi * b / cfg.fft_size;  // rad/sample
      double delta = omega * hop;
      if (j > i) delta += princarg(arg(b, j) - arg(b, i) - omega * hop);
      carry[static_cast<std::size_t>(b)] =
          emit[static_cast<std::size_t>(b)] + delta;
    }
  }
  return istft(Y, cfg);
}

}  // namespace detail

Waveform time_stretch(const Waveform& w, double rate) {
  if (!(rate >= 0.1 && rate <= 10.0))
    throw ParamError("time_stretch: rate must lie in [0.1, 10]");
  if (w.samples.empty()) return Waveform{{}, w.sample_rate};

  const StftConfig cfg;
  const long long target =
      std::llround(static_cast<double>(w.size()) / rate);
  const int t_out = static_cast<int>(target / cfg.hop) + 1;
  std::vector<double> pos(static_cast<std::size_t>(t_out));
  for (int k = 0; k < t_out; ++k) pos[static_cast<std::size_t>(k)] = k * rate;
  return detail::pv_resynth(w, pos);
}

Waveform stretch_to_contour(const Waveform& w, const MelodyContour& c) {
  if (c.size() == 0) throw ParamError("stretch_to_contour: empty contour");
  const StftConfig cfg;
  const int have = stft_frame_count(w.size(), cfg);
  const int want = static_cast<int>(c.size());
  if (have == want) return w;
  // Aim at the middle of the sample range that yields `want` frames so the
  // rounding inside time_stretch cannot move the frame count.
  const double target_len = (want - 1) * cfg.hop + cfg.hop / 2.0;
  const double rate = static_cast<double>(w.size()) / target_len;
  return time_stretch(w, rate);
}

Waveform pitch_shift(const Waveform& w, double semitones) {
  if (!(std::abs(semitones) <= 12.0))
    throw ParamError("pitch_shift: |semitones| must be <= 12");
  if (w.samples.empty()) return Waveform{{}, w.sample_rate};
  const double q = std::pow(2.0, -semitones / 12.0);
  const int shifted_rate =
      static_cast<int>(std::llround(w.sample_rate * q));
  Waveform v = resample(w, shifted_rate);
  v.sample_rate = w.sample_rate;  // reinterpret: scales pitch by 1/q
  return time_stretch(v, q);      // restore the original duration
}

}  // namespace sts
