// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "sts/signal/wav.hpp"

namespace sts {

using ComplexMatrix =
    Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic>;

enum class WindowKind { Hann, Rect };

// Analysis/synthesis framing. Defaults are the pipeline configuration:
// 1024-pt FFT, 1024-sample window (64 ms at 16 kHz), 256-sample hop (16 ms).
struct StftConfig {
  int fft_size = 1024;
  int window_len = 1024;
  int hop = 256;
  WindowKind window = WindowKind::Hann;
  bool centered = true;

  int bins() const { return fft_size / 2 + 1; }
  // Throws ParamError unless hop divides window_len, window_len <= fft_size
  // and the window overlap-adds to a constant at this hop.
  void validate() const;
};

// Half-spectrum STFT, bins x frames; column t is the frame at sample t*hop.
struct ComplexSpectrogram {
  ComplexMatrix bins;
  int frame_hop = 256;
  int window_len = 1024;
  int fft_size = 1024;
  int sample_rate = 16000;

  int num_bins() const { return static_cast<int>(bins.rows()); }
  int num_frames() const { return static_cast<int>(bins.cols()); }
};

std::vector<float> make_window(WindowKind kind, int len);

// Frame count produced by stft() for a signal of this many samples.
int stft_frame_count(std::size_t num_samples, const StftConfig& cfg);

// Centered analysis reflect-pads fft_size/2 samples on each side, so frame t
// is centered on sample t*hop and T = 1 + floor(len/hop).
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg);

// Overlap-add with window-square normalization. With cfg.centered the edge
// padding is trimmed again, giving (T-1)*hop samples; without it the full
// (T-1)*hop + window_len samples are returned.
Waveform istft(const ComplexSpectrogram& s, const StftConfig& cfg);

}  // namespace sts
