// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sts {

// Mono PCM audio. Samples live in [-1, 1]; clipping happens on write only.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  double duration_sec() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Reads a RIFF/WAVE file. PCM16 and float32 payloads are accepted, mono or
// stereo (stereo is averaged down to mono). Anything else raises
// UnsupportedError; a broken header raises FormatError.
Waveform read_wav(const std::string& path);

// Writes 16-bit PCM mono, little-endian. Out-of-range samples are clipped to
// full scale. Non-finite samples raise ParamError before anything is written.
void write_wav(const Waveform& w, const std::string& path);

}  // namespace sts
