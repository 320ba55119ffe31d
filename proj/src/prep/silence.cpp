// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/prep/silence.hpp"

#include <cstddef>
#include <vector>

#include "sts/error.hpp"

namespace sts {

namespace {
constexpr int kFrameLen = 1024;
constexpr int kHop = 256;
constexpr int kMinRun = 3;
// keep frame iff 10*log10(E/E_max) > -40  <=>  E > E_max * 1e-4
constexpr double kEnergyFloor = 1e-4;
}  // namespace

Waveform remove_silent_frames(const Waveform& w) {
  const int n = static_cast<int>(w.size());
  if (n < kFrameLen)
    throw ParamError("remove_silent_frames: input shorter than one frame");

  const int frames = (n - kFrameLen) / kHop + 1;
  std::vector<double> energy(static_cast<std::size_t>(frames), 0.0);
  double max_energy = 0.0;
  for (int k = 0; k < frames; ++k) {
    double e = 0.0;
    const int start = k * kHop;
    for (int i = 0; i < kFrameLen; ++i) {
      const double v = w.samples[static_cast<std::size_t>(start + i)];
      e += v * v;
    }
    energy[static_cast<std::size_t>(k)] = e;
    if (e > max_energy) max_energy = e;
  }
  if (max_energy <= 0.0)
    throw ContractError("remove_silent_frames: input is entirely silent");

  std::vector<bool> silent(static_cast<std::size_t>(frames));
  for (int k = 0; k < frames; ++k)
    silent[static_cast<std::size_t>(k)] =
        energy[static_cast<std::size_t>(k)] <= max_energy * kEnergyFloor;

  // Mark the hop span of every frame inside a silent run of length >= 3.
  std::vector<bool> cut(static_cast<std::size_t>(n), false);
  int k = 0;
  while (k < frames) {
    if (!silent[static_cast<std::size_t>(k)]) {
      ++k;
      continue;
    }
    int end = k;
    while (end < frames && silent[static_cast<std::size_t>(end)]) ++end;
    if (end - k >= kMinRun) {
      const int lo = k * kHop;
      const int hi = end * kHop;  // exclusive: one hop span per frame
      for (int i = lo; i < hi && i < n; ++i)
        cut[static_cast<std::size_t>(i)] = true;
    }
    k = end;
  }

  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.reserve(w.size());
  for (int i = 0; i < n; ++i)
    if (!cut[static_cast<std::size_t>(i)])
      out.samples.push_back(w.samples[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace sts
