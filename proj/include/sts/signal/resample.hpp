// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sts/signal/wav.hpp"

namespace sts {

// Band-limited rate conversion with a 64-tap Kaiser-windowed sinc kernel.
// Output length is round(len * target / source); equal rates return the
// input unchanged.
Waveform resample(const Waveform& w, int target_rate);

}  // namespace sts
