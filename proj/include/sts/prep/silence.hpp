// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sts/signal/wav.hpp"

namespace sts {

// Removes stretches of near-silence from a waveform. Short-time energy is
// measured on 1024-sample frames every 256 samples; a frame counts as silent
// when its energy is 40 dB or more below the loudest frame. Only maximal runs
// of at least three consecutive silent frames are excised (their hop spans are
// cut out); isolated one- or two-frame dips are kept so stop consonants and
// brief gaps survive. Throws ContractError when the input carries no energy
// at all, since the result would be empty.
Waveform remove_silent_frames(const Waveform& w);

}  // namespace sts
