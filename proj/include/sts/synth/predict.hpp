// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sts/model/model.hpp"
#include "sts/prep/contour.hpp"
#include "sts/signal/stft.hpp"
#include "sts/signal/wav.hpp"
#include "sts/synth/griffin_lim.hpp"

namespace sts {

struct PredictConfig {
  StftConfig stft{};       // analysis and synthesis framing
  int gl_iterations = 60;  // phase-recovery rounds
  double gl_power = 1.2;   // magnitude exponent before phase recovery
  unsigned seed = 0;       // seeds the synthesis phase init
};

// Full inference chain: strip long silences from the speech, stretch it so
// its analysis frame count matches the melody contour, run the model on the
// log-magnitude spectrogram (conditioned on the rasterized contour when the
// variant uses one), and synthesize the predicted spectrogram back to audio
// with griffin_lim. The output covers the contour's frame grid: re-analyzing
// it yields len(contour) frames, so its duration matches the contour's
// within one hop. Gradients are never recorded.
//
// Throws ContractError on an empty contour; stage errors propagate
// unchanged (ContractError for speech with no energy, ParamError when the
// stretch factor leaves the supported range, ...).
Waveform predict(const StsModelF& model, const Waveform& speech,
                 const MelodyContour& contour, const PredictConfig& cfg = {});

}  // namespace sts
