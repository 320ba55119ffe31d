// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/synth/predict.hpp"

#include <utility>
#include <vector>

#include "sts/error.hpp"
#include "sts/prep/silence.hpp"
#include "sts/prep/vocoder.hpp"

namespace sts {

namespace {

TensorF to_tensor(const Eigen::ArrayXXf& a) {
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  std::vector<float> data(static_cast<std::size_t>(a.size()));
  for (int f = 0; f < rows; ++f)
    for (int t = 0; t < cols; ++t)
      data[static_cast<std::size_t>(f) * cols + t] = a(f, t);
  return TensorF::from(std::move(data), {rows, cols});
}

Eigen::ArrayXXf to_array(const TensorF& t) {
  const int rows = t.dim(0);
  const int cols = t.dim(1);
  Eigen::ArrayXXf out(rows, cols);
  for (int f = 0; f < rows; ++f)
    for (int c = 0; c < cols; ++c)
      out(f, c) = t.data()[static_cast<std::size_t>(f) * cols + c];
  return out;
}

}  // namespace

Waveform predict(const StsModelF& model, const Waveform& speech,
                 const MelodyContour& contour, const PredictConfig& cfg) {
  if (contour.size() == 0) throw ContractError("predict: empty melody contour");
  cfg.stft.validate();

  Waveform aligned = stretch_to_contour(remove_silent_frames(speech), contour);
  const LogMagSpectrogram x = log_mag(stft(aligned, cfg.stft));
  if (x.num_frames() != static_cast<int>(contour.size()))
    throw ContractError("predict: analysis frames diverged from the contour");

  TensorF x_t = to_tensor(x.values);
  TensorF c_t;
  if (model.flags().use_contour)
    c_t = to_tensor(rasterize_contour(contour, x.num_bins(),
                                      cfg.stft.fft_size, speech.sample_rate)
                        .mask);
  NoGradGuard inference;
  const auto out = model.forward(x_t, c_t);

  LogMagSpectrogram predicted;
  predicted.frame_hop_sec = x.frame_hop_sec;
  predicted.values = to_array(out.spectrogram);

  GriffinLimConfig gl;
  gl.stft = cfg.stft;
  gl.iterations = cfg.gl_iterations;
  gl.power = cfg.gl_power;
  gl.seed = cfg.seed;
  gl.sample_rate = speech.sample_rate;
  return griffin_lim(inv_log_mag(predicted), gl);
}

}  // namespace sts
