// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/data/batch.hpp"

#include <algorithm>

#include "sts/error.hpp"
#include "sts/prep/logmag.hpp"
#include "sts/prep/silence.hpp"
#include "sts/prep/vocoder.hpp"

namespace sts {

Batch make_batch(const std::vector<const TrainSample*>& samples,
                 const BatchOptions& opts,
                 const std::vector<double>* speech_semitones) {
  if (samples.empty()) throw ContractError("make_batch: empty batch");
  if (speech_semitones && speech_semitones->size() != samples.size())
    throw ShapeError("make_batch: one semitone shift per sample required");
  opts.stft.validate();

  const int batch = static_cast<int>(samples.size());
  const int num_bins = opts.stft.bins();
  std::vector<Eigen::ArrayXXf> xs, cs, ys;
  xs.reserve(samples.size());
  cs.reserve(samples.size());
  ys.reserve(samples.size());
  Batch out;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TrainSample& s = *samples[i];
    Waveform speech = s.speech;
    const double shift = speech_semitones ? (*speech_semitones)[i] : 0.0;
    if (shift != 0.0) speech = pitch_shift(speech, shift);
    if (opts.phsync)
      speech = phsync_stretch(speech, s.speech_phones, s.singing_phones);
    else
      speech = remove_silent_frames(speech);
    speech = stretch_to_contour(speech, s.contour);

    auto x = log_mag(stft(speech, opts.stft)).values;
    auto y = log_mag(stft(s.singing, opts.stft)).values;
    auto c = rasterize_contour(s.contour, num_bins, opts.stft.fft_size,
                               s.singing.sample_rate)
                 .mask;
    if (x.cols() != y.cols() || c.cols() != y.cols() ||
        static_cast<int>(s.frame_phones.size()) != y.cols())
      throw ContractError("make_batch: sample frame counts diverged");
    int frames = static_cast<int>(y.cols());
    if (opts.max_frames > 0 && frames > opts.max_frames) {
      frames = opts.max_frames;
      x = x.leftCols(frames).eval();
      y = y.leftCols(frames).eval();
      c = c.leftCols(frames).eval();
    }
    out.lengths.push_back(frames);
    std::vector<int> phones(s.frame_phones.begin(),
                            s.frame_phones.begin() + frames);
    out.frame_phones.push_back(std::move(phones));
    xs.push_back(std::move(x));
    cs.push_back(std::move(c));
    ys.push_back(std::move(y));
  }

  const int longest = *std::max_element(out.lengths.begin(), out.lengths.end());
  const int padded = (longest + 7) / 8 * 8;

  out.x = TensorF::zeros({batch, num_bins, padded});
  out.c = TensorF::zeros({batch, num_bins, padded});
  out.y = TensorF::zeros({batch, num_bins, padded});
  out.mask = TensorF::zeros({batch, padded});
  for (int b = 0; b < batch; ++b) {
    const int frames = out.lengths[static_cast<std::size_t>(b)];
    const auto& x = xs[static_cast<std::size_t>(b)];
    const auto& c = cs[static_cast<std::size_t>(b)];
    const auto& y = ys[static_cast<std::size_t>(b)];
    for (int f = 0; f < num_bins; ++f)
      for (int t = 0; t < frames; ++t) {
        const std::size_t at =
            (static_cast<std::size_t>(b) * num_bins + f) * padded + t;
        out.x.data()[at] = x(f, t);
        out.c.data()[at] = c(f, t);
        out.y.data()[at] = y(f, t);
      }
    for (int t = 0; t < frames; ++t)
      out.mask.data()[static_cast<std::size_t>(b) * padded + t] = 1.0f;
    out.frame_phones[static_cast<std::size_t>(b)].resize(
        static_cast<std::size_t>(padded), -1);
  }
  return out;
}

}  // namespace sts
