// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/data/samples.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sts/data/phoneme_dict.hpp"
#include "sts/error.hpp"
#include "sts/eval/yin.hpp"
#include "sts/prep/vocoder.hpp"
#include "sts/signal/resample.hpp"

namespace sts {

namespace {

constexpr int kRate = 16000;

Waveform slice_wave(const Waveform& w, double t0, double t1) {
  const auto n = static_cast<long long>(w.size());
  long long i0 = std::llround(t0 * w.sample_rate);
  long long i1 = std::llround(t1 * w.sample_rate);
  i0 = std::clamp(i0, 0LL, n);
  i1 = std::clamp(i1, i0, n);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin() + i0, w.samples.begin() + i1);
  return out;
}

// Annotation intervals first..last, shifted so the slice starts at zero.
PhoneAnnotation relative_annotation(const PhoneAnnotation& ann,
                                    std::size_t first, std::size_t last,
                                    double t0) {
  PhoneAnnotation out;
  out.reserve(last - first + 1);
  for (std::size_t i = first; i <= last; ++i)
    out.push_back({std::max(0.0, ann[i].start_sec - t0),
                   std::max(0.0, ann[i].end_sec - t0), ann[i].phone});
  return out;
}

std::vector<int> label_frames(const PhoneAnnotation& ann, int frames,
                              const StftConfig& cfg, int sample_rate) {
  std::vector<int> out(static_cast<std::size_t>(frames), PhonemeDict::kSil);
  const double hop_sec = static_cast<double>(cfg.hop) / sample_rate;
  std::size_t at = 0;
  for (int t = 0; t < frames; ++t) {
    const double tau = t * hop_sec;
    while (at < ann.size() && ann[at].end_sec <= tau) ++at;
    if (at < ann.size() && ann[at].start_sec <= tau)
      out[static_cast<std::size_t>(t)] = ann[at].phone;
  }
  return out;
}

TrainSample build_sample(const RecordingPair& pair, const Waveform& read_w,
                         const Waveform& sing_w, const WordSpan& r0,
                         const WordSpan& r1, const WordSpan& s0,
                         const WordSpan& s1, const SampleOptions& opts) {
  TrainSample sample;
  sample.speaker_id = pair.speaker_id;
  sample.song_id = pair.song_id;
  sample.speech = slice_wave(read_w, r0.start_sec, r1.end_sec);
  sample.singing = slice_wave(sing_w, s0.start_sec, s1.end_sec);
  sample.speech_phones = relative_annotation(
      pair.read.phones, r0.first_phone, r1.last_phone, r0.start_sec);
  sample.singing_phones = relative_annotation(
      pair.sing.phones, s0.first_phone, s1.last_phone, s0.start_sec);

  YinConfig yc;
  yc.frame_len = opts.stft.window_len;
  yc.hop = opts.stft.hop;
  sample.contour = yin_f0(sample.singing, yc);

  const int frames = stft_frame_count(sample.singing.size(), opts.stft);
  if (static_cast<int>(sample.contour.size()) != frames)
    throw ContractError("contour frame count diverged from the frame grid");
  sample.frame_phones =
      label_frames(sample.singing_phones, frames, opts.stft, kRate);
  return sample;
}

}  // namespace

std::vector<std::vector<WordSpan>> segment_words(const PhoneAnnotation& ann,
                                                 double min_silence_sec) {
  std::vector<std::vector<WordSpan>> segments(1);
  bool in_word = false;
  WordSpan cur;
  const auto close_word = [&] {
    if (in_word) segments.back().push_back(cur);
    in_word = false;
  };
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const PhoneInterval& iv = ann[i];
    if (PhonemeDict::is_silence(iv.phone)) {
      close_word();
      if (iv.end_sec - iv.start_sec >= min_silence_sec &&
          !segments.back().empty())
        segments.emplace_back();
    } else if (!in_word) {
      cur = {iv.start_sec, iv.end_sec, i, i};
      in_word = true;
    } else {
      cur.end_sec = iv.end_sec;
      cur.last_phone = i;
    }
  }
  close_word();
  if (segments.back().empty()) segments.pop_back();
  return segments;
}

std::size_t sample_count_for_segment(std::size_t words, int min_words) {
  const auto m = static_cast<std::size_t>(std::max(min_words, 1));
  if (words < m) return 0;
  const std::size_t runs = words - m + 1;  // sum 1..runs
  return runs * (runs + 1) / 2;
}

std::vector<TrainSample> generate_samples(const Corpus& corpus, Split split,
                                          const SampleOptions& opts) {
  opts.stft.validate();
  if (opts.min_words < 1) throw ParamError("min_words must be positive");

  std::string test_song = opts.test_song;
  if (test_song.empty())
    for (const auto& pair : corpus.pairs)
      if (test_song.empty() || pair.song_id < test_song)
        test_song = pair.song_id;

  std::vector<TrainSample> out;
  for (const auto& pair : corpus.pairs) {
    const bool is_test = pair.song_id == test_song;
    if ((split == Split::Test) != is_test) continue;

    const auto sing_segments =
        segment_words(pair.sing.phones, opts.min_silence_sec);
    const auto read_segments =
        segment_words(pair.read.phones, opts.min_silence_sec);
    std::vector<WordSpan> read_words;
    for (const auto& seg : read_segments)
      read_words.insert(read_words.end(), seg.begin(), seg.end());
    std::size_t sing_total = 0;
    for (const auto& seg : sing_segments) sing_total += seg.size();

    if (sing_total != read_words.size()) {
      if (opts.log)
        *opts.log << "skipping " << pair.speaker_id << "/" << pair.song_id
                  << ": " << read_words.size() << " spoken words vs "
                  << sing_total << " sung words\n";
      continue;
    }
    if (sing_total == 0) continue;

    Waveform read_w = read_wav(pair.read.wav_path);
    Waveform sing_w = read_wav(pair.sing.wav_path);
    if (read_w.sample_rate != kRate) read_w = resample(read_w, kRate);
    if (sing_w.sample_rate != kRate) sing_w = resample(sing_w, kRate);

    std::size_t offset = 0;
    for (const auto& seg : sing_segments) {
      const std::size_t n = seg.size();
      for (std::size_t k = static_cast<std::size_t>(opts.min_words); k <= n;
           ++k)
        for (std::size_t i = 0; i + k <= n; ++i)
          out.push_back(build_sample(
              pair, read_w, sing_w, read_words[offset + i],
              read_words[offset + i + k - 1], seg[i], seg[i + k - 1], opts));
      offset += n;
    }
  }
  return out;
}

Waveform phsync_stretch(const Waveform& speech,
                        const PhoneAnnotation& speech_ann,
                        const PhoneAnnotation& sing_ann) {
  std::vector<std::size_t> sp_idx, sg_idx;
  for (std::size_t i = 0; i < speech_ann.size(); ++i)
    if (!PhonemeDict::is_silence(speech_ann[i].phone)) sp_idx.push_back(i);
  for (std::size_t i = 0; i < sing_ann.size(); ++i)
    if (!PhonemeDict::is_silence(sing_ann[i].phone)) sg_idx.push_back(i);
  if (sp_idx.empty() || sp_idx.size() != sg_idx.size())
    throw AlignError("phone sequences differ in length");
  for (std::size_t i = 0; i < sp_idx.size(); ++i)
    if (speech_ann[sp_idx[i]].phone != sing_ann[sg_idx[i]].phone)
      throw AlignError(
          "phone sequences differ at position " + std::to_string(i) + ": " +
          PhonemeDict::get().name(speech_ann[sp_idx[i]].phone) + " vs " +
          PhonemeDict::get().name(sing_ann[sg_idx[i]].phone));

  // Piecewise-linear map from singing time to speech time, anchored at every
  // matched phone boundary. Whatever lies between two phones on the speech
  // side (silences included) is squeezed onto the singing-side gap.
  std::vector<std::pair<double, double>> anchors;  // (sing t, speech t)
  anchors.emplace_back(0.0, 0.0);
  for (std::size_t i = 0; i < sp_idx.size(); ++i) {
    const PhoneInterval& sp = speech_ann[sp_idx[i]];
    const PhoneInterval& sg = sing_ann[sg_idx[i]];
    anchors.emplace_back(sg.start_sec, sp.start_sec);
    anchors.emplace_back(sg.end_sec, sp.end_sec);
  }
  const double sing_total = sing_ann.back().end_sec;
  anchors.emplace_back(sing_total, speech.duration_sec());
  // Clamp to monotone (defends against anchors crossing the physical end).
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    anchors[i].first = std::max(anchors[i].first, anchors[i - 1].first);
    anchors[i].second = std::max(anchors[i].second, anchors[i - 1].second);
  }

  const auto speech_time = [&](double tau) {
    if (tau <= anchors.front().first) return anchors.front().second;
    for (std::size_t br = 1; br < anchors.size(); ++br) {
      if (tau <= anchors[br].first) {
        const double span = anchors[br].first - anchors[br - 1].first;
        if (span <= 0.0) return anchors[br].second;
        const double a = (tau - anchors[br - 1].first) / span;
        return anchors[br - 1].second +
               a * (anchors[br].second - anchors[br - 1].second);
      }
    }
    return anchors.back().second;
  };

  const StftConfig cfg{};
  const double hop_sec = static_cast<double>(cfg.hop) / speech.sample_rate;
  const int t_out = stft_frame_count(
      static_cast<std::size_t>(std::llround(sing_total * speech.sample_rate)),
      cfg);
  const double max_frame =
      static_cast<double>(stft_frame_count(speech.size(), cfg) - 1);
  std::vector<double> positions(static_cast<std::size_t>(t_out));
  for (int k = 0; k < t_out; ++k)
    positions[static_cast<std::size_t>(k)] = std::clamp(
        speech_time(k * hop_sec) / hop_sec, 0.0, max_frame);
  return detail::pv_resynth(speech, positions);
}

}  // namespace sts
