// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "sts/error.hpp"
#include "sts/eval/yin.hpp"
#include "sts/prep/contour.hpp"
#include "sts/prep/logmag.hpp"
#include "sts/prep/silence.hpp"
#include "sts/prep/vocoder.hpp"
#include "sts/signal/stft.hpp"
#include "util.hpp"

using namespace sts;

namespace {

Waveform concat(const std::vector<Waveform>& parts) {
  Waveform out;
  out.sample_rate = parts.empty() ? 16000 : parts.front().sample_rate;
  for (const auto& p : parts)
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  return out;
}

Waveform zeros(int n, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.assign(static_cast<std::size_t>(n), 0.f);
  return w;
}

// Independent silent-frame oracle: counts samples that fall in hop spans of
// silent runs of length >= 3, using the documented energy rule.
int expected_removed_samples(const Waveform& w) {
  const int n = static_cast<int>(w.size());
  const int frames = (n - 1024) / 256 + 1;
  std::vector<double> e(static_cast<std::size_t>(frames), 0.0);
  double emax = 0.0;
  for (int k = 0; k < frames; ++k) {
    for (int i = 0; i < 1024; ++i) {
      const double v = w.samples[static_cast<std::size_t>(k * 256 + i)];
      e[static_cast<std::size_t>(k)] += v * v;
    }
    emax = std::max(emax, e[static_cast<std::size_t>(k)]);
  }
  int removed = 0;
  int k = 0;
  while (k < frames) {
    if (e[static_cast<std::size_t>(k)] > emax * 1e-4) {
      ++k;
      continue;
    }
    int end = k;
    while (end < frames && e[static_cast<std::size_t>(end)] <= emax * 1e-4)
      ++end;
    if (end - k >= 3) removed += (end - k) * 256;
    k = end;
  }
  return removed;
}

}  // namespace

TEST_CASE("remove_silent_frames: pure tone untouched") {
  const Waveform w = tst::tone(300.0, 1.0);
  const Waveform r = remove_silent_frames(w);
  REQUIRE(r.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(r.samples[i] == w.samples[i]);
}

TEST_CASE("remove_silent_frames: long zero run excised") {
  const Waveform w =
      concat({tst::tone(300.0, 1.0), zeros(8000), tst::tone(500.0, 1.0)});
  const int removed = expected_removed_samples(w);
  CHECK(removed > 0);
  const Waveform r = remove_silent_frames(w);
  CHECK(r.size() == w.size() - static_cast<std::size_t>(removed));
  CHECK(r.duration_sec() > 1.9);
  CHECK(r.duration_sec() < 2.2);
  // Leading tone is untouched: the first second must match bit for bit.
  for (int i = 0; i < 16000; ++i)
    CHECK(r.samples[static_cast<std::size_t>(i)] ==
          w.samples[static_cast<std::size_t>(i)]);
}

TEST_CASE("remove_silent_frames: two-frame dip is kept") {
  // 1280 zero samples aligned on the hop grid cover exactly two full frames.
  const Waveform w =
      concat({tst::tone(300.0, 0.8), zeros(1280), tst::tone(300.0, 0.8)});
  REQUIRE(static_cast<int>(w.size()) % 256 == 0);
  const Waveform r = remove_silent_frames(w);
  REQUIRE(r.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(r.samples[i] == w.samples[i]);
}

TEST_CASE("remove_silent_frames: all-silent input is an error") {
  CHECK_THROWS_AS(remove_silent_frames(zeros(16000)), ContractError);
  CHECK_THROWS_AS(remove_silent_frames(zeros(100)), ParamError);  // < 1 frame
}

TEST_CASE("remove_silent_frames: idempotent") {
  for (int trial = 0; trial < 4; ++trial) {
    const Waveform w = concat({tst::tone(200.0 + 50 * trial, 0.7),
                               zeros(3000 + 700 * trial),
                               tst::tone(400.0, 0.5), zeros(900),
                               tst::tone(350.0, 0.6)});
    const Waveform once = remove_silent_frames(w);
    const Waveform twice = remove_silent_frames(once);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i)
      CHECK(twice.samples[i] == once.samples[i]);
  }
}

TEST_CASE("time_stretch: identity rate") {
  const Waveform w = tst::tone(440.0, 1.0);
  const Waveform r = time_stretch(w, 1.0);
  CHECK(std::llabs(static_cast<long long>(r.size()) -
                   static_cast<long long>(w.size())) <= 256);
  CHECK(tst::snr_db(w.samples, r.samples, 1024) > 40.0);
}

TEST_CASE("time_stretch: half rate doubles a 440 Hz tone") {
  const Waveform w = tst::tone(440.0, 1.0);
  const Waveform r = time_stretch(w, 0.5);
  CHECK(std::llabs(static_cast<long long>(r.size()) - 32000) <= 256);
  const MelodyContour c = yin_f0(r);
  int voiced = 0;
  CHECK(tst::max_rel_f0_err(c, 440.0, &voiced) < 0.01);
  CHECK(voiced > static_cast<int>(c.size()) / 2);
}

TEST_CASE("time_stretch: double rate halves duration") {
  const Waveform w = tst::tone(440.0, 1.0);
  const Waveform r = time_stretch(w, 2.0);
  CHECK(std::llabs(static_cast<long long>(r.size()) - 8000) <= 256);
}

TEST_CASE("time_stretch: rate guard and composition") {
  const Waveform w = tst::tone(440.0, 0.5);
  CHECK_THROWS_AS(time_stretch(w, 0.05), ParamError);
  CHECK_THROWS_AS(time_stretch(w, 11.0), ParamError);
  const Waveform back = time_stretch(time_stretch(w, 1.3), 1.0 / 1.3);
  CHECK(std::llabs(static_cast<long long>(back.size()) -
                   static_cast<long long>(w.size())) <= 512);
}

TEST_CASE("stretch_to_contour: frame-count agreement") {
  const StftConfig cfg;
  const Waveform w = tst::tone(220.0, 1.0);

  MelodyContour same;
  same.f0.assign(static_cast<std::size_t>(stft_frame_count(w.size(), cfg)),
                 220.f);
  const Waveform id = stretch_to_contour(w, same);
  REQUIRE(id.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(id.samples[i] == w.samples[i]);

  MelodyContour twice;
  twice.f0.assign(2 * same.f0.size(), 220.f);
  const Waveform r = stretch_to_contour(w, twice);
  CHECK(stft_frame_count(r.size(), cfg) == static_cast<int>(twice.size()));

  MelodyContour empty;
  CHECK_THROWS_AS(stretch_to_contour(w, empty), ParamError);
}

TEST_CASE("stretch_to_contour: factor guard propagates") {
  Waveform w = tst::tone(220.0, 1.0);
  w.samples.resize(2305);  // exactly 10 analysis frames
  MelodyContour far;
  far.f0.assign(100, 220.f);  // needs a factor below 0.1
  CHECK_THROWS_AS(stretch_to_contour(w, far), ParamError);
}

TEST_CASE("pitch_shift: zero shift is near identity") {
  const Waveform w = tst::tone(440.0, 1.0);
  const Waveform r = pitch_shift(w, 0.0);
  CHECK(std::llabs(static_cast<long long>(r.size()) -
                   static_cast<long long>(w.size())) <= 256);
  CHECK(tst::snr_db(w.samples, r.samples, 1024) > 40.0);
}

TEST_CASE("pitch_shift: octave up and semitone down") {
  const Waveform w220 = tst::tone(220.0, 1.0);
  const Waveform up = pitch_shift(w220, 12.0);
  CHECK(std::llabs(static_cast<long long>(up.size()) -
                   static_cast<long long>(w220.size())) <= 256);
  const MelodyContour cu = yin_f0(up);
  int voiced = 0;
  CHECK(tst::max_rel_f0_err(cu, 440.0, &voiced) < 0.01);
  CHECK(voiced > static_cast<int>(cu.size()) / 2);

  const Waveform w440 = tst::tone(440.0, 1.0);
  const Waveform down = pitch_shift(w440, -1.0);
  const double target = 440.0 * std::pow(2.0, -1.0 / 12.0);
  const MelodyContour cd = yin_f0(down);
  voiced = 0;
  CHECK(tst::max_rel_f0_err(cd, target, &voiced) < 0.01);
  CHECK(voiced > static_cast<int>(cd.size()) / 2);

  CHECK_THROWS_AS(pitch_shift(w440, 13.0), ParamError);
}

TEST_CASE("log_mag: values and inverse") {
  ComplexSpectrogram s;
  s.bins.setZero(513, 3);
  s.bins(0, 0) = std::complex<float>(0.f, 0.f);
  s.bins(1, 0) = std::complex<float>(static_cast<float>(M_E) - 1.f, 0.f);
  s.bins(2, 1) = std::complex<float>(0.f, 2.5f);
  const LogMagSpectrogram m = log_mag(s);
  CHECK(m.num_bins() == 513);
  CHECK(m.num_frames() == 3);
  CHECK(m.values(0, 0) == 0.f);
  CHECK(m.values(1, 0) == doctest::Approx(1.f).epsilon(1e-6));
  // g(f(x)) = x within relative 1e-6, and monotone in the magnitude.
  for (int f = 0; f < 513; ++f)
    for (int t = 0; t < 3; ++t) {
      const float mag = std::abs(s.bins(f, t));
      const float rec = std::expm1(m.values(f, t));
      CHECK(std::abs(rec - mag) <= 1e-6f * std::max(1.f, mag));
    }
  CHECK(m.values(2, 1) > m.values(1, 0));
}

TEST_CASE("rasterize_contour: bins, ties, voiced columns") {
  MelodyContour c;
  c.f0 = {440.f, 0.f, 445.3125f, 1500.f};
  const ContourImage img = rasterize_contour(c, 513, 1024, 16000);
  REQUIRE(img.mask.rows() == 513);
  REQUIRE(img.mask.cols() == 4);
  // 440*1024/16000 = 28.16 -> 28; 445.3125*1024/16000 = 28.5 -> half-up 29.
  CHECK(img.mask(28, 0) == 1.f);
  CHECK(img.mask(29, 2) == 1.f);
  CHECK(img.mask(96, 3) == 1.f);
  for (int t = 0; t < 4; ++t) {
    const float sum = img.mask.col(t).sum();
    CHECK(sum == (c.f0[static_cast<std::size_t>(t)] > 0.f ? 1.f : 0.f));
  }

  MelodyContour quiet;
  quiet.f0 = {0.f, 0.f};
  const ContourImage empty = rasterize_contour(quiet, 513, 1024, 16000);
  CHECK(empty.mask.sum() == 0.f);

  MelodyContour hot;
  hot.f0 = {9000.f};
  CHECK_THROWS_AS(rasterize_contour(hot, 513, 1024, 16000), ParamError);
}

TEST_CASE("contour file round trip") {
  MelodyContour c;
  c.f0 = {440.f, 0.f, 415.25f, 1499.5f, 50.f};
  write_contour(c, "prep_contour.tsv");
  const MelodyContour r = read_contour("prep_contour.tsv");
  REQUIRE(r.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(r.f0[i] == doctest::Approx(c.f0[i]).epsilon(1e-5));
  CHECK(r.frame_hop_sec == doctest::Approx(0.016));
}

TEST_CASE("yin: tones, silence, noise") {
  const Waveform w = tst::tone(440.0, 1.0);
  const MelodyContour c = yin_f0(w);
  CHECK(static_cast<int>(c.size()) == stft_frame_count(w.size(), StftConfig{}));
  int voiced = 0;
  for (float f : c.f0) {
    if (f <= 0.f) continue;
    ++voiced;
    CHECK(std::abs(f - 440.f) / 440.f < 0.005);
  }
  CHECK(voiced > static_cast<int>(c.size()) * 3 / 4);

  const MelodyContour s = yin_f0(zeros(8000));
  for (float f : s.f0) CHECK(f == 0.f);
}
