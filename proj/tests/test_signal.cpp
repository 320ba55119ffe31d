// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sts/error.hpp"
#include "sts/eval/yin.hpp"
#include "sts/signal/resample.hpp"
#include "sts/signal/stft.hpp"
#include "sts/signal/wav.hpp"
#include "util.hpp"

using namespace sts;

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

// Minimal RIFF writer for crafting inputs the library writer cannot produce
// (stereo, float32, exotic format codes).
std::string make_riff(std::uint16_t format, std::uint16_t channels,
                      std::uint32_t rate, std::uint16_t bits,
                      const std::string& payload) {
  std::string fmt;
  put_u16(fmt, format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string file = "RIFF";
  put_u32(file, static_cast<std::uint32_t>(body.size()));
  file += body;
  return file;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  REQUIRE(f.good());
}

}  // namespace

TEST_CASE("read_wav: pcm16 silence") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(16000, 0.f);
  write_wav(w, "sig_silence.wav");
  const Waveform r = read_wav("sig_silence.wav");
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.size() == 16000);
  for (float s : r.samples) CHECK(s == 0.f);
}

TEST_CASE("read_wav: stereo averages to mono") {
  std::string payload;
  for (int i = 0; i < 100; ++i) {
    put_u16(payload, static_cast<std::uint16_t>(16384));   // +0.5
    put_u16(payload, static_cast<std::uint16_t>(-16384));  // -0.5
  }
  write_file("sig_stereo.wav", make_riff(1, 2, 16000, 16, payload));
  const Waveform r = read_wav("sig_stereo.wav");
  REQUIRE(r.size() == 100);
  for (float s : r.samples) CHECK(s == doctest::Approx(0.f).epsilon(1e-9));
}

TEST_CASE("read_wav: full-scale pcm16 value") {
  std::string payload;
  put_u16(payload, 32767);
  write_file("sig_fullscale.wav", make_riff(1, 1, 16000, 16, payload));
  const Waveform r = read_wav("sig_fullscale.wav");
  REQUIRE(r.size() == 1);
  CHECK(r.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-9));
}

TEST_CASE("read_wav: float32 payload") {
  std::string payload;
  const float vals[3] = {0.25f, -0.75f, 1.0f};
  for (float v : vals) {
    std::uint32_t u;
    static_assert(sizeof(u) == sizeof(v));
    std::memcpy(&u, &v, 4);
    put_u32(payload, u);
  }
  write_file("sig_f32.wav", make_riff(3, 1, 16000, 32, payload));
  const Waveform r = read_wav("sig_f32.wav");
  REQUIRE(r.size() == 3);
  CHECK(r.samples[0] == doctest::Approx(0.25f));
  CHECK(r.samples[1] == doctest::Approx(-0.75f));
  CHECK(r.samples[2] == doctest::Approx(1.0f));
}

TEST_CASE("read_wav: malformed header and unsupported encoding") {
  write_file("sig_bad.wav", "NOTRIFFDATA");
  CHECK_THROWS_AS(read_wav("sig_bad.wav"), FormatError);
  std::string payload;
  put_u16(payload, 0);
  write_file("sig_alaw.wav", make_riff(6, 1, 8000, 8, payload));
  CHECK_THROWS_AS(read_wav("sig_alaw.wav"), UnsupportedError);
  CHECK_THROWS_AS(read_wav("sig_missing_file.wav"), IoError);
}

TEST_CASE("write_wav: quantization round trip") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples = tst::rand_signal(4096, 7, 0.999);
  write_wav(w, "sig_rt.wav");
  const Waveform r = read_wav("sig_rt.wav");
  REQUIRE(r.size() == w.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    max_err = std::max(max_err,
                       static_cast<double>(std::abs(w.samples[i] - r.samples[i])));
  CHECK(max_err <= 1.0 / 32768.0 + 1e-12);
}

TEST_CASE("write_wav: empty waveform is a valid file") {
  Waveform w;
  w.sample_rate = 16000;
  write_wav(w, "sig_empty.wav");
  const Waveform r = read_wav("sig_empty.wav");
  CHECK(r.size() == 0);
  CHECK(r.sample_rate == 16000);
}

TEST_CASE("write_wav: out-of-range samples clip") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples = {1.5f, -1.5f};
  write_wav(w, "sig_clip.wav");
  const Waveform r = read_wav("sig_clip.wav");
  REQUIRE(r.size() == 2);
  CHECK(r.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(r.samples[1] == doctest::Approx(-1.0));
}

TEST_CASE("write_wav: unwritable path") {
  Waveform w;
  w.sample_rate = 16000;
  CHECK_THROWS_AS(write_wav(w, "no_such_dir/sig.wav"), IoError);
}

TEST_CASE("resample: length ratio and identity") {
  Waveform w;
  w.sample_rate = 44100;
  w.samples = tst::rand_signal(44100, 11);
  const Waveform r = resample(w, 16000);
  CHECK(r.size() == 16000);
  CHECK(r.sample_rate == 16000);

  const Waveform same = resample(w, 44100);
  REQUIRE(same.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(same.samples[i] == w.samples[i]);
}

TEST_CASE("resample: 440 Hz tone keeps its pitch across 44.1k->16k") {
  const Waveform w = tst::tone(440.0, 1.0, 44100);
  const Waveform r = resample(w, 16000);
  const MelodyContour c = yin_f0(r);
  int voiced = 0;
  for (float f : c.f0) {
    if (f <= 0.f) continue;
    ++voiced;
    CHECK(std::abs(f - 440.f) / 440.f < 0.005);
  }
  CHECK(voiced > static_cast<int>(c.size()) / 2);
}

TEST_CASE("resample: linearity") {
  Waveform w;
  w.sample_rate = 44100;
  w.samples = tst::rand_signal(8000, 13);
  Waveform w2 = w;
  for (auto& s : w2.samples) s *= 0.3f;
  const Waveform a = resample(w, 16000);
  const Waveform b = resample(w2, 16000);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(b.samples[i] - 0.3f * a.samples[i]) <= 1e-6f);
}

TEST_CASE("stft: DC concentrates in bin 0") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(8192, 0.25f);
  const StftConfig cfg;
  const ComplexSpectrogram s = stft(w, cfg);
  REQUIRE(s.num_bins() == 513);
  const int t = s.num_frames() / 2;
  const float dc = std::abs(s.bins(0, t));
  CHECK(dc > 1.0f);
  for (int f = 2; f < 513; ++f) CHECK(std::abs(s.bins(f, t)) < 1e-3f * dc);
}

TEST_CASE("stft: 1 kHz tone peaks at bin 64") {
  const Waveform w = tst::tone(1000.0, 1.0);
  const StftConfig cfg;
  const ComplexSpectrogram s = stft(w, cfg);
  for (int t = 4; t < s.num_frames() - 4; ++t) {
    int arg = 0;
    float best = 0.f;
    for (int f = 0; f < s.num_bins(); ++f) {
      const float m = std::abs(s.bins(f, t));
      if (m > best) {
        best = m;
        arg = f;
      }
    }
    CHECK(arg == 64);
  }
}

TEST_CASE("stft: zero signal, frame count") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(10000, 0.f);
  const StftConfig cfg;
  const ComplexSpectrogram s = stft(w, cfg);
  CHECK(s.num_frames() == 1 + 10000 / 256);
  CHECK(s.num_frames() == stft_frame_count(w.size(), cfg));
  for (int t = 0; t < s.num_frames(); ++t)
    for (int f = 0; f < s.num_bins(); ++f)
      CHECK(std::abs(s.bins(f, t)) == 0.f);
}

TEST_CASE("stft: per-frame Parseval identity") {
  const Waveform w = tst::tone(731.0, 0.5, 16000, 0.7);
  const StftConfig cfg;
  const ComplexSpectrogram s = stft(w, cfg);
  const std::vector<float> win = make_window(cfg.window, cfg.window_len);
  // Reconstruct the padded frame the transform saw, via the same reflection.
  std::vector<float> padded(w.size() + cfg.fft_size, 0.f);
  const int pad = cfg.fft_size / 2;
  const int n = static_cast<int>(w.size());
  for (int i = 0; i < n + 2 * pad; ++i) {
    int j = i - pad;
    if (j < 0) j = -j;
    if (j >= n) j = 2 * (n - 1) - j;
    padded[static_cast<std::size_t>(i)] = w.samples[static_cast<std::size_t>(j)];
  }
  for (int t = 4; t < s.num_frames() - 4; ++t) {
    double time_e = 0.0;
    for (int i = 0; i < cfg.window_len; ++i) {
      const double v = padded[static_cast<std::size_t>(t * cfg.hop + i)] *
                       win[static_cast<std::size_t>(i)];
      time_e += v * v;
    }
    double spec_e = std::norm(std::complex<double>(s.bins(0, t)));
    spec_e += std::norm(std::complex<double>(s.bins(512, t)));
    for (int f = 1; f < 512; ++f)
      spec_e += 2.0 * std::norm(std::complex<double>(s.bins(f, t)));
    spec_e /= cfg.fft_size;
    CHECK(time_e == doctest::Approx(spec_e).epsilon(1e-4));
  }
}

TEST_CASE("istft: white-noise round trip tops 60 dB") {
  const StftConfig cfg;
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    Waveform w;
    w.sample_rate = 16000;
    const int n = 8000 + static_cast<int>(seed) * 1551;
    w.samples = tst::rand_signal(n, seed);
    const Waveform r = istft(stft(w, cfg), cfg);
    CHECK(tst::snr_db(w.samples, r.samples, 1024) > 60.0);
  }
}

TEST_CASE("istft: zeros and single-frame shape") {
  StftConfig cfg;
  ComplexSpectrogram s;
  s.bins.setZero(513, 5);
  const Waveform z = istft(s, cfg);
  CHECK(z.size() == 4 * 256);
  for (float v : z.samples) CHECK(v == 0.f);

  StftConfig flat;
  flat.centered = false;
  ComplexSpectrogram one;
  one.bins.setZero(513, 1);
  one.bins(10, 0) = std::complex<float>(3.f, 0.f);
  const Waveform r = istft(one, flat);
  CHECK(r.size() == static_cast<std::size_t>(flat.window_len));
}
