// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/prep/contour.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sts/error.hpp"

namespace sts {

namespace {
constexpr float kF0Min = 50.0f;
constexpr float kF0Max = 1500.0f;
}  // namespace

int MelodyContour::voiced_count() const {
  int n = 0;
  for (float v : f0)
    if (v > 0.f) ++n;
  return n;
}

int frequency_to_bin(double f0_hz, int fft_size, int sample_rate) {
  // Half-up so boundary ties are deterministic.
  return static_cast<int>(std::floor(f0_hz * fft_size / sample_rate + 0.5));
}

ContourImage rasterize_contour(const MelodyContour& c, int num_bins,
                               int fft_size, int sample_rate) {
  ContourImage img;
  img.mask = Eigen::ArrayXXf::Zero(num_bins, static_cast<Eigen::Index>(c.size()));
  const double nyquist = 0.5 * sample_rate;
  for (std::size_t t = 0; t < c.size(); ++t) {
    const float f0 = c.f0[t];
    if (f0 <= 0.f) continue;  // unvoiced -> all-zero column
    if (f0 >= nyquist)
      throw ParamError("rasterize_contour: f0 at or above Nyquist");
    const int bin = frequency_to_bin(f0, fft_size, sample_rate);
    if (bin < 0 || bin >= num_bins)
      throw ParamError("rasterize_contour: bin outside raster");
    img.mask(bin, static_cast<Eigen::Index>(t)) = 1.f;
  }
  return img;
}

MelodyContour read_contour(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  MelodyContour c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double t, f0;
    if (!(ss >> t >> f0))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 'time_sec<TAB>f0_hz'");
    const double expected = c.frame_hop_sec * static_cast<double>(c.f0.size());
    if (std::abs(t - expected) > 1e-4)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": frame period must be 16 ms");
    if (f0 != 0.0 && (f0 < kF0Min || f0 > kF0Max))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": voiced f0 outside [50, 1500] Hz");
    c.f0.push_back(static_cast<float>(f0));
  }
  return c;
}

void write_contour(const MelodyContour& c, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[64];
  for (std::size_t t = 0; t < c.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%.3f\t%.3f\n", c.frame_hop_sec * t,
                  static_cast<double>(c.f0[t]));
    out << buf;
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace sts
