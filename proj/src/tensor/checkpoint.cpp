// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/tensor/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "sts/error.hpp"

namespace sts {
namespace {

constexpr char kMagic[8] = {'S', 'T', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw FormatError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f32(std::ostream& os, const float* data, std::size_t n) {
  // Floats are stored as their IEEE-754 bit patterns, little-endian.
  static_assert(sizeof(float) == 4);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, data + i, 4);
    put_u32(os, bits);
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, kVersion);
  put_u64(os, ckpt.metadata.size());
  os.write(ckpt.metadata.data(),
           static_cast<std::streamsize>(ckpt.metadata.size()));
  put_u32(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<std::uint32_t>(t.shape().size()));
    for (int d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
    put_f32(os, t.data().data(), t.size());
  }
  os.flush();
  if (!os) throw IoError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open for reading: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("checkpoint: bad magic bytes: " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kVersion)
    throw UnsupportedError("checkpoint: unsupported format version " +
                           std::to_string(version));
  Checkpoint ckpt;
  const std::uint64_t meta_len = get_u64(is);
  ckpt.metadata.resize(meta_len);
  is.read(ckpt.metadata.data(), static_cast<std::streamsize>(meta_len));
  if (!is) throw FormatError("checkpoint: truncated metadata");
  const std::uint32_t count = get_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw FormatError("checkpoint: truncated tensor name");
    const std::uint32_t rank = get_u32(is);
    if (rank > 8) throw FormatError("checkpoint: implausible tensor rank");
    std::vector<int> shape;
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const std::uint32_t d = get_u32(is);
      if (d == 0 || d > std::numeric_limits<int>::max())
        throw FormatError("checkpoint: invalid tensor extent");
      shape.push_back(static_cast<int>(d));
      n *= d;
    }
    std::vector<float> data(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t bits = get_u32(is);
      std::memcpy(&data[j], &bits, 4);
    }
    ckpt.tensors.emplace_back(std::move(name),
                              TensorF::from(std::move(data), shape));
  }
  return ckpt;
}

}  // namespace sts
