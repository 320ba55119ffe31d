// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sts/tensor/tensor.hpp"

namespace sts {

// Binary tensor bundle written by training and read back for inference.
//
// Layout (all integers little-endian):
//   8 bytes  magic "STSCKPT1"
//   u32      format version (currently 1)
//   u64      metadata length, then that many bytes of UTF-8 JSON
//   u32      tensor count
//   per tensor: u32 name length + name bytes, u32 rank, u32 extents[rank],
//              raw float32 data (row-major)
//
// Tensor order is preserved, so identical inputs serialize byte-for-byte
// identically.
struct Checkpoint {
  std::string metadata;  // JSON string; empty allowed
  std::vector<std::pair<std::string, TensorF>> tensors;

  const TensorF* find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return &t;
    return nullptr;
  }
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sts
