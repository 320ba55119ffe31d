// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "sts/data/samples.hpp"

namespace sts {

struct SampleCache {
  std::vector<TrainSample> train;
  std::vector<TrainSample> test;
};

// True when `dir` holds a finished cache (its manifest exists).
bool cache_exists(const std::string& dir);

// Writes every sample to `dir`: waveforms as WAV, contour as text, phone
// annotations and frame labels as JSON, plus manifest.jsonl with one JSON
// object per sample ({id, split, speaker, song, frames}). The directory is
// created if needed; an existing manifest is overwritten. IoError on any
// write failure.
void write_sample_cache(const std::string& dir,
                        const std::vector<TrainSample>& train,
                        const std::vector<TrainSample>& test);

// Reads a cache back. IoError when the manifest (or a referenced file) is
// missing; FormatError on a corrupt manifest or metadata entry.
SampleCache read_sample_cache(const std::string& dir);

}  // namespace sts
