// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

namespace sts {

// One annotated phone: a half-open time interval tagged with a dictionary
// index. A file's intervals are sorted by start and never overlap.
struct PhoneInterval {
  double start_sec = 0.0;
  double end_sec = 0.0;
  int phone = 0;
};

using PhoneAnnotation = std::vector<PhoneInterval>;

// Reads a phone annotation file: one interval per line as
// "start_sec end_sec phone_name", blank lines ignored. Violations (bad
// field, unknown phone, end <= start, out-of-order or overlapping
// intervals, empty file) raise ParseError naming the file and line.
PhoneAnnotation parse_annotation(const std::string& path);

struct Recording {
  std::string wav_path;
  std::string ann_path;
  PhoneAnnotation phones;
};

// A spoken and a sung rendition of the same song by the same speaker.
struct RecordingPair {
  std::string speaker_id;
  std::string song_id;
  Recording read;
  Recording sing;
};

struct Corpus {
  std::vector<RecordingPair> pairs;
};

// Scans `root/<speaker>/{read,sing}/<song>.wav` with a sibling `.txt`
// annotation for each wav. Every song found on either side must have all
// four files (both wavs, both annotations) or a PairingError names what is
// missing. Speakers and songs are visited in sorted order so the index is
// deterministic. Directories without a read/ or sing/ subdirectory are
// ignored. An unreadable root raises IoError.
Corpus load_corpus(const std::string& root);

}  // namespace sts
