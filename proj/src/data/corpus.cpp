// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/data/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sts/data/phoneme_dict.hpp"
#include "sts/error.hpp"

namespace sts {

namespace fs = std::filesystem;

namespace {

std::string at_line(const std::string& path, int line) {
  return path + ":" + std::to_string(line) + ": ";
}

}  // namespace

PhoneAnnotation parse_annotation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  PhoneAnnotation out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ss(line);
    double start = 0, end = 0;
    std::string phone, extra;
    if (!(ss >> start >> end >> phone))
      throw ParseError(at_line(path, lineno) +
                       "expected 'start_sec end_sec phone'");
    if (ss >> extra)
      throw ParseError(at_line(path, lineno) + "trailing content: " + extra);
    if (start < 0 || !(end > start))
      throw ParseError(at_line(path, lineno) +
                       "interval end must exceed a non-negative start");
    const int idx = PhonemeDict::get().find(phone);
    if (idx < 0)
      throw ParseError(at_line(path, lineno) + "unknown phone name: " + phone);
    if (!out.empty()) {
      if (start < out.back().start_sec)
        throw ParseError(at_line(path, lineno) + "intervals out of order");
      if (start < out.back().end_sec - 1e-9)
        throw ParseError(at_line(path, lineno) + "overlapping intervals");
    }
    out.push_back({start, end, idx});
  }
  if (out.empty()) throw ParseError(path + ": no intervals");
  return out;
}

Corpus load_corpus(const std::string& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw IoError("corpus root is not a directory: " + root);

  std::vector<std::string> speakers;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) speakers.push_back(entry.path().filename().string());
  std::sort(speakers.begin(), speakers.end());

  Corpus corpus;
  for (const auto& speaker : speakers) {
    const fs::path read_dir = fs::path(root) / speaker / "read";
    const fs::path sing_dir = fs::path(root) / speaker / "sing";
    const bool has_read = fs::is_directory(read_dir);
    const bool has_sing = fs::is_directory(sing_dir);
    if (!has_read && !has_sing) continue;  // not a speaker layout

    std::set<std::string> songs;
    for (const fs::path& dir : {read_dir, sing_dir}) {
      if (!fs::is_directory(dir)) continue;
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
          songs.insert(entry.path().stem().string());
    }

    for (const auto& song : songs) {
      RecordingPair pair;
      pair.speaker_id = speaker;
      pair.song_id = song;
      pair.read.wav_path = (read_dir / (song + ".wav")).string();
      pair.read.ann_path = (read_dir / (song + ".txt")).string();
      pair.sing.wav_path = (sing_dir / (song + ".wav")).string();
      pair.sing.ann_path = (sing_dir / (song + ".txt")).string();
      for (const std::string* p : {&pair.read.wav_path, &pair.read.ann_path,
                                   &pair.sing.wav_path, &pair.sing.ann_path})
        if (!fs::is_regular_file(*p))
          throw PairingError("speaker '" + speaker + "' song '" + song +
                             "': missing " + *p);
      pair.read.phones = parse_annotation(pair.read.ann_path);
      pair.sing.phones = parse_annotation(pair.sing.ann_path);
      corpus.pairs.push_back(std::move(pair));
    }
  }
  return corpus;
}

}  // namespace sts
