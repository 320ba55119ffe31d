// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/data/cache.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sts/data/phoneme_dict.hpp"
#include "sts/error.hpp"

namespace sts {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json annotation_to_json(const PhoneAnnotation& ann) {
  json arr = json::array();
  for (const auto& iv : ann)
    arr.push_back({{"start", iv.start_sec},
                   {"end", iv.end_sec},
                   {"phone", PhonemeDict::get().name(iv.phone)}});
  return arr;
}

PhoneAnnotation annotation_from_json(const json& arr) {
  PhoneAnnotation ann;
  for (const auto& item : arr)
    ann.push_back({item.at("start").get<double>(),
                   item.at("end").get<double>(),
                   PhonemeDict::get().index(item.at("phone").get<std::string>())});
  return ann;
}

std::string sample_id(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%05zu", n);
  return buf;
}

void write_one(const fs::path& dir, const std::string& id,
               const std::string& split, const TrainSample& s,
               std::ofstream& manifest) {
  write_wav(s.speech, (dir / (id + ".speech.wav")).string());
  write_wav(s.singing, (dir / (id + ".sing.wav")).string());
  write_contour(s.contour, (dir / (id + ".contour.txt")).string());
  json meta;
  meta["speaker"] = s.speaker_id;
  meta["song"] = s.song_id;
  meta["frame_phones"] = s.frame_phones;
  meta["speech_phones"] = annotation_to_json(s.speech_phones);
  meta["singing_phones"] = annotation_to_json(s.singing_phones);
  {
    std::ofstream out(dir / (id + ".meta.json"));
    if (!out) throw IoError("cannot write sample metadata for " + id);
    out << meta.dump(2) << "\n";
  }
  manifest << json{{"id", id},
                   {"split", split},
                   {"speaker", s.speaker_id},
                   {"song", s.song_id},
                   {"frames", s.contour.size()}}
                  .dump()
           << "\n";
}

TrainSample read_one(const fs::path& dir, const std::string& id) {
  TrainSample s;
  s.speech = read_wav((dir / (id + ".speech.wav")).string());
  s.singing = read_wav((dir / (id + ".sing.wav")).string());
  s.contour = read_contour((dir / (id + ".contour.txt")).string());
  std::ifstream in(dir / (id + ".meta.json"));
  if (!in) throw IoError("missing sample metadata for " + id);
  json meta;
  try {
    in >> meta;
    s.speaker_id = meta.at("speaker").get<std::string>();
    s.song_id = meta.at("song").get<std::string>();
    s.frame_phones = meta.at("frame_phones").get<std::vector<int>>();
    s.speech_phones = annotation_from_json(meta.at("speech_phones"));
    s.singing_phones = annotation_from_json(meta.at("singing_phones"));
  } catch (const json::exception& e) {
    throw FormatError("corrupt sample metadata for " + id + ": " + e.what());
  }
  return s;
}

}  // namespace

bool cache_exists(const std::string& dir) {
  return fs::is_regular_file(fs::path(dir) / "manifest.jsonl");
}

void write_sample_cache(const std::string& dir,
                        const std::vector<TrainSample>& train,
                        const std::vector<TrainSample>& test) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  std::ofstream manifest(root / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw IoError("cannot write manifest in " + dir);
  std::size_t n = 0;
  for (const auto& s : train) write_one(root, sample_id(n++), "train", s, manifest);
  for (const auto& s : test) write_one(root, sample_id(n++), "test", s, manifest);
  manifest.flush();
  if (!manifest) throw IoError("failed writing manifest in " + dir);
}

SampleCache read_sample_cache(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream manifest(root / "manifest.jsonl");
  if (!manifest) throw IoError("no manifest in " + dir);
  SampleCache cache;
  std::string line;
  int lineno = 0;
  while (std::getline(manifest, line)) {
    ++lineno;
    if (line.empty()) continue;
    json row;
    std::string id, split;
    try {
      row = json::parse(line);
      id = row.at("id").get<std::string>();
      split = row.at("split").get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " +
                        e.what());
    }
    if (split != "train" && split != "test")
      throw FormatError("manifest line " + std::to_string(lineno) +
                        ": unknown split: " + split);
    auto& bucket = split == "train" ? cache.train : cache.test;
    bucket.push_back(read_one(root, id));
  }
  return cache;
}

}  // namespace sts
