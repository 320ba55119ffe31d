// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/data/phoneme_dict.hpp"

#include <cctype>

#include "sts/error.hpp"

namespace sts {

namespace {

const char* const kNames[PhonemeDict::kSize] = {
    "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH", "EH",
    "ER", "EY", "F",  "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M",
    "N",  "NG", "OW", "OY", "P",  "R",  "S",  "SH", "T",  "TH", "UH",
    "UW", "V",  "W",  "Y",  "Z",  "ZH", "SIL", "INH"};

std::string to_upper(const std::string& s) {
  std::string up = s;
  for (char& c : up)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return up;
}

}  // namespace

PhonemeDict::PhonemeDict() {
  names_.assign(kNames, kNames + kSize);
  for (int i = 0; i < kSize; ++i) index_.emplace(names_[static_cast<std::size_t>(i)], i);
}

const PhonemeDict& PhonemeDict::get() {
  static const PhonemeDict dict;
  return dict;
}

int PhonemeDict::find(const std::string& name) const noexcept {
  const auto it = index_.find(to_upper(name));
  return it == index_.end() ? -1 : it->second;
}

int PhonemeDict::index(const std::string& name) const {
  const int i = find(name);
  if (i < 0) throw ParseError("unknown phone name: " + name);
  return i;
}

const std::string& PhonemeDict::name(int idx) const {
  if (idx < 0 || idx >= kSize)
    throw IndexError("phone index out of range: " + std::to_string(idx));
  return names_[static_cast<std::size_t>(idx)];
}

}  // namespace sts
