// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace sts {

// The 41-class phone inventory: the 39 CMU phones plus SIL (silence) and
// INH (inhalation). Indices are stable across runs — the CMU phones occupy
// 0..38 in alphabetical order, SIL is 39, INH is 40.
class PhonemeDict {
 public:
  static constexpr int kSize = 41;
  static constexpr int kSil = 39;
  static constexpr int kInh = 40;

  static const PhonemeDict& get();

  int size() const { return kSize; }

  // Case-insensitive lookup; -1 when the name is unknown.
  int find(const std::string& name) const noexcept;

  // Case-insensitive lookup; throws ParseError when the name is unknown.
  int index(const std::string& name) const;

  // Canonical (upper-case) name; throws IndexError when out of range.
  const std::string& name(int idx) const;

  static bool is_silence(int idx) { return idx == kSil || idx == kInh; }

 private:
  PhonemeDict();
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace sts
