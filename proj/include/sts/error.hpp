// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace sts {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file contents (bad header, truncated chunk, ...).
struct FormatError : Error {
  using Error::Error;
};

// Well-formed input using a feature we do not handle (e.g. 24-bit PCM).
struct UnsupportedError : Error {
  using Error::Error;
};

// Filesystem-level failure.
struct IoError : Error {
  using Error::Error;
};

// Argument outside its documented range.
struct ParamError : Error {
  using Error::Error;
};

// Incompatible tensor/matrix extents.
struct ShapeError : Error {
  using Error::Error;
};

// Out-of-range class or element index.
struct IndexError : Error {
  using Error::Error;
};

// A caller-facing precondition failed at runtime (empty mask, non-scalar
// loss, all-silent input, ...).
struct ContractError : Error {
  using Error::Error;
};

// Text parse failure; message carries the offending line number.
struct ParseError : Error {
  using Error::Error;
};

// Read/sing recordings that cannot be paired.
struct PairingError : Error {
  using Error::Error;
};

// Phone sequences or word counts that do not line up.
struct AlignError : Error {
  using Error::Error;
};

// Invalid configuration key, value, or variant name.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace sts
