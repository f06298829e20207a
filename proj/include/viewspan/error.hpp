// Copyright 2026 The Viewspan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace viewspan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is well-formed but unusable (no overlap, single class, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  kBadMagic,
  kUnknownVersion,
  kUnknownDtype,
  kTruncated,
  kMissingEntry,
  kDimMismatch,
  kBadHeader,
  kBadEnum,
  kDuplicateId,
  kInvariant,
};

const char* to_string(FormatErrorKind kind);

/// Parse failure in one of the on-disk formats. `location` is a byte offset
/// for binary formats and a 1-based line number for CSV.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, std::uint64_t location,
              const std::string& detail);

  FormatErrorKind kind() const { return kind_; }
  std::uint64_t location() const { return location_; }

 private:
  FormatErrorKind kind_;
  std::uint64_t location_;
};

}  // namespace viewspan
