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

#include "viewspan/error.hpp"

namespace viewspan {

const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kBadMagic: return "bad magic";
    case FormatErrorKind::kUnknownVersion: return "unknown version";
    case FormatErrorKind::kUnknownDtype: return "unknown dtype";
    case FormatErrorKind::kTruncated: return "truncated";
    case FormatErrorKind::kMissingEntry: return "missing entry";
    case FormatErrorKind::kDimMismatch: return "dim mismatch";
    case FormatErrorKind::kBadHeader: return "bad header";
    case FormatErrorKind::kBadEnum: return "bad enum value";
    case FormatErrorKind::kDuplicateId: return "duplicate id";
    case FormatErrorKind::kInvariant: return "invariant violation";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrorKind kind, std::uint64_t location,
                         const std::string& detail)
    : Error(std::string(to_string(kind)) + " at " + std::to_string(location) +
            ": " + detail),
      kind_(kind),
      location_(location) {}

}  // namespace viewspan
