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

#include "viewspan/manifest.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "viewspan/error.hpp"
#include "viewspan/rng.hpp"

namespace viewspan {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const Enum (&choices)[N],
                std::uint64_t line, const char* column) {
  for (Enum e : choices) {
    if (to_string(e) == text) return e;
  }
  throw FormatError(FormatErrorKind::kBadEnum, line,
                    std::string(column) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::kReal ? "real" : "fake";
}

std::string_view to_string(PromptModality modality) {
  switch (modality) {
    case PromptModality::kT2V: return "T2V";
    case PromptModality::kI2V: return "I2V";
    case PromptModality::kV2V: return "V2V";
    case PromptModality::kNone: return "NONE";
  }
  return "NONE";
}

std::string_view to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

void DatasetManifest::validate() const {
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ManifestRow& row = rows[i];
    const std::uint64_t line = i + 2;
    if (row.id.empty()) {
      throw FormatError(FormatErrorKind::kInvariant, line, "empty id");
    }
    if (!seen.insert(row.id).second) {
      throw FormatError(FormatErrorKind::kDuplicateId, line, row.id);
    }
    if (row.label == Label::kReal &&
        row.prompt_modality != PromptModality::kNone) {
      throw FormatError(FormatErrorKind::kInvariant, line,
                        "real row '" + row.id + "' must have modality NONE");
    }
  }
}

std::string DatasetManifest::to_csv() const {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const ManifestRow& row : rows) {
    out << row.id << ',' << row.path << ',' << to_string(row.label) << ','
        << row.generator << ',' << to_string(row.prompt_modality) << ','
        << to_string(row.split) << '\n';
  }
  return out.str();
}

DatasetManifest load_manifest(std::string_view text) {
  static constexpr Label kLabels[] = {Label::kReal, Label::kFake};
  static constexpr PromptModality kModalities[] = {
      PromptModality::kT2V, PromptModality::kI2V, PromptModality::kV2V,
      PromptModality::kNone};
  static constexpr Split kSplits[] = {Split::kTrain, Split::kTest};

  DatasetManifest manifest;
  std::unordered_set<std::string> ids;
  std::uint64_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kManifestHeader) {
        throw FormatError(FormatErrorKind::kBadHeader, line_no,
                          "expected '" + std::string(kManifestHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw FormatError(FormatErrorKind::kBadHeader, line_no,
                        "expected 6 fields, got " +
                            std::to_string(fields.size()));
    }
    ManifestRow row;
    row.id = fields[0];
    row.path = fields[1];
    row.label = parse_enum(fields[2], kLabels, line_no, "label");
    row.generator = fields[3];
    row.prompt_modality =
        parse_enum(fields[4], kModalities, line_no, "prompt_modality");
    row.split = parse_enum(fields[5], kSplits, line_no, "split");
    if (row.id.empty()) {
      throw FormatError(FormatErrorKind::kInvariant, line_no, "empty id");
    }
    if (!ids.insert(row.id).second) {
      throw FormatError(FormatErrorKind::kDuplicateId, line_no, row.id);
    }
    if (row.label == Label::kReal &&
        row.prompt_modality != PromptModality::kNone) {
      throw FormatError(FormatErrorKind::kInvariant, line_no,
                        "real row '" + row.id + "' must have modality NONE");
    }
    manifest.rows.push_back(std::move(row));
  }
  if (!header_seen) {
    throw FormatError(FormatErrorKind::kBadHeader, 1, "empty manifest");
  }
  return manifest;
}

SplitResult split_train_test(const DatasetManifest& manifest,
                             double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  manifest.validate();

  // Strata keep first-appearance order so results do not depend on map
  // iteration order of the key type.
  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const ManifestRow& row = manifest.rows[i];
    std::string key = std::string(to_string(row.label)) + '/' + row.generator;
    auto [it, inserted] = strata.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(i);
  }

  SplitResult result{manifest, {}};
  for (const std::string& key : keys) {
    std::vector<std::size_t> members = strata[key];
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    Rng rng(derive_seed(seed, key));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      result.manifest.rows[members[k]].split =
          k < n_test ? Split::kTest : Split::kTrain;
    }
    if (n_test == 0) {
      result.warnings.push_back("stratum " + key + " (" +
                                std::to_string(members.size()) +
                                " rows) too small for a test share; all train");
    }
  }
  return result;
}

}  // namespace viewspan
