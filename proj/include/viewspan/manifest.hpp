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
#include <string>
#include <string_view>
#include <vector>

namespace viewspan {

enum class Label { kReal, kFake };
enum class PromptModality { kT2V, kI2V, kV2V, kNone };
enum class Split { kTrain, kTest };

inline constexpr std::string_view kManifestHeader =
    "id,path,label,generator,prompt_modality,split";

std::string_view to_string(Label label);
std::string_view to_string(PromptModality modality);
std::string_view to_string(Split split);

struct ManifestRow {
  std::string id;
  std::string path;
  Label label = Label::kReal;
  std::string generator;
  PromptModality prompt_modality = PromptModality::kNone;
  Split split = Split::kTrain;

  bool operator==(const ManifestRow&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;

  /// Throws FormatError (kDuplicateId / kInvariant) on violation; the
  /// reported location is the 1-based data line of the offending row + 1.
  void validate() const;
  std::string to_csv() const;

  bool operator==(const DatasetManifest&) const = default;
};

/// Parses manifest CSV text. Errors carry the 1-based line number.
DatasetManifest load_manifest(std::string_view text);

struct SplitResult {
  DatasetManifest manifest;
  /// One message per (label, generator) stratum too small to receive any
  /// test rows; those rows all stay in train.
  std::vector<std::string> warnings;
};

/// Deterministic stratified split: every (label, generator) stratum of size
/// n sends round(test_fraction * n) rows to test.
SplitResult split_train_test(const DatasetManifest& manifest,
                             double test_fraction, std::uint64_t seed);

}  // namespace viewspan
