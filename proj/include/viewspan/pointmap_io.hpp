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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewspan/geometry.hpp"
#include "viewspan/pair_record.hpp"

namespace viewspan {

inline constexpr std::string_view kPointMapMagic = "PMAP";
inline constexpr std::string_view kParamsMagic = "PRM1";
inline constexpr std::string_view kFrameMagic = "FRM1";
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;

/// One named float32 array inside a container file.
struct TensorEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
  /// Byte offset of the entry header when decoded; not part of equality.
  std::uint64_t offset = 0;

  std::size_t element_count() const;
  bool operator==(const TensorEntry& other) const {
    return name == other.name && dims == other.dims && data == other.data;
  }
};

/// Named-entry container shared by point-map records ("PMAP") and detector
/// checkpoints ("PRM1").
///
/// Layout, all integers little-endian:
///   magic[4] | version u32 | entry count u32 |
///   per entry: name length u8 | name | dtype u8 | ndim u8 | dims u32[ndim] |
///              row-major float32 payload
struct TensorFile {
  std::string magic{kPointMapMagic};
  std::vector<TensorEntry> entries;
  /// Total decoded size in bytes; not part of equality.
  std::uint64_t byte_size = 0;

  const TensorEntry* find(std::string_view name) const;
  bool operator==(const TensorFile& other) const {
    return magic == other.magic && entries == other.entries;
  }
};

std::vector<std::uint8_t> encode_tensor_file(const TensorFile& file);

/// Throws FormatError whose location is the byte offset of the problem.
TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes,
                              std::string_view expected_magic);

/// Converts to float32 entries "X11", "X21", "C11", "C21" and optional "K1".
TensorFile to_tensor_file(const PairRecord& record);

/// Requires the four point/confidence entries with consistent (H,W,3) and
/// (H,W) dims; "K1", when present, must have dims (4).
PairRecord pair_record_from(const TensorFile& file);

std::vector<std::uint8_t> encode_frame(const ImageFrame& frame);
ImageFrame decode_frame(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view text);

void write_pointmap_file(const std::filesystem::path& path,
                         const PairRecord& record);
PairRecord read_pointmap_file(const std::filesystem::path& path);

void write_frame_file(const std::filesystem::path& path,
                      const ImageFrame& frame);
ImageFrame read_frame_file(const std::filesystem::path& path);

/// On-disk video: frame_000.frm, frame_001.frm, ... and pair_000.pmap,
/// pair_001.pmap, ... where pair k relates frames k and k + 1.
struct VideoEntry {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> frames;
  std::vector<std::filesystem::path> pairs;
};

std::string frame_file_name(std::size_t index);
std::string pair_file_name(std::size_t index);

/// Lists a video directory. Throws DataError when frames are missing or
/// non-contiguous, or when a pair record is missing.
VideoEntry scan_video_dir(const std::filesystem::path& dir);

struct VideoData {
  std::vector<ImageFrame> frames;
  std::vector<PairRecord> pairs;
};

VideoData load_video(const VideoEntry& entry);
void write_video(const std::filesystem::path& dir,
                 const std::vector<ImageFrame>& frames,
                 const std::vector<PairRecord>& pairs);

/// 8-bit binary PGM of a single-channel field scaled by 255 and clamped.
std::string encode_pgm(const Grid<double>& field);

}  // namespace viewspan
