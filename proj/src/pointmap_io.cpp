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

#include "viewspan/pointmap_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "viewspan/error.hpp"

namespace viewspan {
namespace {

class ByteWriter {
 public:
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n) {
      throw FormatError(FormatErrorKind::kTruncated, offset_,
                        "need " + std::to_string(n) + " bytes for " + what +
                            ", have " + std::to_string(remaining()));
    }
  }
  std::string raw(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), n);
    offset_ += n;
    return s;
  }
  std::uint8_t u8(const std::string& what) {
    need(1, what);
    return bytes_[offset_++];
  }
  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[offset_ + i]} << (8 * i);
    offset_ += 4;
    return v;
  }
  // Caller has already checked that 4 bytes are available.
  float f32_unchecked() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[offset_ + i]} << (8 * i);
    offset_ += 4;
    return std::bit_cast<float>(v);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

std::size_t checked_count(const std::vector<std::uint32_t>& dims,
                          std::uint64_t offset, const std::string& name) {
  std::uint64_t n = 1;
  for (std::uint32_t d : dims) {
    n *= d;
    if (n > std::numeric_limits<std::uint32_t>::max()) {
      throw FormatError(FormatErrorKind::kDimMismatch, offset,
                        "entry '" + name + "' is too large");
    }
  }
  return static_cast<std::size_t>(n);
}

const TensorEntry& require_entry(const TensorFile& file, std::string_view name) {
  const TensorEntry* e = file.find(name);
  if (e == nullptr) {
    throw FormatError(FormatErrorKind::kMissingEntry, file.byte_size,
                      "required entry '" + std::string(name) + "' absent");
  }
  return *e;
}

void require_dims(const TensorEntry& e, std::vector<std::uint32_t> expected) {
  if (e.dims != expected) {
    std::ostringstream msg;
    msg << "entry '" << e.name << "' has dims (";
    for (std::size_t i = 0; i < e.dims.size(); ++i) msg << (i ? "," : "") << e.dims[i];
    msg << "), expected (";
    for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? "," : "") << expected[i];
    msg << ")";
    throw FormatError(FormatErrorKind::kDimMismatch, e.offset, msg.str());
  }
}

TensorEntry points_entry(std::string name, const PointMap& points) {
  TensorEntry e{std::move(name),
                {static_cast<std::uint32_t>(points.height()),
                 static_cast<std::uint32_t>(points.width()), 3},
                {}};
  e.data.reserve(points.size() * 3);
  for (const Eigen::Vector3d& p : points.values()) {
    for (int c = 0; c < 3; ++c) e.data.push_back(static_cast<float>(p[c]));
  }
  return e;
}

TensorEntry confidence_entry(std::string name, const ConfidenceMap& conf) {
  TensorEntry e{std::move(name),
                {static_cast<std::uint32_t>(conf.height()),
                 static_cast<std::uint32_t>(conf.width())},
                {}};
  e.data.reserve(conf.size());
  for (double v : conf.values()) e.data.push_back(static_cast<float>(v));
  return e;
}

PointMap points_from(const TensorEntry& e) {
  PointMap out(static_cast<int>(e.dims[0]), static_cast<int>(e.dims[1]));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {e.data[3 * i], e.data[3 * i + 1], e.data[3 * i + 2]};
  }
  return out;
}

ConfidenceMap confidence_from(const TensorEntry& e) {
  ConfidenceMap out(static_cast<int>(e.dims[0]), static_cast<int>(e.dims[1]));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = e.data[i];
  return out;
}

}  // namespace

std::size_t TensorEntry::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

const TensorEntry* TensorFile::find(std::string_view name) const {
  for (const TensorEntry& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_tensor_file(const TensorFile& file) {
  if (file.magic.size() != 4) {
    throw InvalidArgument("container magic must be 4 bytes");
  }
  ByteWriter out;
  out.raw(file.magic);
  out.u32(kContainerVersion);
  out.u32(static_cast<std::uint32_t>(file.entries.size()));
  for (const TensorEntry& e : file.entries) {
    if (e.name.empty() || e.name.size() > 255) {
      throw InvalidArgument("entry name must be 1..255 bytes");
    }
    if (e.dims.size() > 255) throw InvalidArgument("too many dims");
    if (e.element_count() != e.data.size()) {
      throw InvalidArgument("entry '" + e.name + "' payload does not match dims");
    }
    out.u8(static_cast<std::uint8_t>(e.name.size()));
    out.raw(e.name);
    out.u8(kDtypeFloat32);
    out.u8(static_cast<std::uint8_t>(e.dims.size()));
    for (std::uint32_t d : e.dims) out.u32(d);
    for (float v : e.data) out.f32(v);
  }
  return out.take();
}

TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes,
                              std::string_view expected_magic) {
  ByteReader in(bytes);
  TensorFile file;
  file.magic = in.raw(4, "magic");
  if (file.magic != expected_magic) {
    throw FormatError(FormatErrorKind::kBadMagic, 0,
                      "expected '" + std::string(expected_magic) + "', got '" +
                          file.magic + "'");
  }
  const std::size_t version_at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kContainerVersion) {
    throw FormatError(FormatErrorKind::kUnknownVersion, version_at,
                      "version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32("entry count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string where = "entry " + std::to_string(k);
    TensorEntry e;
    e.offset = in.offset();
    const std::uint8_t name_len = in.u8(where + " name length");
    e.name = in.raw(name_len, where + " name");
    const std::size_t dtype_at = in.offset();
    const std::uint8_t dtype = in.u8("entry '" + e.name + "' dtype");
    if (dtype != kDtypeFloat32) {
      throw FormatError(FormatErrorKind::kUnknownDtype, dtype_at,
                        "entry '" + e.name + "' dtype " + std::to_string(dtype));
    }
    const std::uint8_t ndim = in.u8("entry '" + e.name + "' ndim");
    const std::size_t dims_at = in.offset();
    for (std::uint8_t d = 0; d < ndim; ++d) {
      e.dims.push_back(in.u32("entry '" + e.name + "' dims"));
    }
    const std::size_t n = checked_count(e.dims, dims_at, e.name);
    in.need(n * 4, "entry '" + e.name + "' payload");
    e.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.data[i] = in.f32_unchecked();
    if (file.find(e.name) != nullptr) {
      throw FormatError(FormatErrorKind::kInvariant, dims_at,
                        "duplicate entry '" + e.name + "'");
    }
    file.entries.push_back(std::move(e));
  }
  if (in.remaining() != 0) {
    throw FormatError(FormatErrorKind::kDimMismatch, in.offset(),
                      std::to_string(in.remaining()) + " trailing bytes");
  }
  file.byte_size = bytes.size();
  return file;
}

TensorFile to_tensor_file(const PairRecord& record) {
  record.validate();
  TensorFile file{std::string(kPointMapMagic), {}};
  file.entries.push_back(points_entry("X11", record.x11));
  file.entries.push_back(points_entry("X21", record.x21));
  file.entries.push_back(confidence_entry("C11", record.c11));
  file.entries.push_back(confidence_entry("C21", record.c21));
  if (record.k1) {
    const CameraIntrinsics& k = *record.k1;
    file.entries.push_back(
        {"K1", {4},
         {static_cast<float>(k.fx), static_cast<float>(k.fy),
          static_cast<float>(k.cx), static_cast<float>(k.cy)}});
  }
  return file;
}

PairRecord pair_record_from(const TensorFile& file) {
  const TensorEntry& x11 = require_entry(file, "X11");
  const TensorEntry& x21 = require_entry(file, "X21");
  const TensorEntry& c11 = require_entry(file, "C11");
  const TensorEntry& c21 = require_entry(file, "C21");
  if (x11.dims.size() != 3) require_dims(x11, {0, 0, 3});
  const std::uint32_t h = x11.dims[0];
  const std::uint32_t w = x11.dims[1];
  if (h == 0 || w == 0) require_dims(x11, {1, 1, 3});
  require_dims(x11, {h, w, 3});
  require_dims(x21, {h, w, 3});
  require_dims(c11, {h, w});
  require_dims(c21, {h, w});

  PairRecord record{points_from(x11), points_from(x21), confidence_from(c11),
                    confidence_from(c21), std::nullopt};
  if (const TensorEntry* k1 = file.find("K1")) {
    require_dims(*k1, {4});
    record.k1 = CameraIntrinsics{k1->data[0], k1->data[1], k1->data[2],
                                 k1->data[3]};
  }
  try {
    record.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatErrorKind::kInvariant, 0, e.what());
  }
  return record;
}

std::vector<std::uint8_t> encode_frame(const ImageFrame& frame) {
  ByteWriter out;
  out.raw(kFrameMagic);
  out.u32(static_cast<std::uint32_t>(frame.height()));
  out.u32(static_cast<std::uint32_t>(frame.width()));
  for (const Rgb& px : frame.values()) {
    for (int c = 0; c < 3; ++c) out.f32(static_cast<float>(px[c]));
  }
  return out.take();
}

ImageFrame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const std::string magic = in.raw(4, "magic");
  if (magic != kFrameMagic) {
    throw FormatError(FormatErrorKind::kBadMagic, 0,
                      "expected 'FRM1', got '" + magic + "'");
  }
  const std::size_t dims_at = in.offset();
  const std::uint32_t h = in.u32("height");
  const std::uint32_t w = in.u32("width");
  if (h < kMinFrameEdge || w < kMinFrameEdge || h > 65535 || w > 65535) {
    throw FormatError(FormatErrorKind::kDimMismatch, dims_at,
                      "frame dims " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::size_t n = std::size_t{h} * w;
  in.need(n * 12, "frame payload");
  ImageFrame frame(static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = in.offset();
    Rgb px;
    for (int c = 0; c < 3; ++c) px[c] = in.f32_unchecked();
    if (!px.allFinite() || px.minCoeff() < 0.0 || px.maxCoeff() > 1.0) {
      throw FormatError(FormatErrorKind::kInvariant, at,
                        "intensity outside [0,1]");
    }
    frame[i] = px;
  }
  if (in.remaining() != 0) {
    throw FormatError(FormatErrorKind::kDimMismatch, in.offset(),
                      std::to_string(in.remaining()) + " trailing bytes");
  }
  return frame;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

void write_pointmap_file(const std::filesystem::path& path,
                         const PairRecord& record) {
  write_file_atomic(path, encode_tensor_file(to_tensor_file(record)));
}

PairRecord read_pointmap_file(const std::filesystem::path& path) {
  return pair_record_from(decode_tensor_file(read_file_bytes(path), kPointMapMagic));
}

void write_frame_file(const std::filesystem::path& path,
                      const ImageFrame& frame) {
  write_file_atomic(path, encode_frame(frame));
}

ImageFrame read_frame_file(const std::filesystem::path& path) {
  return decode_frame(read_file_bytes(path));
}

std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%03zu.frm", index);
  return buf;
}

std::string pair_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%03zu.pmap", index);
  return buf;
}

VideoEntry scan_video_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw DataError("video directory not found: " + dir.string());
  }
  std::size_t n_frames = 0, n_pairs = 0;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.starts_with("frame_") && name.ends_with(".frm")) ++n_frames;
    if (name.starts_with("pair_") && name.ends_with(".pmap")) ++n_pairs;
  }
  if (n_frames < 2) throw DataError("fewer than two frames in " + dir.string());

  VideoEntry entry;
  entry.dir = dir;
  for (std::size_t k = 0; k < n_frames; ++k) {
    fs::path p = dir / frame_file_name(k);
    if (!fs::exists(p)) throw DataError("missing frame " + p.string());
    entry.frames.push_back(std::move(p));
  }
  for (std::size_t k = 0; k + 1 < n_frames; ++k) {
    fs::path p = dir / pair_file_name(k);
    if (!fs::exists(p)) throw DataError("missing pair record " + p.string());
    entry.pairs.push_back(std::move(p));
  }
  if (n_pairs != entry.pairs.size()) {
    throw DataError("unexpected pair records in " + dir.string());
  }
  return entry;
}

VideoData load_video(const VideoEntry& entry) {
  VideoData data;
  for (const auto& p : entry.frames) data.frames.push_back(read_frame_file(p));
  for (const auto& p : entry.pairs) data.pairs.push_back(read_pointmap_file(p));
  return data;
}

void write_video(const std::filesystem::path& dir,
                 const std::vector<ImageFrame>& frames,
                 const std::vector<PairRecord>& pairs) {
  if (pairs.size() + 1 != frames.size()) {
    throw InvalidArgument("write_video: expected one pair record per frame step");
  }
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    write_frame_file(dir / frame_file_name(k), frames[k]);
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    write_pointmap_file(dir / pair_file_name(k), pairs[k]);
  }
}

std::string encode_pgm(const Grid<double>& field) {
  std::string out = "P5\n" + std::to_string(field.width()) + " " +
                    std::to_string(field.height()) + "\n255\n";
  for (double v : field.values()) {
    const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
  }
  return out;
}

}  // namespace viewspan
