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

#include "viewspan/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "viewspan/error.hpp"

namespace viewspan {
namespace {

constexpr std::size_t kMinFocalSamples = 100;

std::string dims_string(int h, int w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

template <typename A, typename B>
void require_same_dims(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_dims(b)) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch " +
                          dims_string(a.height(), a.width()) + " vs " +
                          dims_string(b.height(), b.width()));
  }
}

}  // namespace

ImageFrame::ImageFrame(int height, int width, const Rgb& fill)
    : Grid<Rgb>(height, width, fill) {
  if (height < kMinFrameEdge || width < kMinFrameEdge) {
    throw InvalidArgument("frame must be at least 8x8, got " +
                          dims_string(height, width));
  }
}

void ImageFrame::validate() const {
  for (const Rgb& px : values()) {
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(px[c]) || px[c] < 0.0 || px[c] > 1.0) {
        throw InvalidArgument("frame intensity outside [0,1]");
      }
    }
  }
}

void CameraIntrinsics::validate(int height, int width) const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidArgument("focal lengths must be positive and finite");
  }
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw InvalidArgument("principal point outside image");
  }
}

CameraIntrinsics centered_intrinsics(double focal, int height, int width) {
  return {focal, focal, 0.5 * width, 0.5 * height};
}

ProjectedPoints project_points(const PointMap& points,
                               const CameraIntrinsics& intrinsics) {
  const int h = points.height();
  const int w = points.width();
  intrinsics.validate(h, w);

  ProjectedPoints out{Grid<Eigen::Vector2d>(h, w, Eigen::Vector2d::Zero()),
                      Grid<double>(h, w, 0.0), Mask(h, w, 0)};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d& p = points[i];
    if (!p.allFinite()) {
      throw InvalidArgument("point map contains non-finite coordinates");
    }
    out.depth[i] = p.z();
    if (p.z() <= kMinDepth) continue;
    out.pixels[i] = {intrinsics.cx + intrinsics.fx * p.x() / p.z(),
                     intrinsics.cy + intrinsics.fy * p.y() / p.z()};
    out.valid[i] = 1;
  }
  return out;
}

WarpResult forward_warp(const ImageFrame& source,
                        const ProjectedPoints& projected) {
  require_same_dims(source, projected.pixels, "forward_warp");
  const int h = source.height();
  const int w = source.width();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  WarpResult out{ImageFrame(h, w), Mask(h, w, 0), Grid<double>(h, w, kInf)};
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (!projected.valid(row, col)) continue;
      const Eigen::Vector2d& uv = projected.pixels(row, col);
      const double tc = std::floor(uv.x() + 0.5);
      const double tr = std::floor(uv.y() + 0.5);
      if (tc < 0.0 || tr < 0.0 || tc >= w || tr >= h) continue;
      const int target_col = static_cast<int>(tc);
      const int target_row = static_cast<int>(tr);
      const double z = projected.depth(row, col);
      if (z < out.depth(target_row, target_col)) {
        out.depth(target_row, target_col) = z;
        out.warped(target_row, target_col) = source(row, col);
        out.validity(target_row, target_col) = 1;
      }
    }
  }
  return out;
}

ResidualMap residual_map(const ImageFrame& reference, const WarpResult& warp) {
  require_same_dims(reference, warp.warped, "residual_map");
  require_same_dims(reference, warp.validity, "residual_map");
  const int h = reference.height();
  const int w = reference.width();
  ResidualMap out{Grid<double>(h, w, 0.0), warp.validity};
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (!warp.validity[i]) continue;
    out.values[i] = (reference[i] - warp.warped[i]).cwiseAbs().mean();
  }
  return out;
}

ResidualSummary residual_statistics(const ResidualMap& residual,
                                    const ConfidenceMap& confidence) {
  require_same_dims(residual.values, confidence, "residual_statistics");
  require_same_dims(residual.values, residual.validity, "residual_statistics");
  const int h = residual.values.height();
  const int w = residual.values.width();

  std::size_t n_valid = 0;
  double sum = 0.0;
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  for (std::size_t i = 0; i < residual.values.size(); ++i) {
    if (!residual.validity[i]) continue;
    ++n_valid;
    sum += residual.values[i];
    weighted_sum += confidence[i] * residual.values[i];
    weight_total += confidence[i];
  }
  if (n_valid == 0) {
    throw DataError("residual has no valid pixels (no overlap)");
  }

  ResidualSummary out;
  out.mean = sum / static_cast<double>(n_valid);
  // Zero total confidence leaves nothing to weight by; fall back to the
  // plain mean.
  out.weighted_mean = weight_total > 0.0 ? weighted_sum / weight_total : out.mean;
  out.valid_fraction =
      static_cast<double>(n_valid) / static_cast<double>(residual.values.size());

  double energy = 0.0;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (!residual.validity(row, col)) continue;
      double blur = 0.0;
      int count = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = row + dr;
          const int c = col + dc;
          if (r < 0 || c < 0 || r >= h || c >= w) continue;
          if (!residual.validity(r, c)) continue;
          blur += residual.values(r, c);
          ++count;
        }
      }
      const double diff = residual.values(row, col) - blur / count;
      energy += diff * diff;
    }
  }
  out.high_frequency_energy = energy / static_cast<double>(n_valid);
  return out;
}

CameraIntrinsics estimate_focal(const PointMap& points) {
  const int h = points.height();
  const int w = points.width();
  const double cx = 0.5 * w;
  const double cy = 0.5 * h;

  struct Sample {
    Eigen::Vector2d offset;  // (u - cx, v - cy)
    Eigen::Vector2d ray;     // (x / z, y / z)
  };
  std::vector<Sample> samples;
  samples.reserve(points.size());
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const Eigen::Vector3d& p = points(row, col);
      if (!p.allFinite() || p.z() <= kMinDepth) continue;
      samples.push_back({{col - cx, row - cy}, {p.x() / p.z(), p.y() / p.z()}});
    }
  }
  if (samples.size() < kMinFocalSamples) {
    throw DataError("estimate_focal: need at least 100 points in front of "
                    "the camera, got " + std::to_string(samples.size()));
  }

  auto solve = [&](auto weight_of) {
    double num = 0.0;
    double den = 0.0;
    for (const Sample& s : samples) {
      const double wgt = weight_of(s);
      num += wgt * s.offset.dot(s.ray);
      den += wgt * s.ray.squaredNorm();
    }
    return den > 0.0 ? num / den : 0.0;
  };

  const double initial = solve([](const Sample&) { return 1.0; });
  const double focal = solve([initial](const Sample& s) {
    return 1.0 / (1.0 + (s.offset - initial * s.ray).norm());
  });
  if (!(focal > 0.0) || !std::isfinite(focal)) {
    throw DataError("estimate_focal: degenerate point map");
  }
  return {focal, focal, cx, cy};
}

PointMap backproject(const CameraIntrinsics& intrinsics,
                     const Grid<double>& depth) {
  const int h = depth.height();
  const int w = depth.width();
  intrinsics.validate(h, w);
  PointMap out(h, w);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const double d = depth(row, col);
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw InvalidArgument("backproject: depth must be positive and finite");
      }
      out(row, col) = {d * (col - intrinsics.cx) / intrinsics.fx,
                       d * (row - intrinsics.cy) / intrinsics.fy, d};
    }
  }
  return out;
}

}  // namespace viewspan
