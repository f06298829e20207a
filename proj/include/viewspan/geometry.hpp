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

#include <Eigen/Core>

#include "viewspan/grid.hpp"

namespace viewspan {

/// Points at or behind this camera-frame depth are treated as invalid.
inline constexpr double kMinDepth = 1e-6;

/// Smallest frame edge accepted anywhere in the pipeline.
inline constexpr int kMinFrameEdge = 8;

using Rgb = Eigen::Vector3d;

/// H x W RGB frame with intensities in [0, 1].
class ImageFrame : public Grid<Rgb> {
 public:
  ImageFrame() = default;
  ImageFrame(int height, int width, const Rgb& fill = Rgb::Zero());

  /// Throws InvalidArgument if any intensity is non-finite or outside [0, 1].
  void validate() const;
};

/// Pinhole intrinsics in pixels. Pixel (row, col) has its center at
/// (u, v) = (col, row).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws InvalidArgument unless fx, fy > 0 and the principal point lies
  /// strictly inside a height x width image.
  void validate(int height, int width) const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Square-pixel intrinsics with the principal point at (width/2, height/2).
CameraIntrinsics centered_intrinsics(double focal, int height, int width);

/// Per-pixel 3D points in a reference camera frame.
class PointMap : public Grid<Eigen::Vector3d> {
 public:
  PointMap() = default;
  PointMap(int height, int width)
      : Grid<Eigen::Vector3d>(height, width, Eigen::Vector3d::Zero()) {}
};

class ConfidenceMap : public Grid<double> {
 public:
  ConfidenceMap() = default;
  ConfidenceMap(int height, int width, double fill = 0.0)
      : Grid<double>(height, width, fill) {}
};

/// Pixel coordinates of each source pixel's point in the target view.
/// Coordinates are not clipped to the image bounds.
struct ProjectedPoints {
  Grid<Eigen::Vector2d> pixels;
  Grid<double> depth;
  Mask valid;
};

struct WarpResult {
  ImageFrame warped;
  /// Nonzero where the pixel received at least one splat.
  Mask validity;
  /// Depth of the winning splat; +inf where nothing landed.
  Grid<double> depth;
};

struct ResidualMap {
  /// Mean absolute RGB difference; 0 where validity is false.
  Grid<double> values;
  Mask validity;
};

struct ResidualSummary {
  double mean = 0.0;
  double weighted_mean = 0.0;
  double valid_fraction = 0.0;
  double high_frequency_energy = 0.0;
};

ProjectedPoints project_points(const PointMap& points,
                               const CameraIntrinsics& intrinsics);

/// Splats every valid source pixel onto the nearest target pixel, resolving
/// collisions with a z-buffer. Equal depths keep the first pixel in raster
/// order.
WarpResult forward_warp(const ImageFrame& source,
                        const ProjectedPoints& projected);

ResidualMap residual_map(const ImageFrame& reference, const WarpResult& warp);

/// Throws DataError when the residual has no valid pixels.
///
/// The high-frequency energy compares each valid pixel with the mean of the
/// valid pixels in its 3x3 neighbourhood (itself included), so masked
/// pixels never leak into the blur.
ResidualSummary residual_statistics(const ResidualMap& residual,
                                    const ConfidenceMap& confidence);

/// Recovers a single focal length from a point map expressed in its own
/// camera frame, assuming a centered principal point. One weighted least
/// squares solve is followed by one robust reweighting pass.
CameraIntrinsics estimate_focal(const PointMap& points);

/// Lifts every pixel to depth * K^-1 [u, v, 1]^T.
PointMap backproject(const CameraIntrinsics& intrinsics,
                     const Grid<double>& depth);

}  // namespace viewspan
