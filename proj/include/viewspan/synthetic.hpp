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
#include <vector>

#include <Eigen/Core>

#include "viewspan/geometry.hpp"
#include "viewspan/manifest.hpp"
#include "viewspan/pair_record.hpp"

namespace viewspan {

/// Procedural texture: per channel, 0.5 plus a sum of plane waves over the
/// surface coordinates (x, y).
struct Texture {
  struct Wave {
    double kx = 0.0;
    double ky = 0.0;
    double phase = 0.0;
    double amplitude = 0.0;
  };
  std::vector<Wave> channels[3];

  Rgb color(double x, double y) const;
};

/// Height field over the square [-extent, extent]^2 of the world plane
/// z = base_depth. A surface point sits at z = base_depth - height(x, y) +
/// dz(x, y) and carries the texture of (x - dx, y - dy), where (dx, dy, dz)
/// is the optional smooth displacement field used to model inconsistent
/// geometry.
struct Scene {
  double base_depth = 1.0;
  double extent = 1.5;
  /// Heights (toward the camera, >= 0) on a regular grid spanning the
  /// square, bilinearly interpolated.
  Grid<double> heights;
  /// Displacement nodes on a regular grid spanning the square; empty means
  /// no displacement.
  Grid<Eigen::Vector3d> displacement;
  Texture texture;

  double height_at(double x, double y) const;
  Eigen::Vector3d displacement_at(double x, double y) const;
  /// Depth band [near, far] containing every surface point.
  std::pair<double, double> depth_band() const;
};

/// Camera-to-world rigid transform: world = rotation * camera + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Throws InvalidArgument unless the rotation is orthonormal with
  /// determinant +1 (tolerance 1e-9).
  void validate() const;
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const;
};

struct RenderResult {
  ImageFrame frame;
  /// Camera-frame depth of the hit; +inf on misses.
  Grid<double> depth;
  Mask hit;
  Grid<Eigen::Vector3d> world_points;
};

/// Ray-casts every pixel center against the scene. Misses are black.
/// Throws DataError if no ray hits the surface.
RenderResult render_view(const Scene& scene, const CameraPose& pose,
                         const CameraIntrinsics& intrinsics, int height,
                         int width);

/// Exact two-view point maps: view-1 and view-2 hits expressed in camera 1,
/// confidence 1 at hits and 0 at misses.
PairRecord oracle_pointmaps(const Scene& scene, const CameraPose& pose1,
                            const CameraPose& pose2,
                            const CameraIntrinsics& intrinsics, int height,
                            int width);

struct PerturbationSpec {
  double geometry_sigma = 0.0;
  double texture_drift = 0.0;
  double flicker_amp = 0.0;
  std::uint64_t seed = 0;

  bool is_identity() const {
    return geometry_sigma == 0.0 && texture_drift == 0.0 && flicker_amp == 0.0;
  }
  void validate() const;
  bool operator==(const PerturbationSpec&) const = default;
};

struct SyntheticSequence {
  std::vector<ImageFrame> frames;
  /// pairs[k] relates frames[k] (view 1) and frames[k + 1] (view 2).
  std::vector<PairRecord> pairs;
  CameraIntrinsics intrinsics;
  Label label = Label::kReal;
  PerturbationSpec perturbation;
  Scene scene;
  std::vector<CameraPose> poses;
};

struct SequenceOptions {
  int height = 64;
  int width = 64;
  int frames = 6;
  double focal = 64.0;
};

Scene make_scene(std::uint64_t seed);

/// Smooth camera path looking down +z at the scene.
std::vector<CameraPose> make_trajectory(int frames, std::uint64_t seed);

/// Renders an unperturbed sequence with oracle pair records.
SyntheticSequence make_sequence(const Scene& scene,
                                const std::vector<CameraPose>& poses,
                                const SequenceOptions& options);

/// Re-renders every frame from an independently displaced copy of the scene
/// and adds brightness flicker and pixel noise. Pair records keep the clean
/// geometry. A zero spec returns the input unchanged.
SyntheticSequence perturb(const SyntheticSequence& seq,
                          const PerturbationSpec& spec);

/// Fake-video family: a perturbation recipe tagged with a prompt modality.
struct PerturbationFamily {
  std::string name;
  PromptModality modality = PromptModality::kNone;
  double weight = 1.0;
  double sigma_min = 0.0, sigma_max = 0.0;
  double drift_min = 0.0, drift_max = 0.0;
  double flicker_min = 0.0, flicker_max = 0.0;
};

/// Texture-dominant (T2V), geometry-dominant (I2V) and flicker-dominant
/// (V2V) families.
std::vector<PerturbationFamily> default_families();

struct CorpusOptions {
  SequenceOptions sequence;
  std::vector<PerturbationFamily> families = default_families();
  double test_fraction = 0.2;
};

struct Corpus {
  std::vector<SyntheticSequence> sequences;
  /// Row i describes sequences[i]; splits are already assigned.
  DatasetManifest manifest;
  std::vector<std::string> split_warnings;
};

/// Deterministic corpus: fakes are allotted to families by weight (largest
/// remainder), every sequence gets its own scene and trajectory.
Corpus make_corpus(int n_real, int n_fake, const CorpusOptions& options,
                   std::uint64_t seed);

}  // namespace viewspan
