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

#include "viewspan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "viewspan/error.hpp"
#include "viewspan/parallel.hpp"
#include "viewspan/rng.hpp"

namespace viewspan {
namespace {

constexpr int kHeightNodes = 17;
constexpr int kDisplacementNodes = 9;
constexpr int kMarchSteps = 48;
constexpr int kBisectionSteps = 48;

// Bilinear lookup of a node grid spanning [-extent, extent]^2; coordinates
// outside the square are clamped to its border.
template <typename T>
T bilinear(const Grid<T>& nodes, double extent, double x, double y) {
  const int n = nodes.width();
  const double scale = (n - 1) / (2.0 * extent);
  const double gx = std::clamp((x + extent) * scale, 0.0, n - 1.0);
  const double gy = std::clamp((y + extent) * scale, 0.0, n - 1.0);
  const int i0 = std::min(static_cast<int>(gx), n - 2);
  const int j0 = std::min(static_cast<int>(gy), n - 2);
  const double fx = gx - i0;
  const double fy = gy - j0;
  return (1 - fx) * (1 - fy) * nodes(j0, i0) + fx * (1 - fy) * nodes(j0, i0 + 1) +
         (1 - fx) * fy * nodes(j0 + 1, i0) + fx * fy * nodes(j0 + 1, i0 + 1);
}

Eigen::Matrix3d rotation_xy(double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

Rgb Texture::color(double x, double y) const {
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    double v = 0.5;
    for (const Wave& w : channels[c]) {
      v += w.amplitude * std::sin(w.kx * x + w.ky * y + w.phase);
    }
    out[c] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

double Scene::height_at(double x, double y) const {
  return bilinear(heights, extent, x, y);
}

Eigen::Vector3d Scene::displacement_at(double x, double y) const {
  if (displacement.size() == 0) return Eigen::Vector3d::Zero();
  return bilinear(displacement, extent, x, y);
}

std::pair<double, double> Scene::depth_band() const {
  double h_min = 0.0, h_max = 0.0;
  if (heights.size() > 0) {
    const auto [lo, hi] = std::minmax_element(heights.values().begin(),
                                              heights.values().end());
    h_min = *lo;
    h_max = *hi;
  }
  double dz_min = 0.0, dz_max = 0.0;
  for (const Eigen::Vector3d& d : displacement.values()) {
    dz_min = std::min(dz_min, d.z());
    dz_max = std::max(dz_max, d.z());
  }
  constexpr double kMargin = 1e-9;
  return {base_depth - h_max + dz_min - kMargin,
          base_depth - h_min + dz_max + kMargin};
}

void CameraPose::validate() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (!(ortho <= 1e-9) || std::abs(rotation.determinant() - 1.0) > 1e-9 ||
      !translation.allFinite()) {
    throw InvalidArgument("camera pose rotation is not a proper rotation");
  }
}

Eigen::Vector3d CameraPose::to_camera(const Eigen::Vector3d& world) const {
  return rotation.transpose() * (world - translation);
}

RenderResult render_view(const Scene& scene, const CameraPose& pose,
                         const CameraIntrinsics& intrinsics, int height,
                         int width) {
  pose.validate();
  intrinsics.validate(height, width);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  RenderResult out{ImageFrame(height, width), Grid<double>(height, width, kInf),
                   Mask(height, width, 0),
                   Grid<Eigen::Vector3d>(height, width, Eigen::Vector3d::Zero())};

  const auto [near_z, far_z] = scene.depth_band();
  const Eigen::Vector3d& origin = pose.translation;

  // Signed gap between the ray and the surface at ray parameter t; rays
  // outside the scene square see no surface.
  auto gap = [&](const Eigen::Vector3d& dir, double t, bool& inside) {
    const Eigen::Vector3d p = origin + t * dir;
    inside = std::abs(p.x()) <= scene.extent && std::abs(p.y()) <= scene.extent;
    if (!inside) return -1.0;
    const double surface_z = scene.base_depth - scene.height_at(p.x(), p.y()) +
                             scene.displacement_at(p.x(), p.y()).z();
    return p.z() - surface_z;
  };

  bool any_hit = false;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      // Camera-frame direction with unit z, so the ray parameter is the
      // camera-frame depth.
      const Eigen::Vector3d cam_dir((col - intrinsics.cx) / intrinsics.fx,
                                    (row - intrinsics.cy) / intrinsics.fy, 1.0);
      const Eigen::Vector3d dir = pose.rotation * cam_dir;
      if (dir.z() <= 0.0) continue;
      const double t_near = std::max(kMinDepth, (near_z - origin.z()) / dir.z());
      const double t_far = (far_z - origin.z()) / dir.z();
      if (t_far <= t_near) continue;

      bool inside = false;
      double t_prev = t_near;
      double t_hit = -1.0;
      for (int s = 1; s <= kMarchSteps; ++s) {
        const double t = t_near + (t_far - t_near) * s / kMarchSteps;
        if (gap(dir, t, inside) >= 0.0) {
          double lo = t_prev, hi = t;
          for (int b = 0; b < kBisectionSteps; ++b) {
            const double mid = 0.5 * (lo + hi);
            if (gap(dir, mid, inside) >= 0.0) {
              hi = mid;
            } else {
              lo = mid;
            }
          }
          t_hit = hi;
          break;
        }
        t_prev = t;
      }
      if (t_hit < 0.0) continue;

      const Eigen::Vector3d p = origin + t_hit * dir;
      const Eigen::Vector3d disp = scene.displacement_at(p.x(), p.y());
      out.frame(row, col) = scene.texture.color(p.x() - disp.x(), p.y() - disp.y());
      out.depth(row, col) = t_hit;
      out.hit(row, col) = 1;
      out.world_points(row, col) = p;
      any_hit = true;
    }
  }
  if (!any_hit) throw DataError("render_view: no ray hits the scene");
  return out;
}

namespace {

PairRecord pair_from_renders(const RenderResult& view1, const RenderResult& view2,
                             const CameraPose& pose1) {
  const int h = view1.frame.height();
  const int w = view1.frame.width();
  PairRecord record{PointMap(h, w), PointMap(h, w), ConfidenceMap(h, w, 0.0),
                    ConfidenceMap(h, w, 0.0), std::nullopt};
  for (std::size_t i = 0; i < view1.hit.size(); ++i) {
    if (view1.hit[i]) {
      record.x11[i] = pose1.to_camera(view1.world_points[i]);
      record.c11[i] = 1.0;
    }
    if (view2.hit[i]) {
      record.x21[i] = pose1.to_camera(view2.world_points[i]);
      record.c21[i] = 1.0;
    }
  }
  return record;
}

}  // namespace

PairRecord oracle_pointmaps(const Scene& scene, const CameraPose& pose1,
                            const CameraPose& pose2,
                            const CameraIntrinsics& intrinsics, int height,
                            int width) {
  const RenderResult v1 = render_view(scene, pose1, intrinsics, height, width);
  const RenderResult v2 = render_view(scene, pose2, intrinsics, height, width);
  return pair_from_renders(v1, v2, pose1);
}

void PerturbationSpec::validate() const {
  for (double v : {geometry_sigma, texture_drift, flicker_amp}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("perturbation magnitudes must be finite and >= 0");
    }
  }
}

Scene make_scene(std::uint64_t seed) {
  Rng rng(seed);
  Scene scene;
  scene.base_depth = rng.uniform(0.95, 1.05);
  scene.extent = 1.5;

  scene.heights = Grid<double>(kHeightNodes, kHeightNodes, 0.0);
  struct Bump {
    double x, y, radius, amplitude;
  };
  std::vector<Bump> bumps(6);
  for (Bump& b : bumps) {
    b = {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(0.15, 0.35),
         rng.uniform(0.02, 0.08)};
  }
  for (int j = 0; j < kHeightNodes; ++j) {
    for (int i = 0; i < kHeightNodes; ++i) {
      const double x = -scene.extent + 2.0 * scene.extent * i / (kHeightNodes - 1);
      const double y = -scene.extent + 2.0 * scene.extent * j / (kHeightNodes - 1);
      double h = 0.0;
      for (const Bump& b : bumps) {
        const double r2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        h += b.amplitude * std::exp(-r2 / (2.0 * b.radius * b.radius));
      }
      scene.heights(j, i) = std::min(h, 0.2);
    }
  }

  for (auto& channel : scene.texture.channels) {
    channel.resize(3);
    for (Texture::Wave& w : channel) {
      const double wavelength = rng.uniform(0.15, 0.3);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double k = 2.0 * std::numbers::pi / wavelength;
      w = {k * std::cos(angle), k * std::sin(angle),
           rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(0.03, 0.06)};
    }
  }
  return scene;
}

std::vector<CameraPose> make_trajectory(int frames, std::uint64_t seed) {
  if (frames < 2) throw InvalidArgument("a sequence needs at least 2 frames");
  Rng rng(seed);
  const Eigen::Vector3d start(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.0);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double speed = rng.uniform(0.015, 0.03);
  const Eigen::Vector3d velocity(speed * std::cos(heading),
                                 speed * std::sin(heading),
                                 rng.uniform(-0.005, 0.005));
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double yaw_rate = rng.uniform(-0.5, 0.5) * kDeg;
  const double pitch_rate = rng.uniform(-0.3, 0.3) * kDeg;

  std::vector<CameraPose> poses(frames);
  for (int k = 0; k < frames; ++k) {
    poses[k].rotation = rotation_xy(k * pitch_rate, k * yaw_rate);
    poses[k].translation = start + k * velocity;
  }
  return poses;
}

SyntheticSequence make_sequence(const Scene& scene,
                                const std::vector<CameraPose>& poses,
                                const SequenceOptions& options) {
  if (poses.size() < 2) throw InvalidArgument("a sequence needs at least 2 frames");
  SyntheticSequence seq;
  seq.intrinsics = centered_intrinsics(options.focal, options.height, options.width);
  seq.scene = scene;
  seq.poses = poses;

  std::vector<RenderResult> renders;
  renders.reserve(poses.size());
  for (const CameraPose& pose : poses) {
    renders.push_back(
        render_view(scene, pose, seq.intrinsics, options.height, options.width));
  }
  for (std::size_t k = 0; k < renders.size(); ++k) {
    seq.frames.push_back(renders[k].frame);
    if (k + 1 < renders.size()) {
      seq.pairs.push_back(pair_from_renders(renders[k], renders[k + 1], poses[k]));
    }
  }
  return seq;
}

SyntheticSequence perturb(const SyntheticSequence& seq,
                          const PerturbationSpec& spec) {
  spec.validate();
  if (spec.is_identity()) return seq;

  SyntheticSequence out = seq;
  out.label = Label::kFake;
  out.perturbation = spec;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(t)));
    ImageFrame frame = seq.frames[t];
    if (spec.geometry_sigma > 0.0) {
      Scene displaced = seq.scene;
      displaced.displacement = Grid<Eigen::Vector3d>(
          kDisplacementNodes, kDisplacementNodes, Eigen::Vector3d::Zero());
      for (Eigen::Vector3d& d : displaced.displacement.values()) {
        d = {rng.normal(0.0, spec.geometry_sigma), rng.normal(0.0, spec.geometry_sigma),
             rng.normal(0.0, spec.geometry_sigma)};
      }
      frame = render_view(displaced, seq.poses[t], seq.intrinsics, frame.height(),
                          frame.width())
                  .frame;
    }
    const double offset = spec.flicker_amp * rng.uniform(-1.0, 1.0);
    for (Rgb& px : frame.values()) {
      for (int c = 0; c < 3; ++c) {
        double v = px[c] + offset;
        if (spec.texture_drift > 0.0) v += rng.normal(0.0, spec.texture_drift);
        px[c] = std::clamp(v, 0.0, 1.0);
      }
    }
    out.frames[t] = std::move(frame);
  }
  return out;
}

std::vector<PerturbationFamily> default_families() {
  return {
      {"texture-drift", PromptModality::kT2V, 0.4, 0.02, 0.04, 0.03, 0.06, 0.0, 0.0},
      {"geometry-jitter", PromptModality::kI2V, 0.3, 0.03, 0.06, 0.0, 0.0, 0.0, 0.0},
      {"flicker", PromptModality::kV2V, 0.3, 0.02, 0.04, 0.0, 0.0, 0.04, 0.08},
  };
}

namespace {

std::vector<int> allocate_by_weight(int total,
                                    const std::vector<PerturbationFamily>& families) {
  double weight_sum = 0.0;
  for (const auto& f : families) weight_sum += f.weight;
  std::vector<int> counts(families.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < families.size(); ++i) {
    const double exact = total * families[i].weight / weight_sum;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  // Largest remainder first; ties go to the earlier family.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; assigned < total; ++k, ++assigned) {
    ++counts[remainders[k % remainders.size()].second];
  }
  return counts;
}

std::string numbered(const std::string& prefix, int index) {
  std::string digits = std::to_string(index);
  while (digits.size() < 4) digits.insert(digits.begin(), '0');
  return prefix + "-" + digits;
}

}  // namespace

Corpus make_corpus(int n_real, int n_fake, const CorpusOptions& options,
                   std::uint64_t seed) {
  if (n_real < 1 || n_fake < 1) {
    throw InvalidArgument("make_corpus: n_real and n_fake must be >= 1");
  }
  if (options.families.empty()) {
    throw InvalidArgument("make_corpus: at least one perturbation family");
  }
  for (const PerturbationFamily& f : options.families) {
    const bool ranges_ok = 0.0 <= f.sigma_min && f.sigma_min <= f.sigma_max &&
                           0.0 <= f.drift_min && f.drift_min <= f.drift_max &&
                           0.0 <= f.flicker_min && f.flicker_min <= f.flicker_max;
    if (f.name.empty() || f.name == "real" || f.modality == PromptModality::kNone ||
        !(f.weight > 0.0) || !ranges_ok) {
      throw InvalidArgument("make_corpus: malformed perturbation family '" + f.name + "'");
    }
    if (f.sigma_min == 0.0 && f.drift_min == 0.0 && f.flicker_min == 0.0) {
      throw InvalidArgument("make_corpus: family '" + f.name +
                            "' may draw an identity perturbation");
    }
  }

  struct Plan {
    ManifestRow row;
    std::size_t family = 0;
  };
  std::vector<Plan> plans;
  for (int i = 0; i < n_real; ++i) {
    const std::string id = numbered("real", i);
    plans.push_back({{id, id, Label::kReal, "real", PromptModality::kNone,
                      Split::kTrain}, 0});
  }
  const std::vector<int> counts = allocate_by_weight(n_fake, options.families);
  for (std::size_t f = 0; f < options.families.size(); ++f) {
    const PerturbationFamily& family = options.families[f];
    for (int i = 0; i < counts[f]; ++i) {
      const std::string id = numbered(family.name, i);
      plans.push_back({{id, id, Label::kFake, family.name, family.modality,
                        Split::kTrain}, f});
    }
  }

  Corpus corpus;
  corpus.sequences.resize(plans.size());
  parallel_for(plans.size(), [&](std::size_t i) {
    const Plan& plan = plans[i];
    const Scene scene = make_scene(derive_seed(seed, "scene/" + plan.row.id));
    const auto poses = make_trajectory(options.sequence.frames,
                                       derive_seed(seed, "path/" + plan.row.id));
    SyntheticSequence seq = make_sequence(scene, poses, options.sequence);
    if (plan.row.label == Label::kFake) {
      const PerturbationFamily& family = options.families[plan.family];
      Rng rng(derive_seed(seed, "spec/" + plan.row.id));
      PerturbationSpec spec;
      spec.geometry_sigma = rng.uniform(family.sigma_min, family.sigma_max);
      spec.texture_drift = rng.uniform(family.drift_min, family.drift_max);
      spec.flicker_amp = rng.uniform(family.flicker_min, family.flicker_max);
      spec.seed = rng.next_u64();
      seq = perturb(seq, spec);
    }
    corpus.sequences[i] = std::move(seq);
  });

  DatasetManifest manifest;
  for (const Plan& plan : plans) manifest.rows.push_back(plan.row);
  SplitResult split = split_train_test(manifest, options.test_fraction, seed);
  corpus.manifest = std::move(split.manifest);
  corpus.split_warnings = std::move(split.warnings);
  return corpus;
}

}  // namespace viewspan
