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

#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "viewspan/error.hpp"
#include "viewspan/geometry.hpp"

using namespace viewspan;
using viewspan::testing::random_frame;

namespace {

CameraIntrinsics make_k(double f, double cx, double cy) { return {f, f, cx, cy}; }

PointMap single_point(const Eigen::Vector3d& p) {
  PointMap m(64, 64);
  for (auto& v : m.values()) v = Eigen::Vector3d(0, 0, -1);
  m(0, 0) = p;
  return m;
}

ImageFrame constant_frame(int h, int w, double v) { return ImageFrame(h, w, Rgb::Constant(v)); }

// Direct re-computation of the residual statistics.
ResidualSummary brute_force_statistics(const ResidualMap& r, const ConfidenceMap& c) {
  const int h = r.values.height(), w = r.values.width();
  double sum = 0, wsum = 0, wtot = 0, energy = 0;
  int n = 0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!r.validity(i, j)) continue;
      ++n;
      sum += r.values(i, j);
      wsum += c(i, j) * r.values(i, j);
      wtot += c(i, j);
      double acc = 0;
      int cnt = 0;
      for (int a = std::max(0, i - 1); a <= std::min(h - 1, i + 1); ++a) {
        for (int b = std::max(0, j - 1); b <= std::min(w - 1, j + 1); ++b) {
          if (r.validity(a, b)) {
            acc += r.values(a, b);
            ++cnt;
          }
        }
      }
      energy += std::pow(r.values(i, j) - acc / cnt, 2);
    }
  }
  ResidualSummary s;
  s.mean = sum / n;
  s.weighted_mean = wtot > 0 ? wsum / wtot : s.mean;
  s.valid_fraction = static_cast<double>(n) / (h * w);
  s.high_frequency_energy = energy / n;
  return s;
}

ResidualMap checkerboard(int h, int w) {
  ResidualMap r{Grid<double>(h, w, 0.0), Mask(h, w, 1)};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) r.values(i, j) = (i + j) % 2;
  }
  return r;
}

}  // namespace

TEST_CASE("project_points maps the optical axis to the principal point") {
  const auto p = project_points(single_point({0, 0, 2}), make_k(100, 32, 32));
  CHECK(p.valid(0, 0));
  CHECK(p.pixels(0, 0).x() == doctest::Approx(32));
  CHECK(p.pixels(0, 0).y() == doctest::Approx(32));
}

TEST_CASE("project_points applies the pinhole formula") {
  const auto p = project_points(single_point({1, 0, 2}), make_k(100, 32, 32));
  CHECK(p.pixels(0, 0).x() == doctest::Approx(82));
  CHECK(p.pixels(0, 0).y() == doctest::Approx(32));
  CHECK(p.depth(0, 0) == 2.0);
}

TEST_CASE("project_points flags points behind the camera") {
  const auto p = project_points(single_point({0, 0, -1}), make_k(100, 32, 32));
  CHECK_FALSE(p.valid(0, 0));
  PointMap on_plane(8, 8);
  on_plane(0, 0) = {0.1, 0.1, kMinDepth};
  CHECK_FALSE(project_points(on_plane, make_k(100, 4, 4)).valid(0, 0));
}

TEST_CASE("projection is invariant to scaling the point map") {
  Rng rng(11);
  PointMap m(16, 16);
  for (auto& v : m.values()) v = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 4)};
  const auto k = make_k(rng.uniform(50, 500), 8, 8);
  const auto base = project_points(m, k);
  for (double lambda : {0.001, 0.37, 2.0, 1e4}) {
    PointMap scaled = m;
    for (auto& v : scaled.values()) v *= lambda;
    const auto p = project_points(scaled, k);
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(p.valid[i] == base.valid[i]);
      CHECK((p.pixels[i] - base.pixels[i]).norm() < 1e-9);
    }
  }
}

TEST_CASE("identity warp reproduces the source") {
  Rng rng(2);
  const ImageFrame src = random_frame(rng, 12, 10);
  const auto k = make_k(30, 5, 6);
  const PointMap pts = backproject(k, Grid<double>(12, 10, 1.5));
  const WarpResult w = forward_warp(src, project_points(pts, k));
  CHECK(w.warped == src);
  for (auto v : w.validity.values()) CHECK(v == 1);
  const ResidualMap r = residual_map(src, w);
  for (double v : r.values.values()) CHECK(v == 0.0);
}

TEST_CASE("warp with every point behind the camera has no valid pixel") {
  Rng rng(3);
  const ImageFrame src = random_frame(rng, 8, 8);
  PointMap pts(8, 8);
  for (auto& v : pts.values()) v = {0, 0, -2};
  const WarpResult w = forward_warp(src, project_points(pts, make_k(10, 4, 4)));
  for (auto v : w.validity.values()) CHECK(v == 0);
  for (double d : w.depth.values()) CHECK(std::isinf(d));
}

TEST_CASE("z-buffer keeps the nearest splat") {
  ImageFrame src(8, 8, Rgb::Constant(0.5));
  src(0, 0) = Rgb(1, 0, 0);
  src(0, 1) = Rgb(0, 0, 1);
  PointMap pts(8, 8);
  for (auto& v : pts.values()) v = {0, 0, -1};
  const auto k = make_k(10, 4, 4);
  // Both land on pixel (row 4, col 4): depth 2.0 first in raster order.
  pts(0, 0) = {0, 0, 2.0};
  pts(0, 1) = {0, 0, 1.0};
  WarpResult w = forward_warp(src, project_points(pts, k));
  CHECK(w.warped(4, 4) == Rgb(0, 0, 1));
  CHECK(w.depth(4, 4) == 1.0);

  pts(0, 0) = {0, 0, 1.0};
  pts(0, 1) = {0, 0, 1.0};
  w = forward_warp(src, project_points(pts, k));
  CHECK(w.warped(4, 4) == Rgb(1, 0, 0));
}

TEST_CASE("residual of opposite constant frames is one") {
  const ImageFrame ref = constant_frame(8, 8, 1.0);
  WarpResult w{constant_frame(8, 8, 0.0), Mask(8, 8, 1), Grid<double>(8, 8, 1.0)};
  const ResidualMap r = residual_map(ref, w);
  for (double v : r.values.values()) CHECK(v == 1.0);
}

TEST_CASE("residual_map rejects mismatched dims") {
  WarpResult w{constant_frame(8, 9, 0.0), Mask(8, 9, 1), Grid<double>(8, 9, 1.0)};
  CHECK_THROWS_AS(residual_map(constant_frame(8, 8, 1.0), w), InvalidArgument);
}

TEST_CASE("residual statistics of a zero residual are zero") {
  ResidualMap r{Grid<double>(8, 8, 0.0), Mask(8, 8, 1)};
  Rng rng(5);
  ConfidenceMap c(8, 8);
  for (double& v : c.values()) v = rng.uniform(0, 3);
  const auto s = residual_statistics(r, c);
  CHECK(s.mean == 0.0);
  CHECK(s.weighted_mean == 0.0);
  CHECK(s.high_frequency_energy == 0.0);
  CHECK(s.valid_fraction == 1.0);
}

TEST_CASE("constant residual has no high-frequency energy") {
  ResidualMap r{Grid<double>(9, 11, 0.5), Mask(9, 11, 1)};
  r.validity(3, 3) = 0;
  const auto s = residual_statistics(r, ConfidenceMap(9, 11, 1.0));
  CHECK(s.mean == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.high_frequency_energy == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("checkerboard residual statistics match hand counts") {
  const ResidualMap r = checkerboard(8, 8);
  const auto s = residual_statistics(r, ConfidenceMap(8, 8, 1.0));
  // Interior pixels see 5 equal and 4 opposite values (diff 4/9); edge and
  // corner pixels see an even split (diff 1/2).
  const double expected = (36.0 * 16.0 / 81.0 + 28.0 * 0.25) / 64.0;
  CHECK(s.mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.high_frequency_energy == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("masked checkerboards match the brute-force statistics") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 8 + static_cast<int>(rng.below(9));
    const int w = 8 + static_cast<int>(rng.below(9));
    ResidualMap r = checkerboard(h, w);
    ConfidenceMap c(h, w);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      r.values[i] *= rng.uniform();
      r.validity[i] = rng.uniform() < 0.7;
      c[i] = rng.uniform(0, 2);
    }
    r.validity[0] = 1;
    const auto s = residual_statistics(r, c);
    const auto o = brute_force_statistics(r, c);
    CHECK(std::abs(s.mean - o.mean) < 1e-12);
    CHECK(std::abs(s.weighted_mean - o.weighted_mean) < 1e-12);
    CHECK(std::abs(s.valid_fraction - o.valid_fraction) < 1e-12);
    CHECK(std::abs(s.high_frequency_energy - o.high_frequency_energy) < 1e-12);
  }
}

TEST_CASE("zero confidence falls back to the plain mean") {
  ResidualMap r = checkerboard(8, 8);
  const auto s = residual_statistics(r, ConfidenceMap(8, 8, 0.0));
  CHECK(s.weighted_mean == s.mean);
}

TEST_CASE("residual statistics without overlap is a data error") {
  ResidualMap r{Grid<double>(8, 8, 0.0), Mask(8, 8, 0)};
  CHECK_THROWS_AS(residual_statistics(r, ConfidenceMap(8, 8, 1.0)), DataError);
}

TEST_CASE("estimate_focal recovers the focal of a constant-depth plane") {
  const auto k = centered_intrinsics(100, 64, 64);
  const PointMap pts = backproject(k, Grid<double>(64, 64, 3.0));
  const auto est = estimate_focal(pts);
  CHECK(std::abs(est.fx - 100) / 100 < 1e-6);
  CHECK(est.fx == est.fy);
  CHECK(est.cx == 32);
  CHECK(est.cy == 32);
}

TEST_CASE("estimate_focal recovers the focal with mixed depths") {
  Rng rng(23);
  const auto k = centered_intrinsics(250, 48, 40);
  Grid<double> depth(48, 40);
  for (double& d : depth.values()) d = rng.uniform(1, 5);
  const auto est = estimate_focal(backproject(k, depth));
  CHECK(std::abs(est.fx - 250) / 250 < 1e-6);
}

TEST_CASE("estimate_focal is exact across the focal range") {
  Rng rng(29);
  for (int trial = 0; trial < 25; ++trial) {
    const double f = rng.uniform(50, 500);
    const int h = 16 + 2 * static_cast<int>(rng.below(20));
    const int w = 16 + 2 * static_cast<int>(rng.below(20));
    Grid<double> depth(h, w);
    for (double& d : depth.values()) d = rng.uniform(0.5, 8);
    const auto est = estimate_focal(backproject(centered_intrinsics(f, h, w), depth));
    CHECK(std::abs(est.fx - f) / f < 1e-6);
  }
}

TEST_CASE("estimate_focal rejects degenerate point maps") {
  CHECK_THROWS_AS(estimate_focal(PointMap(32, 32)), DataError);
  const PointMap small = backproject(centered_intrinsics(50, 9, 9), Grid<double>(9, 9, 1.0));
  CHECK_THROWS_AS(estimate_focal(small), DataError);
}

TEST_CASE("backproject inverts the pinhole formula") {
  const auto k = make_k(100, 32, 32);
  Grid<double> depth(64, 96, 1.0);
  PointMap p = backproject(k, depth);
  CHECK(p(32, 32) == Eigen::Vector3d(0, 0, 1));
  depth(32, 82) = 2.0;
  p = backproject(k, depth);
  CHECK((p(32, 82) - Eigen::Vector3d(1, 0, 2)).norm() < 1e-15);
}

TEST_CASE("projection and backprojection round-trip") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 8 + static_cast<int>(rng.below(57));
    const int w = 8 + static_cast<int>(rng.below(57));
    const CameraIntrinsics k{rng.uniform(20, 800), rng.uniform(20, 800),
                             rng.uniform(0.1, w - 0.1), rng.uniform(0.1, h - 0.1)};
    Grid<double> depth(h, w);
    for (double& d : depth.values()) d = std::exp(rng.uniform(-3, 5));
    const auto proj = project_points(backproject(k, depth), k);
    double worst = 0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        REQUIRE(proj.valid(r, c));
        worst = std::max(worst, (proj.pixels(r, c) - Eigen::Vector2d(c, r)).norm());
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("backproject rejects nonpositive depth") {
  Grid<double> depth(8, 8, 1.0);
  depth(3, 3) = 0.0;
  CHECK_THROWS_AS(backproject(make_k(10, 4, 4), depth), InvalidArgument);
}

TEST_CASE("frame and intrinsics invariants") {
  CHECK_THROWS_AS(ImageFrame(7, 8), InvalidArgument);
  ImageFrame f(8, 8);
  f(1, 1) = Rgb(0, 1.5, 0);
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  f(1, 1) = Rgb(0, std::nan(""), 0);
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  CHECK_NOTHROW(make_k(10, 4, 4).validate(8, 8));
  CHECK_THROWS_AS(make_k(0, 4, 4).validate(8, 8), InvalidArgument);
  CHECK_THROWS_AS(make_k(10, 8, 4).validate(8, 8), InvalidArgument);
  CHECK_THROWS_AS(make_k(10, 4, 0).validate(8, 8), InvalidArgument);
}
