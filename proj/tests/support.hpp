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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "viewspan/geometry.hpp"
#include "viewspan/pair_record.hpp"
#include "viewspan/rng.hpp"

namespace viewspan::testing {

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols,
                                     double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline ImageFrame random_frame(Rng& rng, int h, int w) {
  ImageFrame f(h, w);
  for (Rgb& px : f.values()) px = Rgb(rng.uniform(), rng.uniform(), rng.uniform());
  return f;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

/// Central-difference check of `grad` against `loss` on `count` random
/// coordinates of `param`. Returns the worst relative error.
inline double check_gradient(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
                             const std::function<double()>& loss, Rng& rng,
                             int count = 20, double h = 1e-5) {
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const auto i = static_cast<Eigen::Index>(rng.below(param.size()));
    const double old = param.data()[i];
    param.data()[i] = old + h;
    const double up = loss();
    param.data()[i] = old - h;
    const double down = loss();
    param.data()[i] = old;
    worst = std::max(worst, relative_error(grad.data()[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

/// FNV-1a over values quantized to 1e-9, stable across summation order.
inline std::uint64_t digest(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const long long q = std::llround(m.data()[i] * 1e9);
    unsigned char bytes[sizeof q];
    std::memcpy(bytes, &q, sizeof q);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

/// Average precision with every distinct score tried as a threshold; each
/// predicts positive for score >= t.
inline double brute_force_ap(const std::vector<double>& scores,
                             const std::vector<bool>& positive) {
  const std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  const double total =
      static_cast<double>(std::count(positive.begin(), positive.end(), true));
  double ap = 0.0;
  double prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, called = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        called += 1.0;
        tp += positive[i] ? 1.0 : 0.0;
      }
    }
    const double r = tp / total;
    ap += (r - prev_recall) * (tp / called);
    prev_recall = r;
  }
  return ap;
}

inline double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

/// Pair record whose values are all exactly representable in float32.
inline PairRecord random_record(Rng& rng, int h, int w, bool with_k) {
  PairRecord r{PointMap(h, w), PointMap(h, w), ConfidenceMap(h, w), ConfidenceMap(h, w), {}};
  for (std::size_t i = 0; i < r.x11.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      r.x11[i][c] = f32(rng.normal() * 3);
      r.x21[i][c] = f32(rng.normal() * 3);
    }
    r.c11[i] = f32(rng.uniform(0, 5));
    r.c21[i] = f32(rng.uniform(0, 5));
  }
  if (with_k) {
    r.k1 = CameraIntrinsics{f32(rng.uniform(10, 500)), f32(rng.uniform(10, 500)),
                            f32(w / 2.0), f32(h / 2.0)};
  }
  return r;
}

inline bool bit_equal(const PairRecord& a, const PairRecord& b) {
  const auto same = [](const auto& x, const auto& y) {
    return x.size() == y.size() &&
           std::memcmp(x.values().data(), y.values().data(),
                       x.size() * sizeof(*x.values().data())) == 0;
  };
  return same(a.x11, b.x11) && same(a.x21, b.x21) && same(a.c11, b.c11) &&
         same(a.c21, b.c21) && a.k1 == b.k1;
}

}  // namespace viewspan::testing
