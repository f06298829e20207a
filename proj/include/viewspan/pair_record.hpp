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

#include <optional>

#include "viewspan/geometry.hpp"

namespace viewspan {

/// Output of a two-view point-map estimator for frames (I1, I2): both
/// frames' points expressed in camera 1, plus per-pixel confidences.
struct PairRecord {
  PointMap x11;
  PointMap x21;
  ConfidenceMap c11;
  ConfidenceMap c21;
  std::optional<CameraIntrinsics> k1;

  int height() const { return x11.height(); }
  int width() const { return x11.width(); }

  /// Throws InvalidArgument unless all four maps share dimensions and the
  /// contents are finite with nonnegative confidences.
  void validate() const;
};

}  // namespace viewspan
