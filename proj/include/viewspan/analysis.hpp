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

#include "viewspan/geometry.hpp"
#include "viewspan/pair_record.hpp"

namespace viewspan {

/// Reprojection of frame 2 into view 1 through a pair record, and the
/// residual against frame 1.
struct PairAnalysis {
  CameraIntrinsics intrinsics;
  WarpResult warp;
  ResidualMap residual;
  ResidualSummary summary;
};

/// Uses the record's K1 when present, otherwise estimates it from X11.
/// Residual statistics are weighted by C11.
PairAnalysis analyze_pair(const ImageFrame& frame1, const ImageFrame& frame2,
                          const PairRecord& record);

}  // namespace viewspan
