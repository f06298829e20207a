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

#include "viewspan/analysis.hpp"

#include "viewspan/error.hpp"

namespace viewspan {

PairAnalysis analyze_pair(const ImageFrame& frame1, const ImageFrame& frame2,
                          const PairRecord& record) {
  record.validate();
  if (!frame1.same_dims(record.x11) || !frame2.same_dims(record.x21)) {
    throw InvalidArgument("analyze_pair: frames and pair record differ in size");
  }
  PairAnalysis out;
  out.intrinsics = record.k1 ? *record.k1 : estimate_focal(record.x11);
  out.warp = forward_warp(frame2, project_points(record.x21, out.intrinsics));
  out.residual = residual_map(frame1, out.warp);
  out.summary = residual_statistics(out.residual, record.c11);
  return out;
}

}  // namespace viewspan
