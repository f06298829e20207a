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

#include "viewspan/pair_record.hpp"

#include <cmath>

#include "viewspan/error.hpp"

namespace viewspan {

void PairRecord::validate() const {
  if (!x11.same_dims(x21) || !x11.same_dims(c11) || !x11.same_dims(c21)) {
    throw InvalidArgument("pair record maps have inconsistent dimensions");
  }
  for (const PointMap* pm : {&x11, &x21}) {
    for (const Eigen::Vector3d& p : pm->values()) {
      if (!p.allFinite()) throw InvalidArgument("pair record has non-finite point");
    }
  }
  for (const ConfidenceMap* cm : {&c11, &c21}) {
    for (double c : cm->values()) {
      if (!std::isfinite(c) || c < 0.0) {
        throw InvalidArgument("pair record has negative or non-finite confidence");
      }
    }
  }
}

}  // namespace viewspan
