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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewspan/manifest.hpp"

namespace viewspan {

/// Video-level prediction. Fake is the positive class throughout.
struct Prediction {
  std::string id;
  std::string generator;
  PromptModality modality = PromptModality::kNone;
  Label truth = Label::kReal;
  double score = 0.0;
  Label predicted = Label::kReal;
};

struct PredictionSet {
  std::vector<Prediction> rows;

  /// Throws InvalidArgument on duplicate ids or scores outside [0, 1].
  void validate() const;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

Confusion confusion(const PredictionSet& predictions);

/// Fraction of the given (fake) rows predicted fake. Throws on empty input.
double detection_rate(std::span<const Prediction> fakes);

/// detection_rate over the fake rows produced by `generator`.
double generator_accuracy(const PredictionSet& predictions,
                          std::string_view generator);

/// TP / (TP + FN). Throws DataError when there are no positives.
double recall(const Confusion& c);
/// TP / (TP + FP), 0 when nothing is predicted positive.
double precision(const Confusion& c);
/// 2PR / (P + R), 0 when P = R = 0. Throws DataError without positives.
double f1_score(const Confusion& c);

/// Step-wise average precision over descending unique score thresholds;
/// tied scores form one step. Throws DataError without positives.
double average_precision(std::span<const double> scores,
                         std::span<const bool> positive);

double average_precision(const PredictionSet& predictions);

}  // namespace viewspan
