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

#include "viewspan/metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <unordered_set>

#include "viewspan/error.hpp"

namespace viewspan {

void PredictionSet::validate() const {
  std::unordered_set<std::string> ids;
  for (const Prediction& p : rows) {
    if (!ids.insert(p.id).second) {
      throw InvalidArgument("duplicate prediction id '" + p.id + "'");
    }
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw InvalidArgument("prediction score outside [0,1] for '" + p.id + "'");
    }
  }
}

Confusion confusion(const PredictionSet& predictions) {
  Confusion c;
  for (const Prediction& p : predictions.rows) {
    const bool fake = p.truth == Label::kFake;
    const bool called_fake = p.predicted == Label::kFake;
    if (fake && called_fake) ++c.tp;
    if (!fake && called_fake) ++c.fp;
    if (!fake && !called_fake) ++c.tn;
    if (fake && !called_fake) ++c.fn;
  }
  return c;
}

double detection_rate(std::span<const Prediction> fakes) {
  if (fakes.empty()) throw DataError("accuracy over an empty set");
  const auto hits = std::count_if(fakes.begin(), fakes.end(), [](const Prediction& p) {
    return p.predicted == Label::kFake;
  });
  return static_cast<double>(hits) / static_cast<double>(fakes.size());
}

double generator_accuracy(const PredictionSet& predictions,
                          std::string_view generator) {
  std::vector<Prediction> subset;
  for (const Prediction& p : predictions.rows) {
    if (p.truth == Label::kFake && p.generator == generator) subset.push_back(p);
  }
  if (subset.empty()) {
    throw DataError("no fake predictions for generator '" + std::string(generator) + "'");
  }
  return detection_rate(subset);
}

double recall(const Confusion& c) {
  if (c.tp + c.fn == 0) throw DataError("recall undefined without positives");
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double precision(const Confusion& c) {
  if (c.tp + c.fp == 0) return 0.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double f1_score(const Confusion& c) {
  const double r = recall(c);
  const double p = precision(c);
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

double average_precision(std::span<const double> scores,
                         std::span<const bool> positive) {
  if (scores.size() != positive.size()) {
    throw InvalidArgument("average_precision: scores and labels differ in length");
  }
  const auto total_pos = std::count(positive.begin(), positive.end(), true);
  if (total_pos == 0) throw DataError("average precision undefined without positives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      ++seen;
      if (positive[order[i]]) ++tp;
    }
    const double r = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double p = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (r - prev_recall) * p;
    prev_recall = r;
  }
  return ap;
}

double average_precision(const PredictionSet& predictions) {
  std::vector<double> scores;
  std::unique_ptr<bool[]> positive(new bool[predictions.rows.size()]);
  for (std::size_t i = 0; i < predictions.rows.size(); ++i) {
    scores.push_back(predictions.rows[i].score);
    positive[i] = predictions.rows[i].truth == Label::kFake;
  }
  return average_precision(scores,
                           std::span<const bool>(positive.get(), scores.size()));
}

}  // namespace viewspan
