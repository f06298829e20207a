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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "viewspan/detector.hpp"
#include "viewspan/manifest.hpp"
#include "viewspan/metrics.hpp"
#include "viewspan/synthetic.hpp"

namespace viewspan {

/// One manifest row with everything a detector needs to score it.
struct EvalVideo {
  ManifestRow row;
  PreparedVideo prepared;
  /// Mean over pairs of the confidence-weighted reprojection residual.
  double residual = 0.0;
};

EvalVideo make_eval_video(const ManifestRow& row,
                          const std::vector<ImageFrame>& frames,
                          const std::vector<PairRecord>& pairs,
                          const DetectorConfig& config);

/// Prepares every corpus sequence, in manifest order.
std::vector<EvalVideo> make_eval_set(const Corpus& corpus,
                                     const DetectorConfig& config);

class VideoDetector {
 public:
  virtual ~VideoDetector() = default;

  virtual std::string name() const = 0;
  virtual void fit(const std::vector<const EvalVideo*>& train) = 0;
  /// Video-level fake score in [0, 1]. Must be safe to call concurrently.
  virtual double score(const EvalVideo& video) const = 0;
  /// Videos scoring above the threshold are labelled fake.
  virtual double threshold() const { return 0.5; }
};

/// Builds a fresh, untrained detector for a protocol run.
using DetectorFactory =
    std::function<std::unique_ptr<VideoDetector>(std::uint64_t seed)>;

/// The memory-attention detector behind the VideoDetector interface.
class TemporalDetector : public VideoDetector {
 public:
  TemporalDetector(const DetectorConfig& config, const TrainConfig& train,
                   double threshold = 0.5);
  /// Wraps already-trained weights; fit() retrains from scratch.
  TemporalDetector(DetectorParams params, const TrainConfig& train,
                   double threshold = 0.5);

  std::string name() const override { return "temporal"; }
  void fit(const std::vector<const EvalVideo*>& train) override;
  double score(const EvalVideo& video) const override;
  double threshold() const override { return threshold_; }

  const DetectorParams& params() const { return params_; }
  const std::vector<double>& loss_curve() const { return loss_curve_; }

 private:
  DetectorConfig config_;
  TrainConfig train_;
  double threshold_;
  DetectorParams params_;
  std::vector<double> loss_curve_;
};

/// Baseline: thresholds the mean reprojection residual. The cut is the
/// midpoint between consecutive training residuals that maximizes
/// training accuracy; score = r / (r + cut), so 0.5 sits at the cut.
class ResidualThresholdDetector : public VideoDetector {
 public:
  std::string name() const override { return "residual-threshold"; }
  void fit(const std::vector<const EvalVideo*>& train) override;
  double score(const EvalVideo& video) const override;

  double cut() const { return cut_; }

 private:
  double cut_ = 0.0;
};

DetectorFactory temporal_detector_factory(const DetectorConfig& config,
                                          const TrainConfig& train,
                                          double threshold = 0.5);
DetectorFactory residual_threshold_factory();

struct GeneratorAccuracy {
  std::string generator;
  std::size_t test_count = 0;
  double accuracy = 0.0;
};

struct ProtocolReport {
  /// "holdout", "train-test" or "cross-prompt".
  std::string protocol;
  std::string detector;
  std::uint64_t seed = 0;
  std::vector<std::string> train_strata;
  std::vector<std::string> test_strata;
  std::vector<GeneratorAccuracy> per_generator;
  /// Mean of per_generator accuracies.
  double average_accuracy_uniform = 0.0;
  /// Per-generator accuracies weighted by their test counts.
  double average_accuracy_weighted = 0.0;
  /// Fraction of all evaluated videos (real and fake) labelled correctly.
  double overall_accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
  Confusion confusion;
  PredictionSet predictions;

  /// Throws InvalidArgument when a metric leaves [0, 1] or the counts
  /// disagree with the predictions.
  void validate() const;
};

/// Trains on the real train split plus `train_generator`'s train split and
/// evaluates the real test split plus every other generator's test split.
ProtocolReport run_train_test_protocol(const std::vector<EvalVideo>& videos,
                                       const std::string& train_generator,
                                       const DetectorFactory& factory,
                                       std::uint64_t seed);

/// Trains on every train row and evaluates every test row.
ProtocolReport run_holdout_protocol(const std::vector<EvalVideo>& videos,
                                    const DetectorFactory& factory,
                                    std::uint64_t seed);

inline constexpr std::array<PromptModality, 3> kPromptModalities = {
    PromptModality::kT2V, PromptModality::kI2V, PromptModality::kV2V};

struct CrossPromptReport {
  std::string detector;
  std::uint64_t seed = 0;
  /// accuracy[train][test]: columns T2V, I2V, V2V, then the average over
  /// all fake test videos (weighted by modality test size).
  std::array<std::array<double, 4>, 3> accuracy{};
  std::array<std::size_t, 3> test_counts{};
  /// One report per training modality.
  std::vector<ProtocolReport> runs;
};

CrossPromptReport run_cross_prompt_protocol(const std::vector<EvalVideo>& videos,
                                            const DetectorFactory& factory,
                                            std::uint64_t seed);

/// "<protocol>_seed<seed>", the stem for report files.
std::string report_stem(const std::string& protocol, std::uint64_t seed);

std::string format_report(const ProtocolReport& report);
/// Long format: metric,stratum,count,value.
std::string report_csv(const ProtocolReport& report);
std::string predictions_csv(const PredictionSet& predictions);

std::string format_cross_prompt(const CrossPromptReport& report);
/// train,T2V,I2V,V2V,Avg
std::string cross_prompt_csv(const CrossPromptReport& report);

}  // namespace viewspan
