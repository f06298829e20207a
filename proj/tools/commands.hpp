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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "viewspan/detector.hpp"

namespace viewspan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitAcceptance = 4;

struct SynthConfig {
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int n_real = 80;
  int n_fake = 80;
  double test_fraction = 0.2;
};

struct AnalyzeConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;
  /// Heatmap intensity = gain * residual, clamped to [0, 1].
  double heatmap_gain = 10.0;
};

struct TrainRunConfig {
  std::filesystem::path corpus;
  std::filesystem::path checkpoint;
  DetectorConfig detector;
  TrainConfig train;
};

struct DetectConfig {
  std::filesystem::path video;
  std::filesystem::path checkpoint;
  std::filesystem::path out;
  double threshold = 0.5;
};

struct EvalConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;
  /// "holdout", "train-test" or "cross-prompt".
  std::string protocol = "holdout";
  /// "temporal" or "residual-threshold".
  std::string detector = "temporal";
  /// Training family for train-test; empty picks the first fake generator.
  std::string train_generator;
  std::uint64_t seed = 7;
  double threshold = 0.5;
  DetectorConfig detector_config;
  TrainConfig train;
  std::optional<double> min_accuracy;
  std::optional<double> min_ap;
  std::optional<double> min_offdiagonal;
};

/// Each command returns an exit code and reports progress on stdout.
/// Errors propagate as viewspan exceptions; run_cli maps them to codes.
int cmd_synth(const SynthConfig& config);
int cmd_analyze(const AnalyzeConfig& config);
int cmd_train(const TrainRunConfig& config);
int cmd_detect(const DetectConfig& config);
int cmd_eval(const EvalConfig& config);

int run_cli(int argc, const char* const* argv);

}  // namespace viewspan::cli
