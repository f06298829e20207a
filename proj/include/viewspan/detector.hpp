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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "viewspan/geometry.hpp"
#include "viewspan/manifest.hpp"
#include "viewspan/pair_record.hpp"

namespace viewspan {

struct DetectorConfig {
  int patch = 8;
  int dim = 32;
  int memory_capacity = 16;

  bool operator==(const DetectorConfig&) const = default;
};

/// Per-pixel input channels: RGB, point (3, depth-normalized), confidence,
/// residual, residual validity.
inline constexpr int kInputChannels = 9;

/// Trainable weights. Every tensor is a dense matrix; biases are 1 x n.
struct DetectorParams {
  DetectorConfig config;

  Eigen::MatrixXd embed_w, embed_b;                  // patch embedding
  Eigen::MatrixXd enc_wq, enc_wk, enc_wv;            // encoder self-attention
  Eigen::MatrixXd enc_w1, enc_b1, enc_w2, enc_b2;    // encoder feedforward
  Eigen::MatrixXd mem_wq, mem_wk;                    // memory read / write
  Eigen::MatrixXd dec_win, dec_bin;                  // decoder input mixing
  Eigen::MatrixXd dec_w1, dec_b1, dec_w2, dec_b2;    // decoder feedforward
  Eigen::MatrixXd score_w1, score_b1, score_w2, score_b2;  // scorer

  /// Random weights (variance 1/fan_in) and zero biases.
  static DetectorParams initialize(const DetectorConfig& config,
                                   std::uint64_t seed);
  /// Same shapes, all zeros.
  static DetectorParams zeros(const DetectorConfig& config);

  /// Visits (canonical name, tensor) in checkpoint order.
  template <typename F>
  void for_each(F&& f) {
    for_each_impl(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    for_each_impl(*this, f);
  }

  bool operator==(const DetectorParams& other) const;

 private:
  template <typename Self, typename F>
  static void for_each_impl(Self& p, F& f) {
    f("embed_w", p.embed_w);
    f("embed_b", p.embed_b);
    f("enc_wq", p.enc_wq);
    f("enc_wk", p.enc_wk);
    f("enc_wv", p.enc_wv);
    f("enc_w1", p.enc_w1);
    f("enc_b1", p.enc_b1);
    f("enc_w2", p.enc_w2);
    f("enc_b2", p.enc_b2);
    f("mem_wq", p.mem_wq);
    f("mem_wk", p.mem_wk);
    f("dec_win", p.dec_win);
    f("dec_bin", p.dec_bin);
    f("dec_w1", p.dec_w1);
    f("dec_b1", p.dec_b1);
    f("dec_w2", p.dec_w2);
    f("dec_b2", p.dec_b2);
    f("score_w1", p.score_w1);
    f("score_b1", p.score_b1);
    f("score_w2", p.score_w2);
    f("score_b2", p.score_b2);
  }
};

/// N x D patch tokens of one frame.
struct EncoderFeatures {
  Eigen::MatrixXd tokens;
  /// Nonzero for patches containing at least one valid residual pixel.
  std::vector<std::uint8_t> valid;
};

/// Ring buffer of key/value memories.
struct MemoryState {
  Eigen::MatrixXd keys;    // M x D
  Eigen::MatrixXd values;  // M x D
  std::vector<std::uint8_t> occupied;
  int cursor = 0;
  /// Per slot, the index of the update that wrote it (-1 when empty).
  std::vector<long> stamp;
  long updates = 0;

  static MemoryState empty(const DetectorConfig& config);
  int occupancy() const;
};

struct DecoderFeatures {
  Eigen::MatrixXd tokens;  // N x D
};

inline constexpr double kLogitClip = 30.0;

struct ScoreTrace {
  std::vector<double> frame_scores;
  double video_score = 0.0;
  double threshold = 0.5;
  Label predicted = Label::kReal;
};

/// Detector input for one frame: per-pixel channels cut into patches, one
/// row per patch (channel-major within the patch).
struct FrameInput {
  Eigen::MatrixXd patches;  // N x (kInputChannels * p * p)
  std::vector<std::uint8_t> valid;
};

/// Inputs for step t: frame t-1 (view 1 of the pair) and frame t (view 2).
struct StepInput {
  FrameInput previous;
  FrameInput current;
};

/// A video reduced to per-step detector inputs; geometry is computed once.
struct PreparedVideo {
  std::vector<StepInput> steps;
};

/// Builds both frames' channel stacks from the pair record and the
/// reprojection residual of (frame_prev -> view 1, frame_t -> view 2).
StepInput prepare_step(const ImageFrame& frame_t, const ImageFrame& frame_prev,
                       const PairRecord& pair_record, const DetectorConfig& config);

/// pairs[k] must relate frames[k] and frames[k + 1].
PreparedVideo prepare_video(const std::vector<ImageFrame>& frames,
                            const std::vector<PairRecord>& pairs,
                            const DetectorConfig& config);

std::pair<EncoderFeatures, EncoderFeatures> encode_pair(
    const ImageFrame& frame_t, const ImageFrame& frame_prev,
    const PairRecord& pair_record, const DetectorParams& params);

EncoderFeatures encode_frame(const FrameInput& input, const DetectorParams& params);

Eigen::MatrixXd memory_read(const EncoderFeatures& features,
                            const MemoryState& memory,
                            const DetectorParams& params);

DecoderFeatures decode(const EncoderFeatures& encoded,
                       const Eigen::MatrixXd& memory_out,
                       const DetectorParams& params);

double score(const DecoderFeatures& decoded, const DetectorParams& params);

/// Scale applied to a memory value written after a frame scored `s`.
double memory_value_scale(double s);

MemoryState memory_update(const DecoderFeatures& decoded, double frame_score,
                          const EncoderFeatures& encoded,
                          const MemoryState& memory,
                          const DetectorParams& params);

/// Runs the read-decode-score-write loop over every step and averages.
ScoreTrace detect_video(const PreparedVideo& video, const DetectorParams& params,
                        double threshold = 0.5);

/// Video score and, when `grad` is non-null, the gradient of the binary
/// cross-entropy loss for label `fake` accumulated into `grad`.
/// Returns the loss.
double video_loss_and_grad(const PreparedVideo& video, bool fake,
                           const DetectorParams& params, DetectorParams* grad);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 100;
  /// 0 means full batch.
  int batch = 0;
  std::uint64_t seed = 7;
};

struct TrainResult {
  DetectorParams params;
  /// Mean training loss before each epoch's update, plus the final loss.
  std::vector<double> loss_curve;
};

struct LabeledVideo {
  const PreparedVideo* video = nullptr;
  bool fake = false;
};

/// Adam on the mean binary cross-entropy of video scores. Throws DataError
/// when the training set is empty or single-class.
TrainResult train_detector(const std::vector<LabeledVideo>& videos,
                           const DetectorConfig& config, const TrainConfig& train);

/// Canonical-name checkpoint in the "PRM1" container.
std::vector<std::uint8_t> encode_checkpoint(const DetectorParams& params);
DetectorParams decode_checkpoint(std::span<const std::uint8_t> bytes);

}  // namespace viewspan
