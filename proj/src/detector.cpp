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

#include "viewspan/detector.hpp"

#include <algorithm>
#include <cmath>

#include "viewspan/detector_blocks.hpp"
#include "viewspan/error.hpp"
#include "viewspan/parallel.hpp"
#include "viewspan/pointmap_io.hpp"
#include "viewspan/rng.hpp"

namespace viewspan {

using Eigen::MatrixXd;
namespace bk = blocks;

namespace {

MatrixXd random_matrix(Rng& rng, int rows, int cols, double fan_in) {
  MatrixXd m(rows, cols);
  const double stddev = 1.0 / std::sqrt(fan_in);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal(0.0, stddev);
  }
  return m;
}

void check_config(const DetectorConfig& c) {
  if (c.patch < 1 || c.dim < 1 || c.memory_capacity < 1) {
    throw InvalidArgument("detector config sizes must be positive");
  }
}

int input_width(const DetectorConfig& c) {
  return kInputChannels * c.patch * c.patch;
}

}  // namespace

DetectorParams DetectorParams::initialize(const DetectorConfig& config,
                                          std::uint64_t seed) {
  check_config(config);
  Rng rng(seed);
  const int d = config.dim;
  const int in = input_width(config);
  DetectorParams p;
  p.config = config;
  p.embed_w = random_matrix(rng, in, d, in);
  p.embed_b = MatrixXd::Zero(1, d);
  p.enc_wq = random_matrix(rng, d, d, d);
  p.enc_wk = random_matrix(rng, d, d, d);
  p.enc_wv = random_matrix(rng, d, d, d);
  p.enc_w1 = random_matrix(rng, d, d, d);
  p.enc_b1 = MatrixXd::Zero(1, d);
  p.enc_w2 = random_matrix(rng, d, d, d);
  p.enc_b2 = MatrixXd::Zero(1, d);
  p.mem_wq = random_matrix(rng, d, d, d);
  p.mem_wk = random_matrix(rng, d, d, d);
  p.dec_win = random_matrix(rng, 2 * d, d, 2 * d);
  p.dec_bin = MatrixXd::Zero(1, d);
  p.dec_w1 = random_matrix(rng, d, d, d);
  p.dec_b1 = MatrixXd::Zero(1, d);
  p.dec_w2 = random_matrix(rng, d, d, d);
  p.dec_b2 = MatrixXd::Zero(1, d);
  p.score_w1 = random_matrix(rng, d, d, d);
  p.score_b1 = MatrixXd::Zero(1, d);
  p.score_w2 = random_matrix(rng, d, 1, d);
  p.score_b2 = MatrixXd::Zero(1, 1);
  return p;
}

DetectorParams DetectorParams::zeros(const DetectorConfig& config) {
  check_config(config);
  const int d = config.dim;
  DetectorParams p;
  p.config = config;
  p.embed_w = MatrixXd::Zero(input_width(config), d);
  p.embed_b = MatrixXd::Zero(1, d);
  for (MatrixXd* m : {&p.enc_wq, &p.enc_wk, &p.enc_wv, &p.enc_w1, &p.enc_w2,
                      &p.mem_wq, &p.mem_wk, &p.dec_w1, &p.dec_w2, &p.score_w1}) {
    *m = MatrixXd::Zero(d, d);
  }
  for (MatrixXd* m : {&p.enc_b1, &p.enc_b2, &p.dec_bin, &p.dec_b1, &p.dec_b2,
                      &p.score_b1}) {
    *m = MatrixXd::Zero(1, d);
  }
  p.dec_win = MatrixXd::Zero(2 * d, d);
  p.score_w2 = MatrixXd::Zero(d, 1);
  p.score_b2 = MatrixXd::Zero(1, 1);
  return p;
}

bool DetectorParams::operator==(const DetectorParams& other) const {
  if (config != other.config) return false;
  std::vector<const MatrixXd*> mine;
  for_each([&](const char*, const MatrixXd& m) { mine.push_back(&m); });
  std::size_t i = 0;
  bool equal = true;
  other.for_each([&](const char*, const MatrixXd& m) {
    const MatrixXd& a = *mine[i++];
    equal = equal && a.rows() == m.rows() && a.cols() == m.cols() && a == m;
  });
  return equal;
}

MemoryState MemoryState::empty(const DetectorConfig& config) {
  check_config(config);
  MemoryState m;
  m.keys = MatrixXd::Zero(config.memory_capacity, config.dim);
  m.values = MatrixXd::Zero(config.memory_capacity, config.dim);
  m.occupied.assign(config.memory_capacity, 0);
  m.stamp.assign(config.memory_capacity, -1);
  return m;
}

int MemoryState::occupancy() const {
  return static_cast<int>(std::count(occupied.begin(), occupied.end(), 1));
}

namespace {

// Fixed per-channel affine maps (value - offset) * gain. They center the
// near-constant channels and lift the residual, whose typical magnitude is a
// few hundredths, to order one.
constexpr double kChannelOffset[kInputChannels] = {0.5, 0.5, 0.5, 0.0, 0.0, 1.0,
                                                   0.5, 0.0, 0.5};
constexpr double kChannelGain[kInputChannels] = {2.0, 2.0, 2.0, 1.0, 1.0, 1.0,
                                                 2.0, 20.0, 2.0};

// Channel stack of one frame cut into p x p patches.
FrameInput build_frame_input(const ImageFrame& frame, const PointMap& points,
                             const ConfidenceMap& confidence,
                             const ResidualMap& residual, double depth_scale,
                             int patch) {
  const int h = frame.height();
  const int w = frame.width();
  const int rows = h / patch;
  const int cols = w / patch;
  const int area = patch * patch;
  FrameInput out;
  out.patches = MatrixXd::Zero(rows * cols, kInputChannels * area);
  out.valid.assign(rows * cols, 0);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      const int token = pr * cols + pc;
      for (int dy = 0; dy < patch; ++dy) {
        for (int dx = 0; dx < patch; ++dx) {
          const int r = pr * patch + dy;
          const int c = pc * patch + dx;
          const int k = dy * patch + dx;
          const Rgb& rgb = frame(r, c);
          const Eigen::Vector3d& p = points(r, c);
          const double channel[kInputChannels] = {
              rgb[0], rgb[1], rgb[2],
              p.x() / depth_scale, p.y() / depth_scale, p.z() / depth_scale,
              confidence(r, c), residual.values(r, c),
              static_cast<double>(residual.validity(r, c))};
          for (int ch = 0; ch < kInputChannels; ++ch) {
            out.patches(token, ch * area + k) =
                (channel[ch] - kChannelOffset[ch]) * kChannelGain[ch];
          }
          if (residual.validity(r, c)) out.valid[token] = 1;
        }
      }
    }
  }
  return out;
}

}  // namespace

StepInput prepare_step(const ImageFrame& frame_t, const ImageFrame& frame_prev,
                       const PairRecord& pair_record,
                       const DetectorConfig& config) {
  check_config(config);
  pair_record.validate();
  if (!frame_prev.same_dims(pair_record.x11) || !frame_t.same_dims(pair_record.x21)) {
    throw InvalidArgument("encode_pair: frame dims differ from the pair record");
  }
  const int h = frame_t.height();
  const int w = frame_t.width();
  if (h % config.patch != 0 || w % config.patch != 0) {
    throw InvalidArgument("frame dims must be divisible by the patch size");
  }
  const CameraIntrinsics k =
      pair_record.k1 ? *pair_record.k1 : estimate_focal(pair_record.x11);
  const WarpResult warp = forward_warp(frame_t, project_points(pair_record.x21, k));
  const ResidualMap residual = residual_map(frame_prev, warp);

  // Point maps come in arbitrary metric units; normalize by the mean depth
  // of the confident view-1 points.
  double depth_sum = 0.0;
  std::size_t depth_count = 0;
  for (std::size_t i = 0; i < pair_record.x11.size(); ++i) {
    const double z = pair_record.x11[i].z();
    if (pair_record.c11[i] > 0.0 && z > kMinDepth) {
      depth_sum += z;
      ++depth_count;
    }
  }
  const double scale = depth_count > 0 ? depth_sum / depth_count : 1.0;

  return {build_frame_input(frame_prev, pair_record.x11, pair_record.c11, residual,
                            scale, config.patch),
          build_frame_input(frame_t, pair_record.x21, pair_record.c21, residual,
                            scale, config.patch)};
}

PreparedVideo prepare_video(const std::vector<ImageFrame>& frames,
                            const std::vector<PairRecord>& pairs,
                            const DetectorConfig& config) {
  if (frames.size() < 2) throw InvalidArgument("a video needs at least 2 frames");
  if (pairs.size() != frames.size() - 1) {
    throw DataError("missing pair record for step t=" +
                    std::to_string(std::min(pairs.size(), frames.size() - 1) + 1));
  }
  PreparedVideo video;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    video.steps.push_back(prepare_step(frames[k + 1], frames[k], pairs[k], config));
  }
  return video;
}

EncoderFeatures encode_frame(const FrameInput& input, const DetectorParams& p) {
  if (input.patches.cols() != p.embed_w.rows()) {
    throw InvalidArgument("patch width does not match the detector config");
  }
  const MatrixXd x0 = bk::linear_forward(input.patches, p.embed_w, p.embed_b, nullptr);
  const MatrixXd x1 = bk::self_attention_forward(x0, p.enc_wq, p.enc_wk, p.enc_wv, nullptr);
  return {bk::feed_forward_forward(x1, p.enc_w1, p.enc_b1, p.enc_w2, p.enc_b2, nullptr),
          input.valid};
}

std::pair<EncoderFeatures, EncoderFeatures> encode_pair(
    const ImageFrame& frame_t, const ImageFrame& frame_prev,
    const PairRecord& pair_record, const DetectorParams& params) {
  const StepInput step = prepare_step(frame_t, frame_prev, pair_record, params.config);
  return {encode_frame(step.current, params), encode_frame(step.previous, params)};
}

namespace {

// Occupied slots in slot order, with the stamp of each.
struct MemoryRows {
  MatrixXd keys, values;
  std::vector<long> stamps;
};

MemoryRows gather(const MemoryState& memory) {
  MemoryRows rows;
  const int n = memory.occupancy();
  rows.keys.resize(n, memory.keys.cols());
  rows.values.resize(n, memory.values.cols());
  int r = 0;
  for (std::size_t slot = 0; slot < memory.occupied.size(); ++slot) {
    if (!memory.occupied[slot]) continue;
    rows.keys.row(r) = memory.keys.row(slot);
    rows.values.row(r) = memory.values.row(slot);
    rows.stamps.push_back(memory.stamp[slot]);
    ++r;
  }
  return rows;
}

void write_slot(MemoryState& memory, const MatrixXd& key, const MatrixXd& value) {
  const int slot = memory.cursor;
  memory.keys.row(slot) = key.row(0);
  memory.values.row(slot) = value.row(0);
  memory.occupied[slot] = 1;
  memory.stamp[slot] = memory.updates++;
  memory.cursor = (memory.cursor + 1) % static_cast<int>(memory.occupied.size());
}

MatrixXd concat_columns(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

MatrixXd memory_read(const EncoderFeatures& features, const MemoryState& memory,
                     const DetectorParams& params) {
  const MemoryRows rows = gather(memory);
  if (rows.stamps.empty()) {
    return MatrixXd::Zero(features.tokens.rows(), params.config.dim);
  }
  return bk::memory_attention_forward(features.tokens, params.mem_wq, rows.keys,
                                      rows.values, nullptr);
}

DecoderFeatures decode(const EncoderFeatures& encoded, const MatrixXd& memory_out,
                       const DetectorParams& p) {
  if (encoded.tokens.rows() != memory_out.rows() ||
      encoded.tokens.cols() != p.config.dim || memory_out.cols() != p.config.dim) {
    throw InvalidArgument("decode: encoder and memory features differ in shape");
  }
  const MatrixXd z = bk::linear_forward(concat_columns(encoded.tokens, memory_out),
                                        p.dec_win, p.dec_bin, nullptr);
  return {bk::feed_forward_forward(z, p.dec_w1, p.dec_b1, p.dec_w2, p.dec_b2, nullptr)};
}

double score(const DecoderFeatures& decoded, const DetectorParams& p) {
  return bk::scorer_forward(decoded.tokens, p.score_w1, p.score_b1, p.score_w2,
                            p.score_b2, nullptr);
}

double memory_value_scale(double s) { return 1.0 - std::abs(2.0 * s - 1.0); }

MemoryState memory_update(const DecoderFeatures& decoded, double frame_score,
                          const EncoderFeatures& encoded, const MemoryState& memory,
                          const DetectorParams& p) {
  MemoryState next = memory;
  const MatrixXd key = encoded.tokens.colwise().mean() * p.mem_wk;
  const MatrixXd value =
      decoded.tokens.colwise().mean() * memory_value_scale(frame_score);
  write_slot(next, key, value);
  return next;
}

ScoreTrace detect_video(const PreparedVideo& video, const DetectorParams& params,
                        double threshold) {
  if (video.steps.empty()) throw InvalidArgument("a video needs at least 2 frames");
  ScoreTrace trace;
  trace.threshold = threshold;
  MemoryState memory = MemoryState::empty(params.config);
  double total = 0.0;
  for (const StepInput& step : video.steps) {
    // Frame t-1's encoding is not consumed downstream: the memory carries
    // the history.
    const EncoderFeatures fe = encode_frame(step.current, params);
    const MatrixXd fc = memory_read(fe, memory, params);
    const DecoderFeatures fd = decode(fe, fc, params);
    const double s = score(fd, params);
    memory = memory_update(fd, s, fe, memory, params);
    trace.frame_scores.push_back(s);
    total += s;
  }
  trace.video_score = total / static_cast<double>(trace.frame_scores.size());
  trace.predicted = trace.video_score > threshold ? Label::kFake : Label::kReal;
  return trace;
}

namespace {

struct StepCache {
  bk::LinearCache embed;
  bk::SelfAttentionCache attention;
  bk::FeedForwardCache encoder_ffn;
  MatrixXd fe;
  bk::MemoryAttentionCache memory;
  std::vector<long> memory_stamps;
  bk::LinearCache decoder_in;
  bk::FeedForwardCache decoder_ffn;
  MatrixXd fd;
  bk::ScorerCache scorer;
};

}  // namespace

double video_loss_and_grad(const PreparedVideo& video, bool fake,
                           const DetectorParams& p, DetectorParams* grad) {
  const std::size_t n = video.steps.size();
  if (n == 0) throw InvalidArgument("a video needs at least 2 frames");
  std::vector<StepCache> caches(n);
  MemoryState memory = MemoryState::empty(p.config);

  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    StepCache& c = caches[t];
    const MatrixXd x0 = bk::linear_forward(video.steps[t].current.patches, p.embed_w,
                                           p.embed_b, &c.embed);
    const MatrixXd x1 =
        bk::self_attention_forward(x0, p.enc_wq, p.enc_wk, p.enc_wv, &c.attention);
    c.fe = bk::feed_forward_forward(x1, p.enc_w1, p.enc_b1, p.enc_w2, p.enc_b2,
                                    &c.encoder_ffn);
    const MemoryRows rows = gather(memory);
    c.memory_stamps = rows.stamps;
    const MatrixXd fc = bk::memory_attention_forward(c.fe, p.mem_wq, rows.keys,
                                                     rows.values, &c.memory);
    const MatrixXd z = bk::linear_forward(concat_columns(c.fe, fc), p.dec_win,
                                          p.dec_bin, &c.decoder_in);
    c.fd = bk::feed_forward_forward(z, p.dec_w1, p.dec_b1, p.dec_w2, p.dec_b2,
                                    &c.decoder_ffn);
    const double s = bk::scorer_forward(c.fd, p.score_w1, p.score_b1, p.score_w2,
                                        p.score_b2, &c.scorer);
    write_slot(memory, c.fe.colwise().mean() * p.mem_wk,
               c.fd.colwise().mean() * memory_value_scale(s));
    total += s;
  }
  const double video_score = total / static_cast<double>(n);
  const double loss = fake ? -std::log(video_score) : -std::log(1.0 - video_score);
  if (grad == nullptr) return loss;

  const double d_video = fake ? -1.0 / video_score : 1.0 / (1.0 - video_score);
  const int d = p.config.dim;
  // Gradients reaching the key / value written at step t from later reads.
  std::vector<MatrixXd> d_key(n, MatrixXd::Zero(1, d));
  std::vector<MatrixXd> d_value(n, MatrixXd::Zero(1, d));
  DetectorParams& g = *grad;

  for (std::size_t t = n; t-- > 0;) {
    const StepCache& c = caches[t];
    const double s = c.scorer.score;
    double d_s = d_video / static_cast<double>(n);

    const MatrixXd fd_mean = c.fd.colwise().mean();
    const double slope = 2.0 * s - 1.0 > 0.0 ? -2.0 : (2.0 * s - 1.0 < 0.0 ? 2.0 : 0.0);
    d_s += (d_value[t].array() * fd_mean.array()).sum() * slope;
    const MatrixXd d_fd_mean = d_value[t] * memory_value_scale(s);

    const MatrixXd fe_mean = c.fe.colwise().mean();
    g.mem_wk.noalias() += fe_mean.transpose() * d_key[t];
    const MatrixXd d_fe_mean = d_key[t] * p.mem_wk.transpose();

    MatrixXd d_fd = bk::scorer_backward(c.scorer, p.score_w1, p.score_w2, d_s,
                                        g.score_w1, g.score_b1, g.score_w2,
                                        g.score_b2);
    d_fd.rowwise() += d_fd_mean.row(0) / static_cast<double>(c.fd.rows());

    const MatrixXd d_z = bk::feed_forward_backward(c.decoder_ffn, p.dec_w1, p.dec_w2,
                                                   d_fd, g.dec_w1, g.dec_b1,
                                                   g.dec_w2, g.dec_b2);
    const MatrixXd d_cat =
        bk::linear_backward(c.decoder_in, p.dec_win, d_z, g.dec_win, g.dec_bin);
    MatrixXd d_fe = d_cat.leftCols(d);
    const MatrixXd d_fc = d_cat.rightCols(d);

    MatrixXd d_keys, d_values;
    d_fe += bk::memory_attention_backward(c.memory, p.mem_wq, d_fc, g.mem_wq, d_keys,
                                          d_values);
    for (std::size_t r = 0; r < c.memory_stamps.size(); ++r) {
      const auto writer = static_cast<std::size_t>(c.memory_stamps[r]);
      d_key[writer] += d_keys.row(r);
      d_value[writer] += d_values.row(r);
    }
    d_fe.rowwise() += d_fe_mean.row(0) / static_cast<double>(c.fe.rows());

    const MatrixXd d_x1 = bk::feed_forward_backward(c.encoder_ffn, p.enc_w1, p.enc_w2,
                                                    d_fe, g.enc_w1, g.enc_b1,
                                                    g.enc_w2, g.enc_b2);
    const MatrixXd d_x0 = bk::self_attention_backward(c.attention, p.enc_wq, p.enc_wk,
                                                      p.enc_wv, d_x1, g.enc_wq,
                                                      g.enc_wk, g.enc_wv);
    bk::linear_backward(c.embed, p.embed_w, d_x0, g.embed_w, g.embed_b,
                        /*need_input_grad=*/false);
  }
  return loss;
}

namespace {

// Gradient of the mean loss over a batch; chunks are summed in a fixed
// order so the result does not depend on the worker count.
double batch_loss_and_grad(const std::vector<LabeledVideo>& videos,
                           const std::vector<std::size_t>& batch,
                           const DetectorParams& params, DetectorParams& grad) {
  constexpr std::size_t kChunk = 8;
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<DetectorParams> partial(chunks, DetectorParams::zeros(params.config));
  std::vector<double> losses(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t ci) {
    const std::size_t end = std::min(batch.size(), (ci + 1) * kChunk);
    for (std::size_t i = ci * kChunk; i < end; ++i) {
      const LabeledVideo& v = videos[batch[i]];
      losses[ci] += video_loss_and_grad(*v.video, v.fake, params, &partial[ci]);
    }
  });
  grad = DetectorParams::zeros(params.config);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t ci = 0; ci < chunks; ++ci) {
    loss += losses[ci];
    std::vector<MatrixXd*> dst;
    grad.for_each([&](const char*, MatrixXd& m) { dst.push_back(&m); });
    std::size_t k = 0;
    partial[ci].for_each([&](const char*, const MatrixXd& m) { *dst[k++] += m; });
  }
  grad.for_each([&](const char*, MatrixXd& m) { m *= inv; });
  return loss * inv;
}

double mean_loss(const std::vector<LabeledVideo>& videos, const DetectorParams& params) {
  std::vector<double> losses(videos.size(), 0.0);
  parallel_for(videos.size(), [&](std::size_t i) {
    losses[i] = video_loss_and_grad(*videos[i].video, videos[i].fake, params, nullptr);
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(videos.size());
}

}  // namespace

TrainResult train_detector(const std::vector<LabeledVideo>& videos,
                           const DetectorConfig& config, const TrainConfig& train) {
  if (videos.empty()) throw DataError("training set is empty");
  const bool has_fake = std::any_of(videos.begin(), videos.end(),
                                    [](const LabeledVideo& v) { return v.fake; });
  const bool has_real = std::any_of(videos.begin(), videos.end(),
                                    [](const LabeledVideo& v) { return !v.fake; });
  if (!has_fake || !has_real) {
    throw DataError("training set must contain both real and fake videos");
  }
  if (train.epochs < 0 || train.batch < 0 || !(train.learning_rate >= 0.0)) {
    throw InvalidArgument("invalid training hyperparameters");
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  TrainResult result{DetectorParams::initialize(config, train.seed), {}};
  DetectorParams& params = result.params;
  DetectorParams m1 = DetectorParams::zeros(config);
  DetectorParams m2 = DetectorParams::zeros(config);
  DetectorParams grad = DetectorParams::zeros(config);

  const std::size_t batch_size =
      train.batch == 0 ? videos.size()
                       : std::min<std::size_t>(videos.size(), train.batch);
  std::vector<std::size_t> order(videos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(train.seed, "batches"));

  long step = 0;
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    if (batch_size < videos.size()) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.below(i)]);
      }
    }
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::vector<std::size_t> batch(
          order.begin() + start,
          order.begin() + std::min(order.size(), start + batch_size));
      epoch_loss += batch_loss_and_grad(videos, batch, params, grad);
      ++batches;
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      std::vector<MatrixXd*> g_list, m_list, v_list;
      grad.for_each([&](const char*, MatrixXd& m) { g_list.push_back(&m); });
      m1.for_each([&](const char*, MatrixXd& m) { m_list.push_back(&m); });
      m2.for_each([&](const char*, MatrixXd& m) { v_list.push_back(&m); });
      std::size_t k = 0;
      params.for_each([&](const char*, MatrixXd& w) {
        const MatrixXd& gk = *g_list[k];
        MatrixXd& mk = *m_list[k];
        MatrixXd& vk = *v_list[k];
        mk = kBeta1 * mk + (1.0 - kBeta1) * gk;
        vk = kBeta2 * vk + (1.0 - kBeta2) * gk.cwiseProduct(gk);
        w.array() -= train.learning_rate * (mk.array() / c1) /
                     ((vk.array() / c2).sqrt() + kEps);
        ++k;
      });
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(batches));
  }
  result.loss_curve.push_back(mean_loss(videos, params));
  return result;
}

std::vector<std::uint8_t> encode_checkpoint(const DetectorParams& params) {
  TensorFile file{std::string(kParamsMagic), {}};
  const DetectorConfig& c = params.config;
  file.entries.push_back({"config", {3},
                          {static_cast<float>(c.patch), static_cast<float>(c.dim),
                           static_cast<float>(c.memory_capacity)}});
  params.for_each([&](const char* name, const MatrixXd& m) {
    TensorEntry e{name,
                  {static_cast<std::uint32_t>(m.rows()),
                   static_cast<std::uint32_t>(m.cols())},
                  {}};
    e.data.reserve(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        e.data.push_back(static_cast<float>(m(i, j)));
      }
    }
    file.entries.push_back(std::move(e));
  });
  return encode_tensor_file(file);
}

DetectorParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  const TensorFile file = decode_tensor_file(bytes, kParamsMagic);
  const TensorEntry* cfg = file.find("config");
  if (cfg == nullptr) {
    throw FormatError(FormatErrorKind::kMissingEntry, file.byte_size,
                      "required entry 'config' absent");
  }
  if (cfg->dims != std::vector<std::uint32_t>{3}) {
    throw FormatError(FormatErrorKind::kDimMismatch, cfg->offset,
                      "entry 'config' must have dims (3)");
  }
  DetectorConfig config{static_cast<int>(cfg->data[0]), static_cast<int>(cfg->data[1]),
                        static_cast<int>(cfg->data[2])};
  if (config.patch < 1 || config.dim < 1 || config.memory_capacity < 1 ||
      config.patch > 256 || config.dim > 4096 || config.memory_capacity > 65536) {
    throw FormatError(FormatErrorKind::kInvariant, cfg->offset,
                      "implausible detector config");
  }
  DetectorParams params = DetectorParams::zeros(config);
  params.for_each([&](const char* name, MatrixXd& m) {
    const TensorEntry* e = file.find(name);
    if (e == nullptr) {
      throw FormatError(FormatErrorKind::kMissingEntry, file.byte_size,
                        std::string("required entry '") + name + "' absent");
    }
    if (e->dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(m.rows()),
                                              static_cast<std::uint32_t>(m.cols())}) {
      throw FormatError(FormatErrorKind::kDimMismatch, e->offset,
                        std::string("entry '") + name + "' has the wrong shape");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const float v = e->data[static_cast<std::size_t>(i * m.cols() + j)];
        if (!std::isfinite(v)) {
          throw FormatError(FormatErrorKind::kInvariant, e->offset,
                            std::string("entry '") + name + "' is not finite");
        }
        m(i, j) = v;
      }
    }
  });
  return params;
}

}  // namespace viewspan
