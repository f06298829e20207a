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

// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support.hpp"
#include "viewspan/analysis.hpp"
#include "viewspan/detector.hpp"
#include "viewspan/detector_blocks.hpp"
#include "viewspan/manifest.hpp"
#include "viewspan/metrics.hpp"
#include "viewspan/pointmap_io.hpp"
#include "viewspan/protocol.hpp"
#include "viewspan/synthetic.hpp"

using namespace viewspan;
using Eigen::MatrixXd;
namespace bk = viewspan::blocks;
namespace vt = viewspan::testing;

namespace {

// Pinned tolerances.
constexpr double kPairResidualMax = 2e-2;
constexpr double kRoundTripMax = 1e-9;
constexpr double kFocalRelMax = 1e-6;
constexpr double kGeometrySecondsMax = 10.0;
constexpr double kSeparationRatioMin = 5.0;
constexpr double kSeparationSecondsMax = 120.0;
constexpr double kAccuracyMin = 0.95;
constexpr double kApMin = 0.98;
constexpr double kTrainSecondsMax = 300.0;
constexpr double kOffDiagonalMin = 0.5;
constexpr double kGradientRelMax = 1e-4;
constexpr double kAttentionSumMax = 1e-12;
constexpr double kMetricOracleMax = 1e-12;
constexpr std::uint64_t kCorpusSeed = 7;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("%s %-24s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_pair_residual(const SyntheticSequence& s) {
  double total = 0.0;
  for (std::size_t k = 0; k < s.pairs.size(); ++k) {
    total += analyze_pair(s.frames[k], s.frames[k + 1], s.pairs[k]).summary.weighted_mean;
  }
  return total / static_cast<double>(s.pairs.size());
}

void geometry_oracle() {
  const auto start = Clock::now();
  double worst_pair = 0.0;
  int pairs = 0;
  for (std::uint64_t seed = 101; pairs < 20; ++seed) {
    const SyntheticSequence s =
        make_sequence(make_scene(seed), make_trajectory(6, seed), SequenceOptions{});
    for (std::size_t k = 0; k < s.pairs.size() && pairs < 20; ++k, ++pairs) {
      worst_pair = std::max(
          worst_pair, analyze_pair(s.frames[k], s.frames[k + 1], s.pairs[k]).summary.mean);
    }
  }

  Rng rng(31);
  double worst_round_trip = 0.0;
  double worst_focal = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 8 + static_cast<int>(rng.below(121));
    const int w = 8 + static_cast<int>(rng.below(121));
    const CameraIntrinsics k{rng.uniform(20, 800), rng.uniform(20, 800),
                             rng.uniform(0.1, w - 0.1), rng.uniform(0.1, h - 0.1)};
    Grid<double> depth(h, w);
    for (double& d : depth.values()) d = std::exp(rng.uniform(-3, 5));
    const ProjectedPoints proj = project_points(backproject(k, depth), k);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double err = proj.valid(r, c)
                               ? (proj.pixels(r, c) - Eigen::Vector2d(c, r)).norm()
                               : 1.0;
        worst_round_trip = std::max(worst_round_trip, err);
      }
    }

    const int fh = 16 + static_cast<int>(rng.below(113));
    const int fw = 16 + static_cast<int>(rng.below(113));
    const double f = rng.uniform(30, 600);
    Grid<double> fdepth(fh, fw);
    for (double& d : fdepth.values()) d = rng.uniform(0.5, 20);
    const CameraIntrinsics est = estimate_focal(backproject(centered_intrinsics(f, fh, fw), fdepth));
    worst_focal = std::max({worst_focal, std::abs(est.fx - f) / f, std::abs(est.fy - f) / f});
  }
  const double elapsed = seconds_since(start);
  report("geometry-oracle",
         worst_pair < kPairResidualMax && worst_round_trip < kRoundTripMax &&
             worst_focal < kFocalRelMax && elapsed < kGeometrySecondsMax,
         fmt("max pair residual %.3e (<%.0e) over %d pairs; round-trip %.2e (<%.0e); "
             "focal rel %.2e (<%.0e); %.2fs (<%.0fs)",
             worst_pair, kPairResidualMax, pairs, worst_round_trip, kRoundTripMax, worst_focal,
             kFocalRelMax, elapsed, kGeometrySecondsMax));
}

void consistency_separation() {
  const auto start = Clock::now();
  const Corpus corpus = make_corpus(80, 80, CorpusOptions{}, kCorpusSeed);
  std::vector<double> real, fake;
  for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
    const double r = mean_pair_residual(corpus.sequences[i]);
    (corpus.manifest.rows[i].label == Label::kReal ? real : fake).push_back(r);
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double ratio = mean(fake) / mean(real);

  std::vector<double> sorted_real = real;
  std::sort(sorted_real.begin(), sorted_real.end());
  const double p95 = sorted_real[static_cast<std::size_t>(0.95 * (sorted_real.size() - 1))];
  const double overlap =
      static_cast<double>(std::count_if(fake.begin(), fake.end(), [&](double r) { return r < p95; })) /
      static_cast<double>(fake.size());

  // Geometry-only perturbation of the first 20 real sequences.
  const double sigmas[] = {0.0, 0.01, 0.02, 0.05};
  double curve[4] = {0, 0, 0, 0};
  int violations = 0;
  int used = 0;
  for (std::size_t i = 0; i < corpus.sequences.size() && used < 20; ++i) {
    if (corpus.manifest.rows[i].label != Label::kReal) continue;
    double prev = -1.0;
    for (int s = 0; s < 4; ++s) {
      const double r = mean_pair_residual(
          perturb(corpus.sequences[i], PerturbationSpec{sigmas[s], 0, 0, 1000 + i}));
      curve[s] += r / 20.0;
      violations += r < prev;
      prev = r;
    }
    ++used;
  }
  const bool monotone = curve[0] <= curve[1] && curve[1] <= curve[2] && curve[2] <= curve[3];
  const double elapsed = seconds_since(start);
  report("consistency-separation",
         ratio >= kSeparationRatioMin && monotone && elapsed < kSeparationSecondsMax,
         fmt("fake/real residual %.2f (>=%.0f); residual by sigma %.4f %.4f %.4f %.4f "
             "(per-sequence drops %d); fakes below real p95 %.1f%%; %.1fs (<%.0fs)",
             ratio, kSeparationRatioMin, curve[0], curve[1], curve[2], curve[3], violations,
             100.0 * overlap, elapsed, kSeparationSecondsMax));
}

void detector_training(const std::vector<EvalVideo>& videos) {
  const auto start = Clock::now();
  const ProtocolReport r = run_holdout_protocol(
      videos, temporal_detector_factory(DetectorConfig{}, TrainConfig{}), kCorpusSeed);
  const double elapsed = seconds_since(start);
  report("detector-training",
         r.overall_accuracy >= kAccuracyMin && r.ap >= kApMin && elapsed < kTrainSecondsMax,
         fmt("held-out accuracy %.4f (>=%.2f) AP %.4f (>=%.2f) on %zu videos; "
             "train+score %.1fs (<%.0fs)",
             r.overall_accuracy, kAccuracyMin, r.ap, kApMin, r.predictions.rows.size(),
             elapsed, kTrainSecondsMax));
}

void cross_prompt(const std::vector<EvalVideo>& videos) {
  const auto start = Clock::now();
  const CrossPromptReport r = run_cross_prompt_protocol(
      videos, temporal_detector_factory(DetectorConfig{}, TrainConfig{}), kCorpusSeed);
  const double elapsed = seconds_since(start);
  double worst = 1.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) worst = std::min(worst, r.accuracy[i][j]);
    }
  }
  std::string rows;
  for (int i = 0; i < 3; ++i) {
    rows += fmt("%s[%.2f %.2f %.2f | %.2f] ", to_string(kPromptModalities[i]).data(),
                r.accuracy[i][0], r.accuracy[i][1], r.accuracy[i][2], r.accuracy[i][3]);
  }
  report("cross-prompt", r.accuracy.size() == 3 && r.accuracy[0].size() == 4 && worst > kOffDiagonalMin,
         fmt("3x4 matrix %smin off-diagonal %.3f (>%.1f); %.1fs", rows.c_str(), worst,
             kOffDiagonalMin, elapsed));
}

double gradient_checks(const std::vector<EvalVideo>& videos) {
  Rng rng(5);
  double worst = 0.0;
  for (int input = 0; input < 3; ++input) {
    const MatrixXd x = vt::random_matrix(rng, 6, 8);
    MatrixXd xm = x;
    const MatrixXd r = vt::random_matrix(rng, 6, 8);
    MatrixXd wq = vt::random_matrix(rng, 8, 8, 0.4), wk = vt::random_matrix(rng, 8, 8, 0.4),
             wv = vt::random_matrix(rng, 8, 8, 0.4);
    MatrixXd dq = MatrixXd::Zero(8, 8), dk = dq, dv = dq;
    bk::SelfAttentionCache sc;
    bk::self_attention_forward(xm, wq, wk, wv, &sc);
    MatrixXd dx = bk::self_attention_backward(sc, wq, wk, wv, r, dq, dk, dv);
    const auto attn = [&] {
      return (bk::self_attention_forward(xm, wq, wk, wv, nullptr).array() * r.array()).sum();
    };
    for (auto [p, g] : {std::pair{&wq, &dq}, {&wk, &dk}, {&wv, &dv}, {&xm, &dx}}) {
      worst = std::max(worst, vt::check_gradient(*p, *g, attn, rng));
    }

    MatrixXd w1 = vt::random_matrix(rng, 8, 8, 0.4), b1 = vt::random_matrix(rng, 1, 8),
             w2 = vt::random_matrix(rng, 8, 8, 0.4), b2 = vt::random_matrix(rng, 1, 8);
    MatrixXd dw1 = MatrixXd::Zero(8, 8), db1 = MatrixXd::Zero(1, 8), dw2 = dw1, db2 = db1;
    bk::FeedForwardCache fc;
    bk::feed_forward_forward(xm, w1, b1, w2, b2, &fc);
    dx = bk::feed_forward_backward(fc, w1, w2, r, dw1, db1, dw2, db2);
    const auto ffn = [&] {
      return (bk::feed_forward_forward(xm, w1, b1, w2, b2, nullptr).array() * r.array()).sum();
    };
    for (auto [p, g] : {std::pair{&w1, &dw1}, {&b1, &db1}, {&w2, &dw2}, {&b2, &db2}, {&xm, &dx}}) {
      worst = std::max(worst, vt::check_gradient(*p, *g, ffn, rng));
    }

    MatrixXd keys = vt::random_matrix(rng, 4, 8), values = vt::random_matrix(rng, 4, 8);
    MatrixXd dmq = MatrixXd::Zero(8, 8), dkeys, dvalues;
    bk::MemoryAttentionCache mc;
    bk::memory_attention_forward(xm, wq, keys, values, &mc);
    dx = bk::memory_attention_backward(mc, wq, r, dmq, dkeys, dvalues);
    const auto mem = [&] {
      return (bk::memory_attention_forward(xm, wq, keys, values, nullptr).array() * r.array())
          .sum();
    };
    for (auto [p, g] : {std::pair{&wq, &dmq}, {&keys, &dkeys}, {&values, &dvalues}, {&xm, &dx}}) {
      worst = std::max(worst, vt::check_gradient(*p, *g, mem, rng));
    }
  }

  // Full model at the default size on one real and one fake corpus video.
  const EvalVideo* picks[2] = {nullptr, nullptr};
  for (const EvalVideo& v : videos) {
    const int slot = v.row.label == Label::kFake ? 1 : 0;
    if (!picks[slot]) picks[slot] = &v;
  }
  for (int slot = 0; slot < 2; ++slot) {
    DetectorParams p = DetectorParams::initialize(DetectorConfig{}, 40 + slot);
    DetectorParams g = DetectorParams::zeros(DetectorConfig{});
    const bool fake = slot == 1;
    video_loss_and_grad(picks[slot]->prepared, fake, p, &g);
    std::vector<MatrixXd*> grads;
    g.for_each([&](const char*, MatrixXd& m) { grads.push_back(&m); });
    std::size_t k = 0;
    p.for_each([&](const char*, MatrixXd& m) {
      worst = std::max(worst, vt::check_gradient(m, *grads[k++], [&] {
        return video_loss_and_grad(picks[slot]->prepared, fake, p, nullptr);
      }, rng));
    });
  }
  return worst;
}

double attention_normalization() {
  Rng rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int cols = 1 + static_cast<int>(rng.below(32));
    const MatrixXd p = bk::softmax_rows(vt::random_matrix(rng, 8, cols, 1.0 + trial % 30));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      worst = std::max(worst, std::abs(p.row(i).sum() - 1.0));
    }
    if (p.minCoeff() < 0.0) worst = 1.0;
  }
  return worst;
}

double metric_oracles() {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(50));
    const int levels = 1 + static_cast<int>(rng.below(20));
    std::vector<double> scores(n);
    std::vector<bool> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(levels + 1)) / levels;
      labels[i] = rng.uniform() < 0.5;
    }
    labels[rng.below(n)] = true;
    PredictionSet set;
    double tp = 0, fp = 0, fn = 0;
    for (int i = 0; i < n; ++i) {
      Prediction p;
      p.id = std::to_string(i);
      p.truth = labels[i] ? Label::kFake : Label::kReal;
      p.score = scores[i];
      p.predicted = scores[i] > 0.5 ? Label::kFake : Label::kReal;
      set.rows.push_back(p);
      tp += labels[i] && scores[i] > 0.5;
      fp += !labels[i] && scores[i] > 0.5;
      fn += labels[i] && scores[i] <= 0.5;
    }
    worst = std::max(worst, std::abs(average_precision(set) - vt::brute_force_ap(scores, labels)));
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp / (tp + fn);
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    worst = std::max(worst, std::abs(f1_score(confusion(set)) - f1));
  }
  return worst;
}

int pointmap_round_trips() {
  Rng rng(12);
  int exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(64));
    const int w = 1 + static_cast<int>(rng.below(64));
    const PairRecord r = vt::random_record(rng, h, w, trial % 2 == 0);
    const auto bytes = encode_tensor_file(to_tensor_file(r));
    const PairRecord back = pair_record_from(decode_tensor_file(bytes, kPointMapMagic));
    exact += vt::bit_equal(back, r) && encode_tensor_file(to_tensor_file(back)) == bytes;
  }
  return exact;
}

void numerical_correctness(const std::vector<EvalVideo>& videos) {
  const double grad = gradient_checks(videos);
  const double attn = attention_normalization();
  const double metrics = metric_oracles();
  const int exact = pointmap_round_trips();
  report("numerical-correctness",
         grad < kGradientRelMax && attn < kAttentionSumMax && metrics < kMetricOracleMax &&
             exact == 200,
         fmt("gradient rel %.2e (<%.0e); softmax row sum %.1e (<%.0e); AP/F1 oracle %.1e "
             "(<%.0e) over 1000 cases; PMAP bit-exact %d/200",
             grad, kGradientRelMax, attn, kAttentionSumMax, metrics, kMetricOracleMax, exact));
}

void split_arithmetic() {
  DatasetManifest m;
  for (int i = 0; i < 850 + 2000; ++i) {
    const std::string g = i < 850 ? "gen850" : "gen2000";
    m.rows.push_back({g + "_" + std::to_string(i), g, Label::kFake, g, PromptModality::kT2V,
                      Split::kTrain});
  }
  const SplitResult r = split_train_test(m, 0.2, kCorpusSeed);
  std::size_t a = 0, b = 0;
  for (const ManifestRow& row : r.manifest.rows) {
    if (row.split != Split::kTest) continue;
    (row.generator == "gen850" ? a : b) += 1;
  }
  report("split-arithmetic", a == 170 && b == 400,
         fmt("850 -> %zu test (170), 2000 -> %zu test (400)", a, b));
}

}  // namespace

int main() {
  std::printf("acceptance: corpus seed %llu\n", static_cast<unsigned long long>(kCorpusSeed));
  geometry_oracle();
  consistency_separation();
  split_arithmetic();

  const Corpus corpus = make_corpus(80, 80, CorpusOptions{}, kCorpusSeed);
  const std::vector<EvalVideo> videos = make_eval_set(corpus, DetectorConfig{});
  numerical_correctness(videos);
  detector_training(videos);
  cross_prompt(videos);

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
