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

#include "commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "viewspan/analysis.hpp"
#include "viewspan/error.hpp"
#include "viewspan/manifest.hpp"
#include "viewspan/parallel.hpp"
#include "viewspan/pointmap_io.hpp"
#include "viewspan/protocol.hpp"
#include "viewspan/synthetic.hpp"

namespace fs = std::filesystem;

namespace viewspan::cli {
namespace {

constexpr const char* kManifestFile = "manifest.csv";

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct CorpusOnDisk {
  fs::path root;
  DatasetManifest manifest;
};

CorpusOnDisk open_corpus(const fs::path& root) {
  const fs::path manifest = root / kManifestFile;
  if (!fs::exists(manifest)) throw DataError("manifest not found: " + manifest.string());
  const auto bytes = read_file_bytes(manifest);
  return {root, load_manifest(std::string(bytes.begin(), bytes.end()))};
}

std::vector<EvalVideo> load_eval_set(const CorpusOnDisk& corpus,
                                     const DetectorConfig& config) {
  std::vector<EvalVideo> videos(corpus.manifest.rows.size());
  parallel_for(videos.size(), [&](std::size_t i) {
    const ManifestRow& row = corpus.manifest.rows[i];
    const VideoData data = load_video(scan_video_dir(corpus.root / row.path));
    videos[i] = make_eval_video(row, data.frames, data.pairs, config);
  });
  return videos;
}

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw InvalidArgument(std::string("missing required ") + flag);
}

ImageFrame heatmap_frame(const Grid<double>& field) {
  ImageFrame frame(field.height(), field.width());
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      frame(r, c) = Rgb::Constant(std::clamp(field(r, c), 0.0, 1.0));
    }
  }
  return frame;
}

DetectorFactory make_factory(const EvalConfig& config) {
  if (config.detector == "temporal") {
    return temporal_detector_factory(config.detector_config, config.train,
                                     config.threshold);
  }
  if (config.detector == "residual-threshold") return residual_threshold_factory();
  throw InvalidArgument("unknown detector '" + config.detector + "'");
}

struct Check {
  std::string name;
  double value;
  double minimum;
};

int report_checks(const std::vector<Check>& checks) {
  int code = kExitOk;
  for (const Check& c : checks) {
    const bool ok = c.value >= c.minimum;
    std::cout << (ok ? "ok   " : "FAIL ") << c.name << " " << num(c.value, 4)
              << " (min " << num(c.minimum, 4) << ")\n";
    if (!ok) code = kExitAcceptance;
  }
  return code;
}

}  // namespace

int cmd_synth(const SynthConfig& config) {
  require_path(config.out, "--out");
  if (config.n_real < 1 || config.n_fake < 1) {
    throw InvalidArgument("--n-real and --n-fake must be at least 1");
  }
  if (fs::exists(config.out) && !fs::exists(config.out / kManifestFile) &&
      !fs::is_empty(config.out)) {
    throw InvalidArgument("refusing to replace non-corpus directory " +
                          config.out.string());
  }

  CorpusOptions options;
  options.test_fraction = config.test_fraction;
  const Corpus corpus = make_corpus(config.n_real, config.n_fake, options, config.seed);
  for (const std::string& w : corpus.split_warnings) std::cerr << "warning: " << w << "\n";

  const fs::path out = fs::absolute(config.out).lexically_normal();
  const fs::path stage =
      out.parent_path() / ("." + out.filename().string() + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(stage);
  try {
    fs::create_directories(stage);
    parallel_for(corpus.sequences.size(), [&](std::size_t i) {
      const SyntheticSequence& s = corpus.sequences[i];
      write_video(stage / corpus.manifest.rows[i].path, s.frames, s.pairs);
    });
    write_file_atomic(stage / kManifestFile, corpus.manifest.to_csv());
    fs::remove_all(out);
    fs::rename(stage, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
  std::cout << "wrote " << corpus.sequences.size() << " sequences to " << out.string()
            << "\n";
  return kExitOk;
}

int cmd_analyze(const AnalyzeConfig& config) {
  require_path(config.corpus, "--corpus");
  require_path(config.out, "--out");
  const CorpusOnDisk corpus = open_corpus(config.corpus);
  const auto& rows = corpus.manifest.rows;
  fs::create_directories(config.out / "heatmaps");

  std::vector<std::string> lines(rows.size());
  std::vector<double> video_mean(rows.size(), 0.0);
  parallel_for(rows.size(), [&](std::size_t i) {
    const ManifestRow& row = rows[i];
    const VideoData data = load_video(scan_video_dir(corpus.root / row.path));
    std::ostringstream out;
    for (std::size_t k = 0; k < data.pairs.size(); ++k) {
      const PairAnalysis a = analyze_pair(data.frames[k], data.frames[k + 1], data.pairs[k]);
      const ResidualSummary& s = a.summary;
      out << row.id << "," << to_string(row.label) << "," << row.generator << "," << k
          << "," << num(s.mean) << "," << num(s.weighted_mean) << ","
          << num(s.valid_fraction) << "," << num(s.high_frequency_energy) << "\n";
      video_mean[i] += s.weighted_mean / static_cast<double>(data.pairs.size());

      Grid<double> scaled = a.residual.values;
      for (double& v : scaled.values()) v *= config.heatmap_gain;
      const std::string stem = row.id + "_" + std::string(pair_file_name(k)).substr(0, 8);
      write_frame_file(config.out / "heatmaps" / (stem + ".frm"), heatmap_frame(scaled));
      write_file_atomic(config.out / "heatmaps" / (stem + ".pgm"), encode_pgm(scaled));
    }
    lines[i] = out.str();
  });

  std::string csv =
      "id,label,generator,pair,mean,weighted_mean,valid_fraction,high_frequency_energy\n";
  for (const std::string& l : lines) csv += l;
  write_file_atomic(config.out / "residuals.csv", csv);

  double real = 0.0, fake = 0.0;
  std::size_t n_real = 0, n_fake = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].label == Label::kReal) {
      real += video_mean[i];
      ++n_real;
    } else {
      fake += video_mean[i];
      ++n_fake;
    }
  }
  std::ostringstream summary;
  summary << "label,videos,mean_weighted_residual\n";
  if (n_real) summary << "real," << n_real << "," << num(real / n_real) << "\n";
  if (n_fake) summary << "fake," << n_fake << "," << num(fake / n_fake) << "\n";
  if (n_real && n_fake && real > 0.0) {
    summary << "ratio,," << num((fake / n_fake) / (real / n_real), 4) << "\n";
  }
  write_file_atomic(config.out / "summary.csv", summary.str());
  std::cout << summary.str();
  return kExitOk;
}

int cmd_train(const TrainRunConfig& config) {
  require_path(config.corpus, "--corpus");
  require_path(config.checkpoint, "--checkpoint");
  const CorpusOnDisk corpus = open_corpus(config.corpus);
  const std::vector<EvalVideo> videos = load_eval_set(corpus, config.detector);

  std::vector<LabeledVideo> train;
  for (const EvalVideo& v : videos) {
    if (v.row.split == Split::kTrain) {
      train.push_back({&v.prepared, v.row.label == Label::kFake});
    }
  }
  const TrainResult result = train_detector(train, config.detector, config.train);
  write_file_atomic(config.checkpoint, encode_checkpoint(result.params));

  std::string curve = "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
    curve += std::to_string(e) + "," + num(result.loss_curve[e], 8) + "\n";
  }
  fs::path curve_path = config.checkpoint;
  curve_path += ".loss.csv";
  write_file_atomic(curve_path, curve);
  std::cout << "trained on " << train.size() << " videos, final loss "
            << num(result.loss_curve.back(), 6) << "\n";
  return kExitOk;
}

int cmd_detect(const DetectConfig& config) {
  require_path(config.video, "--video");
  require_path(config.checkpoint, "--checkpoint");
  require_path(config.out, "--out");
  if (!fs::exists(config.checkpoint)) {
    throw DataError("checkpoint not found: " + config.checkpoint.string());
  }
  const DetectorParams params = decode_checkpoint(read_file_bytes(config.checkpoint));
  const VideoData data = load_video(scan_video_dir(config.video));
  const PreparedVideo video = prepare_video(data.frames, data.pairs, params.config);
  const ScoreTrace trace = detect_video(video, params, config.threshold);

  std::string csv = "frame,score\n";
  for (std::size_t t = 0; t < trace.frame_scores.size(); ++t) {
    csv += std::to_string(t + 1) + "," + num(trace.frame_scores[t], 8) + "\n";
  }
  csv += "video," + num(trace.video_score, 8) + "\n";
  csv += "threshold," + num(trace.threshold, 8) + "\n";
  csv += "predicted," + std::string(to_string(trace.predicted)) + "\n";
  write_file_atomic(config.out, csv);
  std::cout << to_string(trace.predicted) << " " << num(trace.video_score, 6) << "\n";
  return kExitOk;
}

int cmd_eval(const EvalConfig& config) {
  require_path(config.corpus, "--corpus");
  require_path(config.out, "--out");
  if (config.protocol != "holdout" && config.protocol != "train-test" &&
      config.protocol != "cross-prompt") {
    throw InvalidArgument("unknown protocol '" + config.protocol + "'");
  }
  const DetectorFactory factory = make_factory(config);
  const CorpusOnDisk corpus = open_corpus(config.corpus);
  const std::vector<EvalVideo> videos = load_eval_set(corpus, config.detector_config);
  fs::create_directories(config.out);
  const std::string stem = report_stem(config.protocol, config.seed);

  std::vector<Check> checks;
  if (config.protocol == "cross-prompt") {
    const CrossPromptReport report = run_cross_prompt_protocol(videos, factory, config.seed);
    const std::string text = format_cross_prompt(report);
    write_file_atomic(config.out / (stem + ".txt"), text);
    write_file_atomic(config.out / (stem + ".csv"), cross_prompt_csv(report));
    std::cout << text;
    if (config.min_offdiagonal) {
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
          if (i == j) continue;
          checks.push_back({std::string(to_string(kPromptModalities[i])) + "->" +
                                std::string(to_string(kPromptModalities[j])),
                            report.accuracy[i][j], *config.min_offdiagonal});
        }
      }
    }
  } else if (config.protocol == "holdout" || config.protocol == "train-test") {
    ProtocolReport report;
    if (config.protocol == "holdout") {
      report = run_holdout_protocol(videos, factory, config.seed);
    } else {
      std::string family = config.train_generator;
      if (family.empty()) {
        const auto it = std::find_if(videos.begin(), videos.end(), [](const EvalVideo& v) {
          return v.row.label == Label::kFake;
        });
        if (it == videos.end()) throw DataError("corpus has no fake videos");
        family = it->row.generator;
      }
      report = run_train_test_protocol(videos, family, factory, config.seed);
    }
    const std::string text = format_report(report);
    write_file_atomic(config.out / (stem + ".txt"), text);
    write_file_atomic(config.out / (stem + ".csv"), report_csv(report));
    write_file_atomic(config.out / (stem + "_predictions.csv"),
                      predictions_csv(report.predictions));
    std::cout << text;
    if (config.min_accuracy) {
      checks.push_back({"overall_accuracy", report.overall_accuracy, *config.min_accuracy});
    }
    if (config.min_ap) checks.push_back({"ap", report.ap, *config.min_ap});
  } else {
    throw InvalidArgument("unknown protocol '" + config.protocol + "'");
  }
  return report_checks(checks);
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-view consistency analysis and video forgery detection"};
  app.set_config("--config", "", "Optional TOML/INI config file; flags win");
  app.require_subcommand(1);

  SynthConfig synth;
  auto* s = app.add_subcommand("synth", "Generate the synthetic corpus");
  s->add_option("--out", synth.out, "Output corpus directory")->required();
  s->add_option("--seed", synth.seed, "Corpus seed")->required();
  s->add_option("--n-real", synth.n_real, "Real sequences");
  s->add_option("--n-fake", synth.n_fake, "Perturbed sequences");
  s->add_option("--test-fraction", synth.test_fraction, "Test share per stratum");

  AnalyzeConfig analyze;
  auto* a = app.add_subcommand("analyze", "Per-pair reprojection residuals and heatmaps");
  a->add_option("--corpus", analyze.corpus, "Corpus directory")->required();
  a->add_option("--out", analyze.out, "Output directory")->required();
  a->add_option("--heatmap-gain", analyze.heatmap_gain, "Heatmap intensity gain");

  TrainRunConfig train;
  auto* t = app.add_subcommand("train", "Train the detector on the train split");
  t->add_option("--corpus", train.corpus, "Corpus directory")->required();
  t->add_option("--checkpoint", train.checkpoint, "Output checkpoint")->required();
  t->add_option("--seed", train.train.seed, "Initialization seed");
  t->add_option("--epochs", train.train.epochs, "Training epochs");
  t->add_option("--lr", train.train.learning_rate, "Adam learning rate");

  DetectConfig detect;
  auto* d = app.add_subcommand("detect", "Score one video directory");
  d->add_option("--video", detect.video, "Video directory")->required();
  d->add_option("--checkpoint", detect.checkpoint, "Checkpoint file")->required();
  d->add_option("--out", detect.out, "Score trace CSV")->required();
  d->add_option("--threshold", detect.threshold, "Fake threshold on the video score");

  EvalConfig eval;
  double min_accuracy = -1.0, min_ap = -1.0, min_offdiag = -1.0;
  auto* e = app.add_subcommand("eval", "Run an evaluation protocol");
  e->add_option("--corpus", eval.corpus, "Corpus directory")->required();
  e->add_option("--out", eval.out, "Report directory")->required();
  e->add_option("--protocol", eval.protocol, "holdout | train-test | cross-prompt")
      ->check(CLI::IsMember({"holdout", "train-test", "cross-prompt"}));
  e->add_option("--detector", eval.detector, "temporal | residual-threshold")
      ->check(CLI::IsMember({"temporal", "residual-threshold"}));
  e->add_option("--train-generator", eval.train_generator, "Training family (train-test)");
  e->add_option("--seed", eval.seed, "Detector seed");
  e->add_option("--threshold", eval.threshold, "Fake threshold on the video score");
  e->add_option("--epochs", eval.train.epochs, "Training epochs");
  e->add_option("--lr", eval.train.learning_rate, "Adam learning rate");
  e->add_option("--min-accuracy", min_accuracy, "Fail (exit 4) below this accuracy");
  e->add_option("--min-ap", min_ap, "Fail (exit 4) below this AP");
  e->add_option("--min-offdiagonal", min_offdiag,
                "Fail (exit 4) if a cross-prompt off-diagonal entry is below this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*a) return cmd_analyze(analyze);
    if (*t) return cmd_train(train);
    if (*d) return cmd_detect(detect);
    if (e->count("--min-accuracy")) eval.min_accuracy = min_accuracy;
    if (e->count("--min-ap")) eval.min_ap = min_ap;
    if (e->count("--min-offdiagonal")) eval.min_offdiagonal = min_offdiag;
    return cmd_eval(eval);
  } catch (const InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const FormatError& err) {
    std::cerr << "format error: " << err.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitData;
  }
}

}  // namespace viewspan::cli
