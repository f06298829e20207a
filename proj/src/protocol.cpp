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

#include "viewspan/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "viewspan/analysis.hpp"
#include "viewspan/error.hpp"
#include "viewspan/parallel.hpp"

namespace viewspan {
namespace {

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string stratum(const ManifestRow& row) {
  return std::string(to_string(row.label)) + "/" + row.generator;
}

void push_unique(std::vector<std::string>& names, const std::string& name) {
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    names.push_back(name);
  }
}

std::vector<const EvalVideo*> select(
    const std::vector<EvalVideo>& videos,
    const std::function<bool(const ManifestRow&)>& keep) {
  std::vector<const EvalVideo*> out;
  for (const EvalVideo& v : videos) {
    if (keep(v.row)) out.push_back(&v);
  }
  return out;
}

void require_real(const std::vector<EvalVideo>& videos) {
  bool train = false, test = false;
  for (const EvalVideo& v : videos) {
    if (v.row.label != Label::kReal) continue;
    (v.row.split == Split::kTrain ? train : test) = true;
  }
  if (!train || !test) {
    throw DataError("missing real videos in the train or test split");
  }
}

PredictionSet predict(const VideoDetector& detector,
                      const std::vector<const EvalVideo*>& test) {
  PredictionSet set;
  set.rows.resize(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const EvalVideo& v = *test[i];
    Prediction& p = set.rows[i];
    p.id = v.row.id;
    p.generator = v.row.generator;
    p.modality = v.row.prompt_modality;
    p.truth = v.row.label;
    p.score = std::clamp(detector.score(v), 0.0, 1.0);
    p.predicted = p.score > detector.threshold() ? Label::kFake : Label::kReal;
  });
  set.validate();
  return set;
}

ProtocolReport summarize(std::string protocol, const VideoDetector& detector,
                         std::uint64_t seed,
                         const std::vector<const EvalVideo*>& train,
                         const std::vector<const EvalVideo*>& test) {
  ProtocolReport report;
  report.protocol = std::move(protocol);
  report.detector = detector.name();
  report.seed = seed;
  for (const EvalVideo* v : train) push_unique(report.train_strata, stratum(v->row));
  for (const EvalVideo* v : test) push_unique(report.test_strata, stratum(v->row));
  report.predictions = predict(detector, test);

  std::vector<std::string> generators;
  for (const Prediction& p : report.predictions.rows) {
    if (p.truth == Label::kFake) push_unique(generators, p.generator);
  }
  if (generators.empty()) throw DataError("no fake videos in the test split");
  double sum = 0.0, hits = 0.0;
  std::size_t count = 0;
  for (const std::string& g : generators) {
    GeneratorAccuracy acc;
    acc.generator = g;
    acc.test_count = std::count_if(
        report.predictions.rows.begin(), report.predictions.rows.end(),
        [&](const Prediction& p) { return p.truth == Label::kFake && p.generator == g; });
    acc.accuracy = generator_accuracy(report.predictions, g);
    sum += acc.accuracy;
    hits += acc.accuracy * static_cast<double>(acc.test_count);
    count += acc.test_count;
    report.per_generator.push_back(acc);
  }
  report.average_accuracy_uniform = sum / static_cast<double>(generators.size());
  report.average_accuracy_weighted = hits / static_cast<double>(count);

  report.confusion = confusion(report.predictions);
  const Confusion& c = report.confusion;
  report.overall_accuracy =
      static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  report.recall = recall(c);
  report.precision = precision(c);
  report.f1 = f1_score(c);
  report.ap = average_precision(report.predictions);
  report.validate();
  return report;
}

std::unique_ptr<VideoDetector> fit_detector(const DetectorFactory& factory,
                                            std::uint64_t seed,
                                            const std::vector<const EvalVideo*>& train) {
  std::unique_ptr<VideoDetector> detector = factory(seed);
  if (!detector) throw InvalidArgument("detector factory returned null");
  detector->fit(train);
  return detector;
}

}  // namespace

EvalVideo make_eval_video(const ManifestRow& row,
                          const std::vector<ImageFrame>& frames,
                          const std::vector<PairRecord>& pairs,
                          const DetectorConfig& config) {
  EvalVideo video;
  video.row = row;
  video.prepared = prepare_video(frames, pairs, config);
  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    total += analyze_pair(frames[k], frames[k + 1], pairs[k]).summary.weighted_mean;
  }
  video.residual = total / static_cast<double>(pairs.size());
  return video;
}

std::vector<EvalVideo> make_eval_set(const Corpus& corpus,
                                     const DetectorConfig& config) {
  if (corpus.sequences.size() != corpus.manifest.rows.size()) {
    throw InvalidArgument("corpus manifest and sequences differ in length");
  }
  std::vector<EvalVideo> out(corpus.sequences.size());
  parallel_for(out.size(), [&](std::size_t i) {
    const SyntheticSequence& s = corpus.sequences[i];
    out[i] = make_eval_video(corpus.manifest.rows[i], s.frames, s.pairs, config);
  });
  return out;
}

TemporalDetector::TemporalDetector(const DetectorConfig& config,
                                   const TrainConfig& train, double threshold)
    : config_(config),
      train_(train),
      threshold_(threshold),
      params_(DetectorParams::initialize(config, train.seed)) {}

TemporalDetector::TemporalDetector(DetectorParams params, const TrainConfig& train,
                                   double threshold)
    : config_(params.config),
      train_(train),
      threshold_(threshold),
      params_(std::move(params)) {}

void TemporalDetector::fit(const std::vector<const EvalVideo*>& train) {
  std::vector<LabeledVideo> labeled;
  labeled.reserve(train.size());
  for (const EvalVideo* v : train) {
    labeled.push_back({&v->prepared, v->row.label == Label::kFake});
  }
  TrainResult result = train_detector(labeled, config_, train_);
  params_ = std::move(result.params);
  loss_curve_ = std::move(result.loss_curve);
}

double TemporalDetector::score(const EvalVideo& video) const {
  return detect_video(video.prepared, params_, threshold_).video_score;
}

void ResidualThresholdDetector::fit(const std::vector<const EvalVideo*>& train) {
  if (train.empty()) throw DataError("empty training set");
  std::vector<std::pair<double, bool>> points;
  for (const EvalVideo* v : train) {
    points.emplace_back(v->residual, v->row.label == Label::kFake);
  }
  std::sort(points.begin(), points.end());

  std::vector<double> cuts = {points.front().first * 0.5};
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i].first < points[i + 1].first) {
      cuts.push_back(0.5 * (points[i].first + points[i + 1].first));
    }
  }
  cuts.push_back(points.back().first * 2.0);

  std::size_t best_correct = 0;
  cut_ = cuts.front();
  for (double cut : cuts) {
    std::size_t correct = 0;
    for (const auto& [r, fake] : points) correct += (r > cut) == fake;
    if (correct > best_correct) {
      best_correct = correct;
      cut_ = cut;
    }
  }
  cut_ = std::max(cut_, 1e-12);
}

double ResidualThresholdDetector::score(const EvalVideo& video) const {
  const double r = std::max(video.residual, 0.0);
  return r / (r + cut_);
}

DetectorFactory temporal_detector_factory(const DetectorConfig& config,
                                          const TrainConfig& train,
                                          double threshold) {
  return [config, train, threshold](std::uint64_t seed) {
    TrainConfig seeded = train;
    seeded.seed = seed;
    return std::make_unique<TemporalDetector>(config, seeded, threshold);
  };
}

DetectorFactory residual_threshold_factory() {
  return [](std::uint64_t) { return std::make_unique<ResidualThresholdDetector>(); };
}

void ProtocolReport::validate() const {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (double v : {average_accuracy_uniform, average_accuracy_weighted,
                   overall_accuracy, recall, precision, f1, ap}) {
    if (!in_unit(v)) throw InvalidArgument("report metric outside [0,1]");
  }
  std::size_t fakes = 0;
  for (const GeneratorAccuracy& g : per_generator) {
    if (!in_unit(g.accuracy)) throw InvalidArgument("generator accuracy outside [0,1]");
    fakes += g.test_count;
  }
  if (confusion.total() != predictions.rows.size() ||
      confusion.tp + confusion.fn != fakes) {
    throw InvalidArgument("report counts disagree with its predictions");
  }
}

ProtocolReport run_train_test_protocol(const std::vector<EvalVideo>& videos,
                                       const std::string& train_generator,
                                       const DetectorFactory& factory,
                                       std::uint64_t seed) {
  std::vector<std::string> generators;
  for (const EvalVideo& v : videos) {
    if (v.row.label == Label::kFake) push_unique(generators, v.row.generator);
  }
  if (generators.size() < 2) {
    throw DataError("train-test protocol needs at least two generator families");
  }
  if (std::find(generators.begin(), generators.end(), train_generator) ==
      generators.end()) {
    throw InvalidArgument("unknown training generator '" + train_generator + "'");
  }
  require_real(videos);

  const auto train = select(videos, [&](const ManifestRow& r) {
    return r.split == Split::kTrain &&
           (r.label == Label::kReal || r.generator == train_generator);
  });
  const auto test = select(videos, [&](const ManifestRow& r) {
    return r.split == Split::kTest &&
           (r.label == Label::kReal || r.generator != train_generator);
  });
  const auto detector = fit_detector(factory, seed, train);
  return summarize("train-test", *detector, seed, train, test);
}

ProtocolReport run_holdout_protocol(const std::vector<EvalVideo>& videos,
                                    const DetectorFactory& factory,
                                    std::uint64_t seed) {
  require_real(videos);
  const auto train =
      select(videos, [](const ManifestRow& r) { return r.split == Split::kTrain; });
  const auto test =
      select(videos, [](const ManifestRow& r) { return r.split == Split::kTest; });
  const auto detector = fit_detector(factory, seed, train);
  return summarize("holdout", *detector, seed, train, test);
}

CrossPromptReport run_cross_prompt_protocol(const std::vector<EvalVideo>& videos,
                                            const DetectorFactory& factory,
                                            std::uint64_t seed) {
  require_real(videos);
  for (PromptModality m : kPromptModalities) {
    for (Split split : {Split::kTrain, Split::kTest}) {
      const bool present = std::any_of(videos.begin(), videos.end(), [&](const EvalVideo& v) {
        return v.row.label == Label::kFake && v.row.prompt_modality == m &&
               v.row.split == split;
      });
      if (!present) {
        throw DataError("missing modality " + std::string(to_string(m)) + " in the " +
                        std::string(to_string(split)) + " split");
      }
    }
  }

  CrossPromptReport report;
  report.seed = seed;
  const auto test =
      select(videos, [](const ManifestRow& r) { return r.split == Split::kTest; });
  for (std::size_t i = 0; i < kPromptModalities.size(); ++i) {
    const PromptModality m = kPromptModalities[i];
    const auto train = select(videos, [&](const ManifestRow& r) {
      return r.split == Split::kTrain &&
             (r.label == Label::kReal || r.prompt_modality == m);
    });
    const auto detector = fit_detector(factory, seed, train);
    ProtocolReport run = summarize("cross-prompt", *detector, seed, train, test);
    report.detector = run.detector;

    std::size_t all_hits = 0, all_count = 0;
    for (std::size_t j = 0; j < kPromptModalities.size(); ++j) {
      std::vector<Prediction> subset;
      for (const Prediction& p : run.predictions.rows) {
        if (p.truth == Label::kFake && p.modality == kPromptModalities[j]) {
          subset.push_back(p);
        }
      }
      report.accuracy[i][j] = detection_rate(subset);
      report.test_counts[j] = subset.size();
      all_count += subset.size();
      all_hits += std::count_if(subset.begin(), subset.end(), [](const Prediction& p) {
        return p.predicted == Label::kFake;
      });
    }
    report.accuracy[i][3] =
        static_cast<double>(all_hits) / static_cast<double>(all_count);
    report.runs.push_back(std::move(run));
  }
  return report;
}

std::string report_stem(const std::string& protocol, std::uint64_t seed) {
  return protocol + "_seed" + std::to_string(seed);
}

std::string format_report(const ProtocolReport& r) {
  std::ostringstream out;
  out << "protocol  " << r.protocol << "\n"
      << "detector  " << r.detector << "\n"
      << "seed      " << r.seed << "\n"
      << "train     ";
  for (std::size_t i = 0; i < r.train_strata.size(); ++i) {
    out << (i ? ", " : "") << r.train_strata[i];
  }
  out << "\ntest      ";
  for (std::size_t i = 0; i < r.test_strata.size(); ++i) {
    out << (i ? ", " : "") << r.test_strata[i];
  }
  out << "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %6s %9s\n", "generator", "n", "accuracy");
  out << line;
  for (const GeneratorAccuracy& g : r.per_generator) {
    std::snprintf(line, sizeof line, "%-24s %6zu %9.4f\n", g.generator.c_str(),
                  g.test_count, g.accuracy);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-24s %6s %9.4f\n", "average (uniform)", "",
                r.average_accuracy_uniform);
  out << line;
  std::snprintf(line, sizeof line, "%-24s %6s %9.4f\n", "average (weighted)", "",
                r.average_accuracy_weighted);
  out << line << "\n";
  out << "overall accuracy " << num(r.overall_accuracy) << "\n"
      << "recall           " << num(r.recall) << "\n"
      << "precision        " << num(r.precision) << "\n"
      << "f1               " << num(r.f1) << "\n"
      << "ap               " << num(r.ap) << "\n"
      << "confusion        tp=" << r.confusion.tp << " fp=" << r.confusion.fp
      << " tn=" << r.confusion.tn << " fn=" << r.confusion.fn << "\n";
  return out.str();
}

std::string report_csv(const ProtocolReport& r) {
  std::ostringstream out;
  out << "metric,stratum,count,value\n";
  for (const GeneratorAccuracy& g : r.per_generator) {
    out << "accuracy," << g.generator << "," << g.test_count << ","
        << num(g.accuracy, 6) << "\n";
  }
  const std::size_t n = r.predictions.rows.size();
  const std::size_t fakes = r.confusion.tp + r.confusion.fn;
  out << "average_accuracy_uniform,fake," << fakes << ","
      << num(r.average_accuracy_uniform, 6) << "\n"
      << "average_accuracy_weighted,fake," << fakes << ","
      << num(r.average_accuracy_weighted, 6) << "\n"
      << "overall_accuracy,all," << n << "," << num(r.overall_accuracy, 6) << "\n"
      << "recall,all," << n << "," << num(r.recall, 6) << "\n"
      << "precision,all," << n << "," << num(r.precision, 6) << "\n"
      << "f1,all," << n << "," << num(r.f1, 6) << "\n"
      << "ap,all," << n << "," << num(r.ap, 6) << "\n"
      << "tp,all," << n << "," << r.confusion.tp << "\n"
      << "fp,all," << n << "," << r.confusion.fp << "\n"
      << "tn,all," << n << "," << r.confusion.tn << "\n"
      << "fn,all," << n << "," << r.confusion.fn << "\n";
  return out.str();
}

std::string predictions_csv(const PredictionSet& predictions) {
  std::ostringstream out;
  out << "id,generator,prompt_modality,label,score,predicted\n";
  for (const Prediction& p : predictions.rows) {
    out << p.id << "," << p.generator << "," << to_string(p.modality) << ","
        << to_string(p.truth) << "," << num(p.score, 6) << ","
        << to_string(p.predicted) << "\n";
  }
  return out.str();
}

std::string format_cross_prompt(const CrossPromptReport& r) {
  std::ostringstream out;
  out << "protocol  cross-prompt\ndetector  " << r.detector << "\nseed      "
      << r.seed << "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %8s\n", "train", "T2V", "I2V",
                "V2V", "Avg.");
  out << line;
  for (std::size_t i = 0; i < 3; ++i) {
    std::snprintf(line, sizeof line, "%-8s %8.2f %8.2f %8.2f %8.2f\n",
                  std::string(to_string(kPromptModalities[i])).c_str(),
                  100.0 * r.accuracy[i][0], 100.0 * r.accuracy[i][1],
                  100.0 * r.accuracy[i][2], 100.0 * r.accuracy[i][3]);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-8s %8zu %8zu %8zu\n", "n", r.test_counts[0],
                r.test_counts[1], r.test_counts[2]);
  out << line;
  return out.str();
}

std::string cross_prompt_csv(const CrossPromptReport& r) {
  std::ostringstream out;
  out << "train,T2V,I2V,V2V,Avg\n";
  for (std::size_t i = 0; i < 3; ++i) {
    out << to_string(kPromptModalities[i]);
    for (double v : r.accuracy[i]) out << "," << num(v, 6);
    out << "\n";
  }
  return out.str();
}

}  // namespace viewspan
