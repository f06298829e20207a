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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "viewspan/error.hpp"
#include "viewspan/protocol.hpp"
#include "viewspan/synthetic.hpp"

using namespace viewspan;

namespace {

EvalVideo video(const std::string& id, Label label, const std::string& generator,
                PromptModality modality, Split split, double residual) {
  EvalVideo v;
  v.row.id = id;
  v.row.path = id;
  v.row.label = label;
  v.row.generator = generator;
  v.row.prompt_modality = modality;
  v.row.split = split;
  v.residual = residual;
  return v;
}

struct Family {
  const char* name;
  PromptModality modality;
  int train, test;
};

const Family kFamilies[] = {{"texture-drift", PromptModality::kT2V, 6, 3},
                            {"geometry-jitter", PromptModality::kI2V, 5, 2},
                            {"flicker", PromptModality::kV2V, 4, 5}};

// Reals carry small residuals and fakes larger ones, so a threshold separates
// them perfectly.
std::vector<EvalVideo> labelled_set() {
  std::vector<EvalVideo> out;
  for (int i = 0; i < 8; ++i) {
    out.push_back(video("real_" + std::to_string(i), Label::kReal, "real",
                        PromptModality::kNone, i < 6 ? Split::kTrain : Split::kTest,
                        0.001 * (i + 1)));
  }
  for (const Family& f : kFamilies) {
    for (int i = 0; i < f.train + f.test; ++i) {
      out.push_back(video(std::string(f.name) + "_" + std::to_string(i), Label::kFake, f.name,
                          f.modality, i < f.train ? Split::kTrain : Split::kTest,
                          0.05 + 0.001 * i));
    }
  }
  return out;
}

// Scores 1 for fakes and 0 for reals; records what it was trained on.
class OracleDetector : public VideoDetector {
 public:
  explicit OracleDetector(std::vector<std::string>* seen) : seen_(seen) {}
  std::string name() const override { return "oracle"; }
  void fit(const std::vector<const EvalVideo*>& train) override {
    for (const EvalVideo* v : train) {
      if (seen_) seen_->push_back(v->row.id);
    }
  }
  double score(const EvalVideo& v) const override {
    return v.row.label == Label::kFake ? 1.0 : 0.0;
  }

 private:
  std::vector<std::string>* seen_;
};

// Calls only one generator fake.
class SingleGeneratorDetector : public VideoDetector {
 public:
  explicit SingleGeneratorDetector(std::string generator) : generator_(std::move(generator)) {}
  std::string name() const override { return "single"; }
  void fit(const std::vector<const EvalVideo*>&) override {}
  double score(const EvalVideo& v) const override {
    return v.row.generator == generator_ ? 0.9 : 0.1;
  }

 private:
  std::string generator_;
};

DetectorFactory oracle_factory(std::vector<std::string>* seen = nullptr) {
  return [seen](std::uint64_t) { return std::make_unique<OracleDetector>(seen); };
}

const EvalVideo& by_id(const std::vector<EvalVideo>& videos, const std::string& id) {
  return *std::find_if(videos.begin(), videos.end(),
                       [&](const EvalVideo& v) { return v.row.id == id; });
}

}  // namespace

TEST_CASE("train-test protocol trains on one family and tests on the others") {
  const std::vector<EvalVideo> videos = labelled_set();
  std::vector<std::string> seen;
  const ProtocolReport r =
      run_train_test_protocol(videos, "texture-drift", oracle_factory(&seen), 3);
  CHECK(r.protocol == "train-test");
  CHECK(r.detector == "oracle");
  CHECK(r.seed == 3);
  CHECK(seen.size() == 6 + 6);
  for (const std::string& id : seen) {
    const ManifestRow& row = by_id(videos, id).row;
    CHECK(row.split == Split::kTrain);
    CHECK((row.label == Label::kReal || row.generator == "texture-drift"));
  }
  CHECK(r.train_strata == std::vector<std::string>{"real/real", "fake/texture-drift"});
  CHECK(r.test_strata ==
        std::vector<std::string>{"real/real", "fake/geometry-jitter", "fake/flicker"});
  REQUIRE(r.per_generator.size() == 2);
  CHECK(r.per_generator[0].generator == "geometry-jitter");
  CHECK(r.per_generator[0].test_count == 2);
  CHECK(r.per_generator[1].generator == "flicker");
  CHECK(r.per_generator[1].test_count == 5);
  CHECK(r.predictions.rows.size() == 2 + 2 + 5);
  for (const Prediction& p : r.predictions.rows) CHECK(p.generator != "texture-drift");
}

TEST_CASE("a perfect detector scores 1 everywhere") {
  const std::vector<EvalVideo> videos = labelled_set();
  for (const ProtocolReport& r :
       {run_train_test_protocol(videos, "flicker", oracle_factory(), 7),
        run_holdout_protocol(videos, oracle_factory(), 7)}) {
    for (const GeneratorAccuracy& g : r.per_generator) CHECK(g.accuracy == 1.0);
    CHECK(r.average_accuracy_uniform == 1.0);
    CHECK(r.average_accuracy_weighted == 1.0);
    CHECK(r.overall_accuracy == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.precision == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.ap == 1.0);
    CHECK(r.confusion.fp == 0);
    CHECK(r.confusion.fn == 0);
  }
  const CrossPromptReport cp = run_cross_prompt_protocol(videos, oracle_factory(), 7);
  for (const auto& row : cp.accuracy) {
    for (double a : row) CHECK(a == 1.0);
  }
}

TEST_CASE("weighted average equals the pooled fake accuracy") {
  const std::vector<EvalVideo> videos = labelled_set();
  const DetectorFactory factory = [](std::uint64_t) {
    return std::make_unique<SingleGeneratorDetector>("flicker");
  };
  const ProtocolReport r = run_holdout_protocol(videos, factory, 1);
  std::map<std::string, double> acc;
  double weighted = 0.0, uniform = 0.0;
  std::size_t fakes = 0, hits = 0;
  for (const GeneratorAccuracy& g : r.per_generator) {
    weighted += g.accuracy * g.test_count;
    uniform += g.accuracy;
    fakes += g.test_count;
    acc[g.generator] = g.accuracy;
  }
  for (const Prediction& p : r.predictions.rows) {
    if (p.truth == Label::kFake && p.predicted == Label::kFake) ++hits;
  }
  CHECK(acc["flicker"] == 1.0);
  CHECK(acc["texture-drift"] == 0.0);
  CHECK(acc["geometry-jitter"] == 0.0);
  CHECK(fakes == 3 + 2 + 5);
  CHECK(r.average_accuracy_weighted == doctest::Approx(weighted / fakes).epsilon(1e-15));
  CHECK(r.average_accuracy_weighted == doctest::Approx(double(hits) / fakes).epsilon(1e-15));
  CHECK(r.average_accuracy_uniform == doctest::Approx(uniform / 3).epsilon(1e-15));
  CHECK(r.recall == 0.5);
  CHECK(r.overall_accuracy == doctest::Approx((5.0 + 2.0) / 12.0).epsilon(1e-15));
}

TEST_CASE("cross-prompt matrix has one row per training modality") {
  const std::vector<EvalVideo> videos = labelled_set();
  std::vector<std::string> seen;
  const DetectorFactory factory = [&](std::uint64_t) {
    return std::make_unique<OracleDetector>(&seen);
  };
  const CrossPromptReport cp = run_cross_prompt_protocol(videos, factory, 2);
  CHECK(cp.runs.size() == 3);
  CHECK(cp.test_counts == std::array<std::size_t, 3>{3, 2, 5});
  // Each run sees the real train rows plus one modality's fake train rows.
  CHECK(seen.size() == (6 + 6) + (6 + 5) + (6 + 4));
  for (const ProtocolReport& run : cp.runs) {
    CHECK(run.predictions.rows.size() == 2 + 3 + 2 + 5);
  }
  const std::string csv = cross_prompt_csv(cp);
  CHECK(csv.rfind("train,T2V,I2V,V2V,Avg\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(format_cross_prompt(cp).find("Avg.") != std::string::npos);
}

TEST_CASE("cross-prompt average column pools all fake test videos") {
  const std::vector<EvalVideo> videos = labelled_set();
  const DetectorFactory factory = [](std::uint64_t) {
    return std::make_unique<SingleGeneratorDetector>("flicker");
  };
  const CrossPromptReport cp = run_cross_prompt_protocol(videos, factory, 2);
  for (const auto& row : cp.accuracy) {
    CHECK(row[0] == 0.0);
    CHECK(row[1] == 0.0);
    CHECK(row[2] == 1.0);
    CHECK(row[3] == doctest::Approx(5.0 / 10.0).epsilon(1e-15));
  }
}

TEST_CASE("residual-threshold baseline produces a well-formed report") {
  const std::vector<EvalVideo> videos = labelled_set();
  const ProtocolReport r = run_holdout_protocol(videos, residual_threshold_factory(), 7);
  r.validate();
  CHECK(r.detector == "residual-threshold");
  CHECK(r.overall_accuracy == 1.0);
  CHECK(r.ap == 1.0);
  for (const Prediction& p : r.predictions.rows) {
    CHECK(p.score >= 0.0);
    CHECK(p.score <= 1.0);
  }
  ResidualThresholdDetector d;
  std::vector<const EvalVideo*> train;
  for (const EvalVideo& v : videos) train.push_back(&v);
  d.fit(train);
  CHECK(d.cut() > 0.008);
  CHECK(d.cut() < 0.05);
  CHECK(d.score(by_id(videos, "flicker_0")) > 0.5);
  CHECK(d.score(by_id(videos, "real_0")) < 0.5);
}

TEST_CASE("protocol errors") {
  std::vector<EvalVideo> videos = labelled_set();
  CHECK_THROWS_AS(run_train_test_protocol(videos, "nope", oracle_factory(), 1), InvalidArgument);

  std::vector<EvalVideo> no_real_test;
  for (const EvalVideo& v : videos) {
    if (!(v.row.label == Label::kReal && v.row.split == Split::kTest)) no_real_test.push_back(v);
  }
  CHECK_THROWS_AS(run_holdout_protocol(no_real_test, oracle_factory(), 1), DataError);
  CHECK_THROWS_AS(run_train_test_protocol(no_real_test, "flicker", oracle_factory(), 1),
                  DataError);
  CHECK_THROWS_AS(run_cross_prompt_protocol(no_real_test, oracle_factory(), 1), DataError);

  std::vector<EvalVideo> one_family;
  for (const EvalVideo& v : videos) {
    if (v.row.label == Label::kReal || v.row.generator == "flicker") one_family.push_back(v);
  }
  CHECK_THROWS_AS(run_train_test_protocol(one_family, "flicker", oracle_factory(), 1),
                  DataError);
  CHECK_THROWS_AS(run_cross_prompt_protocol(one_family, oracle_factory(), 1), DataError);

  std::vector<EvalVideo> no_i2v_test;
  for (const EvalVideo& v : videos) {
    if (!(v.row.prompt_modality == PromptModality::kI2V && v.row.split == Split::kTest)) {
      no_i2v_test.push_back(v);
    }
  }
  CHECK_THROWS_AS(run_cross_prompt_protocol(no_i2v_test, oracle_factory(), 1), DataError);

  const DetectorFactory null_factory = [](std::uint64_t) {
    return std::unique_ptr<VideoDetector>();
  };
  CHECK_THROWS_AS(run_holdout_protocol(videos, null_factory, 1), InvalidArgument);
}

TEST_CASE("report validation catches inconsistent counts") {
  const ProtocolReport good = run_holdout_protocol(labelled_set(), oracle_factory(), 1);
  good.validate();
  ProtocolReport bad = good;
  bad.confusion.tp += 1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = good;
  bad.f1 = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("report serialization") {
  const ProtocolReport r = run_holdout_protocol(labelled_set(), oracle_factory(), 7);
  CHECK(report_stem("cross-prompt", 7) == "cross-prompt_seed7");
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("metric,stratum,count,value\n", 0) == 0);
  CHECK(csv.find("accuracy,flicker,5,1.000000") != std::string::npos);
  CHECK(csv.find("ap,all,12,1.000000") != std::string::npos);
  const std::string preds = predictions_csv(r.predictions);
  CHECK(std::count(preds.begin(), preds.end(), '\n') == 13);
  CHECK(preds.find("flicker_4,flicker,V2V,fake,1.000000,fake") != std::string::npos);
  const std::string text = format_report(r);
  CHECK(text.find("average (weighted)") != std::string::npos);
  CHECK(text.find("tp=10 fp=0 tn=2 fn=0") != std::string::npos);
}

TEST_CASE("protocols on a generated corpus are deterministic") {
  const Corpus corpus = make_corpus(10, 15, CorpusOptions{}, 5);
  const std::vector<EvalVideo> videos = make_eval_set(corpus, DetectorConfig{});
  REQUIRE(videos.size() == 25);
  std::set<std::string> ids;
  for (const EvalVideo& v : videos) {
    ids.insert(v.row.id);
    CHECK(v.prepared.steps.size() == 5);
    CHECK(v.residual >= 0.0);
  }
  CHECK(ids.size() == 25);

  TrainConfig train;
  train.epochs = 3;
  const DetectorFactory temporal = temporal_detector_factory(DetectorConfig{}, train);
  const ProtocolReport a = run_holdout_protocol(videos, temporal, 9);
  const ProtocolReport b = run_holdout_protocol(videos, temporal, 9);
  CHECK(report_csv(a) == report_csv(b));
  CHECK(predictions_csv(a.predictions) == predictions_csv(b.predictions));
  CHECK(a.detector == "temporal");

  const ProtocolReport base = run_train_test_protocol(videos, "texture-drift",
                                                      residual_threshold_factory(), 9);
  CHECK(report_csv(base) ==
        report_csv(run_train_test_protocol(videos, "texture-drift",
                                           residual_threshold_factory(), 9)));
}

TEST_CASE("temporal detector factory seeds the initialization") {
  const DetectorFactory f = temporal_detector_factory(DetectorConfig{}, TrainConfig{});
  auto a = f(1), b = f(1), c = f(2);
  const auto& ta = dynamic_cast<const TemporalDetector&>(*a);
  const auto& tb = dynamic_cast<const TemporalDetector&>(*b);
  const auto& tc = dynamic_cast<const TemporalDetector&>(*c);
  CHECK(ta.params() == tb.params());
  CHECK(!(ta.params() == tc.params()));
}
