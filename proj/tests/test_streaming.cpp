// Copyright (c) 2026 The rocl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "rocl/streaming.hpp"
#include "rocl/synth.hpp"

using namespace rocl;

namespace {

SensorWindow tiny_window(int label, int subject, double ts) {
  SensorWindow w;
  w.data = {ts};  // unique timestamp doubles as window identity
  w.width = 1;
  w.channels = 1;
  w.label = label;
  w.subject_id = subject;
  w.timestamp = ts;
  w.window_seconds = 1.0;
  return w;
}

/// Hand-built split: base classes {0,1}, new classes {2,3}. The pool holds
/// `pool_per_class` windows per class, the test set `test_per_class`.
ScenarioSplit planned_split(int pool_per_class, int test_per_class, SplitMode mode) {
  ScenarioSplit split;
  split.mode = mode;
  split.base_classes = {0, 1};
  split.new_classes = {2, 3};
  split.new_subjects = {2};
  double ts = 0.0;
  if (mode == SplitMode::between_subject) {
    for (int cls = 0; cls < 4; ++cls) {
      for (int i = 0; i < pool_per_class; ++i) {
        split.rm_train_pool.push_back(tiny_window(cls, 1, ts));
        ts += 1.0;
      }
      for (int i = 0; i < test_per_class; ++i) {
        split.test.push_back(tiny_window(cls, 2, ts));
        ts += 1.0;
      }
    }
  } else {
    // Within-subject streaming draws labels and test windows from one pool.
    for (int cls = 0; cls < 4; ++cls) {
      for (int i = 0; i < test_per_class; ++i) {
        split.test.push_back(tiny_window(cls, 2, ts));
        ts += 1.0;
      }
    }
    split.rm_train_pool = split.test;
  }
  return split;
}

StreamPlanConfig plan_cfg() {
  StreamPlanConfig cfg;
  cfg.batch_size = 16;
  cfg.base_label_fraction = 0.125;  // 2 labeled base windows per batch
  cfg.labeled_per_new_class = 8;
  cfg.intro_chunk = 4;
  cfg.seed = 5;
  return cfg;
}

std::multiset<double> labeled_ids(const StreamPlan& plan, int cls = -1) {
  std::multiset<double> out;
  for (const auto& b : plan.batches) {
    for (const auto& w : b.labeled) {
      if (cls < 0 || w.label == cls) out.insert(w.timestamp);
    }
  }
  return out;
}

std::multiset<double> unlabeled_ids(const StreamPlan& plan) {
  std::multiset<double> out;
  for (const auto& b : plan.batches) {
    for (const auto& w : b.unlabeled) out.insert(w.timestamp);
  }
  return out;
}

}  // namespace

TEST_CASE("plan shape, introduction points, and label budgets") {
  const ScenarioSplit split = planned_split(30, 40, SplitMode::between_subject);
  const StreamPlanConfig cfg = plan_cfg();
  const StreamPlan plan = make_stream_plan(split, cfg);

  // 160 test windows at 14 unlabeled per batch round up to 12 batches,
  // above the floor of 3 * (2 new classes + 1).
  REQUIRE(plan.batches.size() == 12);
  CHECK(plan.introduction_batch.at(2) == 4);   // 1 * 12 / 3
  CHECK(plan.introduction_batch.at(3) == 8);   // 2 * 12 / 3
  CHECK(plan.base_classes == std::set<int>{0, 1});
  CHECK(plan.new_classes == std::set<int>{2, 3});

  for (const auto& b : plan.batches) {
    CHECK((b.labeled.size() + b.unlabeled.size()) > 0);
    // Base labeled ration is constant while the pool lasts (60 >= 12 * 2).
    std::size_t base_labeled = 0;
    for (const auto& w : b.labeled) {
      if (w.label == 0 || w.label == 1) ++base_labeled;
    }
    CHECK(base_labeled == 2);
  }

  // Each new class spends exactly its labeled budget, starting with the
  // introduction chunk and never earlier.
  for (int cls : {2, 3}) {
    const int intro = plan.introduction_batch.at(cls);
    CHECK(labeled_ids(plan, cls).size() == 8);
    for (const auto& b : plan.batches) {
      const auto count = static_cast<int>(
          std::count_if(b.labeled.begin(), b.labeled.end(),
                        [&](const SensorWindow& w) { return w.label == cls; }));
      if (b.batch_index < intro) CHECK(count == 0);
      if (b.batch_index == intro) CHECK(count == 4);
    }
    // Unlabeled arrivals of a class also wait for its introduction.
    for (const auto& b : plan.batches) {
      if (b.batch_index >= intro) continue;
      for (const auto& w : b.unlabeled) CHECK(w.label != cls);
    }
  }

  // Between-subject mode streams the whole test set exactly once.
  std::multiset<double> want;
  for (const auto& w : split.test) want.insert(w.timestamp);
  CHECK(unlabeled_ids(plan) == want);
}

TEST_CASE("plans are reproducible and seed-sensitive") {
  const ScenarioSplit split = planned_split(30, 40, SplitMode::between_subject);
  StreamPlanConfig cfg = plan_cfg();
  const StreamPlan a = make_stream_plan(split, cfg);
  const StreamPlan b = make_stream_plan(split, cfg);
  REQUIRE(a.batches.size() == b.batches.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    REQUIRE(a.batches[i].labeled.size() == b.batches[i].labeled.size());
    REQUIRE(a.batches[i].unlabeled.size() == b.batches[i].unlabeled.size());
    for (std::size_t j = 0; j < a.batches[i].unlabeled.size(); ++j) {
      if (a.batches[i].unlabeled[j].timestamp != b.batches[i].unlabeled[j].timestamp) {
        identical = false;
      }
    }
  }
  CHECK(identical);

  cfg.seed += 1;
  const StreamPlan c = make_stream_plan(split, cfg);
  bool same_as_a = true;
  for (std::size_t i = 0; i < a.batches.size() && same_as_a; ++i) {
    if (c.batches[i].unlabeled.size() != a.batches[i].unlabeled.size()) {
      same_as_a = false;
      break;
    }
    for (std::size_t j = 0; j < a.batches[i].unlabeled.size(); ++j) {
      if (a.batches[i].unlabeled[j].timestamp != c.batches[i].unlabeled[j].timestamp) {
        same_as_a = false;
        break;
      }
    }
  }
  CHECK_FALSE(same_as_a);
}

TEST_CASE("within-subject plans never score a window they handed out") {
  const ScenarioSplit split = planned_split(0, 40, SplitMode::within_subject);
  const StreamPlan plan = make_stream_plan(split, plan_cfg());

  const std::multiset<double> labeled = labeled_ids(plan);
  const std::multiset<double> unlabeled = unlabeled_ids(plan);
  for (double id : labeled) CHECK(unlabeled.count(id) == 0);

  // Everything not withheld is scored exactly once.
  std::multiset<double> expected;
  for (const auto& w : split.test) {
    if (labeled.count(w.timestamp) == 0) expected.insert(w.timestamp);
  }
  CHECK(unlabeled == expected);
  // The labeled hand-outs are unique windows, not repeats.
  CHECK(std::set<double>(labeled.begin(), labeled.end()).size() == labeled.size());
}

TEST_CASE("plans reject configurations they cannot honor") {
  StreamPlanConfig cfg = plan_cfg();
  ScenarioSplit split = planned_split(30, 40, SplitMode::between_subject);

  SECTION("no new classes") {
    split.new_classes.clear();
    CHECK_THROWS_MATCHES(make_stream_plan(split, cfg), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrCode::insufficient_data;
                         }));
  }
  SECTION("labeled budget larger than the pool") {
    cfg.labeled_per_new_class = 31;
    CHECK_THROWS_AS(make_stream_plan(split, cfg), Error);
  }
  SECTION("a new class without test data") {
    std::vector<SensorWindow> kept;
    for (const auto& w : split.test) {
      if (w.label != 3) kept.push_back(w);
    }
    split.test = kept;
    CHECK_THROWS_AS(make_stream_plan(split, cfg), Error);
  }
  SECTION("config bounds") {
    StreamPlanConfig bad = cfg;
    bad.batch_size = 3;
    CHECK_THROWS_AS(make_stream_plan(split, bad), Error);
    bad = cfg;
    bad.base_label_fraction = 1.0;
    CHECK_THROWS_AS(make_stream_plan(split, bad), Error);
    bad = cfg;
    bad.labeled_per_new_class = 1;
    CHECK_THROWS_AS(make_stream_plan(split, bad), Error);
    bad = cfg;
    bad.intro_chunk = 1;
    CHECK_THROWS_AS(make_stream_plan(split, bad), Error);
    bad = cfg;
    bad.intro_chunk = bad.labeled_per_new_class + 1;
    CHECK_THROWS_AS(make_stream_plan(split, bad), Error);
  }
}

namespace {

struct StreamFixture {
  FeModel fe;
  ScenarioSplit split;
  StreamPlan plan;
  RmConfig rm_cfg;

  StreamFixture() {
    SynthSpec spec;
    spec.n_classes = 4;
    spec.n_subjects = 2;
    spec.n_channels = 2;
    spec.samples_per_class = 96;
    spec.sample_rate_hz = 32.0;
    spec.noise_sigma = 0.05;
    spec.subject_jitter = 0.02;
    spec.seed = 15;
    std::vector<SensorWindow> windows;
    for (const auto& rec : synth_generate(spec)) {
      for (auto& w : segment_windows(rec, 1.0, 0.5)) windows.push_back(std::move(w));
    }
    split = scenario_split(windows, {0, 1}, {1}, SplitMode::between_subject);

    FeConfig fc;
    fc.input_channels = 2;
    fc.window_len = 32;
    fc.embedding_dim = 6;
    fc.conv_channels = {4};
    fc.kernel_sizes = {3};
    fc.lstm_hidden = 4;
    fc.n_classes_base = 2;
    fc.epochs = 3;
    fc.batch_size = 10;
    fc.seed = 3;
    fe = build_fe(fc);
    fe.norm = fit_normalizer(split.fe_train);
    const std::vector<SensorWindow> fe_train = normalize(split.fe_train, fe.norm);
    train_fe(fe, fe_train, {});

    split.rm_train_pool = normalize(split.rm_train_pool, fe.norm);
    split.test = normalize(split.test, fe.norm);

    StreamPlanConfig pc;
    pc.batch_size = 4;
    pc.base_label_fraction = 0.25;
    pc.labeled_per_new_class = 3;
    pc.intro_chunk = 3;  // must exceed the relation module's support count
    pc.seed = 9;
    plan = make_stream_plan(split, pc);

    rm_cfg.embedding_dim = 6;
    rm_cfg.support_per_class = 2;
    rm_cfg.lr = 1e-2;
    rm_cfg.batch_size = 16;
    rm_cfg.epochs = 4;
    rm_cfg.seed = 27;
  }

  ReplayBuffer fresh_replay() const {
    std::map<int, std::vector<EmbeddingSample>> by_class;
    for (const auto& s : embed_all(fe, normalize(split.fe_train, fe.norm))) {
      by_class[s.label].push_back(s);
    }
    return init_from_base(by_class, 6, 1);
  }
};

}  // namespace

TEST_CASE("stream driver consumes the plan and reports scores") {
  const StreamFixture fx;
  ReplayBuffer replay = fx.fresh_replay();

  std::vector<BatchMetrics> seen;
  const MetricsReport report =
      run_stream(fx.fe, fx.rm_cfg, replay, fx.plan, ClassifierKind::relation,
                 [&](const BatchMetrics& bm) { seen.push_back(bm); });

  REQUIRE(report.batches.size() == fx.plan.batches.size());
  REQUIRE(seen.size() == report.batches.size());
  std::size_t total_unlabeled = 0;
  for (std::size_t i = 0; i < report.batches.size(); ++i) {
    CHECK(report.batches[i].batch_index == static_cast<int>(i));
    CHECK(seen[i].batch_index == report.batches[i].batch_index);
    CHECK(seen[i].retrain == report.batches[i].retrain);
    total_unlabeled += report.batches[i].n_unlabeled;
    if (report.batches[i].n_unlabeled > 0) {
      CHECK(std::isfinite(report.batches[i].accuracy));
    } else {
      CHECK(std::isnan(report.batches[i].accuracy));
    }
  }
  CHECK(report.all_preds.size() == total_unlabeled);
  CHECK(report.all_truths.size() == total_unlabeled);
  CHECK(std::isfinite(report.final_accuracy));
  CHECK(std::isfinite(report.final_macro_f1));
  CHECK(report.batches.back().cumulative_accuracy ==
        Catch::Approx(report.final_accuracy).margin(1e-12));

  // Both introductions force a retrain flagged as a new-class event.
  for (int cls : {2, 3}) {
    const int intro = fx.plan.introduction_batch.at(cls);
    const bool found = std::any_of(report.retrains.begin(), report.retrains.end(),
                                   [&](const RetrainEvent& e) {
                                     return e.batch_index == intro && e.reason == "new_class";
                                   });
    CHECK(found);
  }
  for (const auto& e : report.retrains) {
    CHECK((e.reason == "new_class" || e.reason == "replacement_threshold"));
  }

  // After streaming the buffer knows every class and can snapshot.
  CHECK(replay.known_classes() == std::vector<int>{0, 1, 2, 3});
  CHECK(report.replay_snapshot_bytes == snapshot_bytes(replay).size());
  CHECK(report.replay_snapshot_bytes > 0);
}

TEST_CASE("stream runs are reproducible") {
  const StreamFixture fx;
  ReplayBuffer r1 = fx.fresh_replay();
  ReplayBuffer r2 = fx.fresh_replay();
  const MetricsReport a = run_stream(fx.fe, fx.rm_cfg, r1, fx.plan);
  const MetricsReport b = run_stream(fx.fe, fx.rm_cfg, r2, fx.plan);
  CHECK(a.all_preds == b.all_preds);
  CHECK(a.final_accuracy == b.final_accuracy);
  REQUIRE(a.retrains.size() == b.retrains.size());
  for (std::size_t i = 0; i < a.retrains.size(); ++i) {
    CHECK(a.retrains[i].batch_index == b.retrains[i].batch_index);
    CHECK(a.retrains[i].reason == b.retrains[i].reason);
  }
}

TEST_CASE("the ablation classifier drives the same stream") {
  const StreamFixture fx;
  ReplayBuffer replay = fx.fresh_replay();
  const MetricsReport report =
      run_stream(fx.fe, fx.rm_cfg, replay, fx.plan, ClassifierKind::mlp3);
  CHECK(report.all_preds.size() == report.all_truths.size());
  CHECK(std::isfinite(report.final_macro_f1));
}

TEST_CASE("stream driver preconditions") {
  const StreamFixture fx;

  FeModel thawed = fx.fe;
  thawed.frozen = false;
  ReplayBuffer replay = fx.fresh_replay();
  CHECK_THROWS_MATCHES(run_stream(thawed, fx.rm_cfg, replay, fx.plan), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::invalid_config;
                       }));

  ReplayBuffer single(6);
  std::vector<EmbeddingSample> one_class;
  for (const auto& s : embed_all(fx.fe, fx.split.fe_train)) {
    if (s.label == 0) one_class.push_back(s);
  }
  single.update(one_class);
  CHECK_THROWS_MATCHES(run_stream(fx.fe, fx.rm_cfg, single, fx.plan), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::empty_replay;
                       }));
}
