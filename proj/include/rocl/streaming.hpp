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

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rocl/common.hpp"
#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"
#include "rocl/feature_extractor.hpp"
#include "rocl/metrics.hpp"
#include "rocl/relation_module.hpp"
#include "rocl/replay.hpp"

namespace rocl {

/// One arrival unit of the stream: windows whose labels the learner may use,
/// and windows it must classify blind (their labels exist only for scoring).
struct StreamBatch {
  std::vector<SensorWindow> labeled;
  std::vector<SensorWindow> unlabeled;
  int batch_index = 0;
};

struct StreamPlanConfig {
  int batch_size = 64;
  double base_label_fraction = 0.10;
  int labeled_per_new_class = 20;
  int intro_chunk = 6;  // labeled samples delivered in a class's first batch
  std::uint64_t seed = 0;

  void validate() const {
    require(batch_size >= 4, ErrCode::invalid_config, "batch_size must be at least 4");
    require(base_label_fraction >= 0.0 && base_label_fraction < 1.0, ErrCode::invalid_config,
            "base_label_fraction must lie in [0, 1)");
    require(labeled_per_new_class >= 2, ErrCode::invalid_config,
            "labeled_per_new_class must be at least 2");
    require(intro_chunk >= 2 && intro_chunk <= labeled_per_new_class, ErrCode::invalid_config,
            "intro_chunk must lie in [2, labeled_per_new_class]");
  }
};

struct StreamPlan {
  std::vector<StreamBatch> batches;
  std::map<int, int> introduction_batch;  // new class -> first batch index
  std::set<int> base_classes;
  std::set<int> new_classes;
  int labeled_per_new_class = 20;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint32_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace detail

/// Lay the evaluation stream out into batches.
///
/// Every batch carries a slice of the base-class test data plus, once a new
/// class has been introduced, a slice of that class's test data. A new class
/// is introduced by a labeled chunk in its first batch; the rest of its
/// labeled budget trickles in one sample per subsequent batch. Each batch
/// also carries a small labeled base-class portion for replay refresh. In
/// within-subject mode the labeled pool and the test set are the same
/// windows, so anything handed out as labeled is withheld from scoring.
inline StreamPlan make_stream_plan(const ScenarioSplit& split, const StreamPlanConfig& cfg) {
  cfg.validate();
  require(!split.new_classes.empty(), ErrCode::insufficient_data,
          "scenario has no new classes to stream");

  StreamPlan plan;
  plan.base_classes = split.base_classes;
  plan.new_classes = split.new_classes;
  plan.labeled_per_new_class = cfg.labeled_per_new_class;
  plan.seed = cfg.seed;

  // Index the pools by role.
  std::vector<std::size_t> pool_base;
  std::map<int, std::vector<std::size_t>> pool_new;
  for (std::size_t i = 0; i < split.rm_train_pool.size(); ++i) {
    const int label = split.rm_train_pool[i].label;
    if (split.base_classes.count(label)) {
      pool_base.push_back(i);
    } else {
      pool_new[label].push_back(i);
    }
  }
  std::vector<std::size_t> test_base;
  std::map<int, std::vector<std::size_t>> test_new;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const int label = split.test[i].label;
    if (split.base_classes.count(label)) {
      test_base.push_back(i);
    } else {
      test_new[label].push_back(i);
    }
  }
  for (int cls : split.new_classes) {
    require(pool_new.count(cls) &&
                pool_new[cls].size() >= static_cast<std::size_t>(cfg.labeled_per_new_class),
            ErrCode::insufficient_data,
            "class " + std::to_string(cls) + " cannot fill its labeled budget");
    require(test_new.count(cls) && !test_new[cls].empty(), ErrCode::insufficient_data,
            "class " + std::to_string(cls) + " has no test data");
  }
  require(!test_base.empty(), ErrCode::insufficient_data, "no base-class test data");

  auto shuffle_in_place = [&](std::vector<std::size_t>& v, std::uint64_t tag, std::uint64_t sub) {
    std::mt19937 rng(derive_seed(cfg.seed, tag, sub));
    std::shuffle(v.begin(), v.end(), rng);
  };
  shuffle_in_place(pool_base, 801, 0);
  for (auto& [cls, v] : pool_new) shuffle_in_place(v, 802, static_cast<std::uint64_t>(cls));
  shuffle_in_place(test_base, 803, 0);
  for (auto& [cls, v] : test_new) shuffle_in_place(v, 804, static_cast<std::uint64_t>(cls));

  // Batch count: enough to carry the test set at the target unlabeled rate,
  // with a floor so introductions have room before, between, and after them.
  const auto n_new = static_cast<int>(split.new_classes.size());
  const int base_labeled_per_batch =
      static_cast<int>(std::llround(cfg.batch_size * cfg.base_label_fraction));
  const int u_target = std::max(1, cfg.batch_size - base_labeled_per_batch);
  std::size_t total_test = test_base.size();
  for (const auto& [cls, v] : test_new) total_test += v.size();
  const int b_floor = 3 * (n_new + 1);
  const int n_batches = std::max<int>(
      b_floor, static_cast<int>((total_test + static_cast<std::size_t>(u_target) - 1) /
                                static_cast<std::size_t>(u_target)));

  std::vector<int> new_sorted(split.new_classes.begin(), split.new_classes.end());
  for (int r = 0; r < n_new; ++r) {
    plan.introduction_batch[new_sorted[static_cast<std::size_t>(r)]] =
        (r + 1) * n_batches / (n_new + 1);
  }

  // Labeled schedule. labeled_pool_use[b] lists pool indices handed out in
  // batch b; in within-subject mode those indices also identify test windows
  // to withhold from the unlabeled stream.
  std::vector<std::vector<std::size_t>> labeled_per_batch(
      static_cast<std::size_t>(n_batches));
  std::set<std::size_t> withheld;
  const bool overlap = split.mode == SplitMode::within_subject;

  std::size_t base_cursor = 0;
  for (int b = 0; b < n_batches; ++b) {
    for (int k = 0; k < base_labeled_per_batch && base_cursor < pool_base.size(); ++k) {
      labeled_per_batch[static_cast<std::size_t>(b)].push_back(pool_base[base_cursor]);
      if (overlap) withheld.insert(pool_base[base_cursor]);
      ++base_cursor;
    }
  }
  for (int cls : new_sorted) {
    const int intro = plan.introduction_batch.at(cls);
    const auto& supply = pool_new.at(cls);
    const auto budget = static_cast<std::size_t>(cfg.labeled_per_new_class);
    std::size_t cursor = 0;
    const auto chunk = std::min<std::size_t>(static_cast<std::size_t>(cfg.intro_chunk), budget);
    for (; cursor < chunk; ++cursor) {
      labeled_per_batch[static_cast<std::size_t>(intro)].push_back(supply[cursor]);
      if (overlap) withheld.insert(supply[cursor]);
    }
    int b = intro + 1;
    while (cursor < budget) {
      if (b >= n_batches) b = intro + 1;  // wrap if the tail is short
      labeled_per_batch[static_cast<std::size_t>(b)].push_back(supply[cursor]);
      if (overlap) withheld.insert(supply[cursor]);
      ++cursor;
      ++b;
    }
  }

  // Unlabeled schedule: deal base test data over all batches, each new
  // class's test data over the batches from its introduction onward.
  std::vector<std::vector<std::size_t>> unlabeled_per_batch(
      static_cast<std::size_t>(n_batches));
  {
    std::size_t k = 0;
    for (std::size_t idx : test_base) {
      if (overlap && withheld.count(idx)) continue;
      unlabeled_per_batch[k % static_cast<std::size_t>(n_batches)].push_back(idx);
      ++k;
    }
  }
  for (int cls : new_sorted) {
    const int intro = plan.introduction_batch.at(cls);
    const std::size_t span = static_cast<std::size_t>(n_batches - intro);
    std::size_t k = 0;
    for (std::size_t idx : test_new.at(cls)) {
      if (overlap && withheld.count(idx)) continue;
      unlabeled_per_batch[static_cast<std::size_t>(intro) + (k % span)].push_back(idx);
      ++k;
    }
  }

  plan.batches.resize(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    StreamBatch& batch = plan.batches[static_cast<std::size_t>(b)];
    batch.batch_index = b;
    for (std::size_t idx : labeled_per_batch[static_cast<std::size_t>(b)]) {
      batch.labeled.push_back(split.rm_train_pool[idx]);
    }
    for (std::size_t idx : unlabeled_per_batch[static_cast<std::size_t>(b)]) {
      batch.unlabeled.push_back(split.test[idx]);
    }
    require(!batch.labeled.empty() || !batch.unlabeled.empty(), ErrCode::insufficient_data,
            "batch " + std::to_string(b) + " would be empty; too little data for the plan");
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Stream driver.
// ---------------------------------------------------------------------------

enum class ClassifierKind { relation, mlp3 };

struct BatchMetrics {
  int batch_index = 0;
  std::size_t n_unlabeled = 0;
  double accuracy = kNaN;  // NaN when the batch had nothing to score
  double cumulative_accuracy = kNaN;
  bool retrain = false;
  std::string retrain_reason;
  double retrain_seconds = 0.0;
};

struct RetrainEvent {
  int batch_index = 0;
  std::string reason;
  double seconds = 0.0;
};

struct MetricsReport {
  std::vector<BatchMetrics> batches;
  double final_accuracy = kNaN;
  double final_macro_f1 = kNaN;
  double base_macro_f1 = kNaN;
  double new_macro_f1 = kNaN;
  std::map<int, double> per_class_f1_map;
  std::vector<RetrainEvent> retrains;
  std::size_t replay_snapshot_bytes = 0;
  std::vector<int> all_preds;
  std::vector<int> all_truths;
};

/// Consume the planned stream: per batch, embed both portions, refresh the
/// replay buffer with the labeled embeddings, retrain the classifier if the
/// buffer says so, then classify the unlabeled portion with whatever
/// classifier is current after that step and score it against the held-back
/// truth. The optional callback sees each batch's metrics as soon as they
/// exist, so callers can flush partial output before a failed retrain
/// propagates.
inline MetricsReport run_stream(const FeModel& fe, const RmConfig& rm_cfg, ReplayBuffer& replay,
                                const StreamPlan& plan,
                                ClassifierKind kind = ClassifierKind::relation,
                                const std::function<void(const BatchMetrics&)>& on_batch = {}) {
  require(fe.frozen, ErrCode::invalid_config, "feature extractor must be frozen");
  require(replay.class_count() >= 2, ErrCode::empty_replay,
          "replay must be initialized from base classes");
  for (const auto& [cls, intro] : plan.introduction_batch) {
    std::size_t arriving = 0;
    for (const SensorWindow& w : plan.batches.at(static_cast<std::size_t>(intro)).labeled) {
      if (w.label == cls) ++arriving;
    }
    // The retrain fired by this class needs support plus at least one query.
    require(arriving > static_cast<std::size_t>(rm_cfg.support_per_class),
            ErrCode::invalid_config,
            "class " + std::to_string(cls) + " arrives with " + std::to_string(arriving) +
                " labeled samples; need more than support_per_class (" +
                std::to_string(rm_cfg.support_per_class) + ")");
  }

  auto derived_cfg = [&](std::uint64_t stage) {
    RmConfig c = rm_cfg;
    c.seed = derive_seed(rm_cfg.seed, 909, stage);
    return c;
  };

  RmModel rm;
  MlpModel mlp;
  if (kind == ClassifierKind::relation) {
    rm = train_rm(replay, derived_cfg(0));
  } else {
    mlp = mlp_baseline_train(replay, derived_cfg(0));
  }

  MetricsReport report;
  std::size_t cum_correct = 0;

  for (const StreamBatch& batch : plan.batches) {
    BatchMetrics bm;
    bm.batch_index = batch.batch_index;
    bm.n_unlabeled = batch.unlabeled.size();

    const std::vector<EmbeddingSample> labeled_emb = embed_all(fe, batch.labeled);
    std::vector<std::vector<double>> queries;
    std::vector<int> truths;
    queries.reserve(batch.unlabeled.size());
    truths.reserve(batch.unlabeled.size());
    for (const auto& w : batch.unlabeled) {
      queries.push_back(embed(fe, w).vec);  // prediction path never reads w.label
      truths.push_back(w.label);
    }

    replay.update(labeled_emb);
    const RetrainDecision decision = replay.should_retrain();
    if (decision.retrain) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (kind == ClassifierKind::relation) {
          rm = train_rm(replay, derived_cfg(static_cast<std::uint64_t>(batch.batch_index) + 1));
        } else {
          mlp = mlp_baseline_train(replay,
                                   derived_cfg(static_cast<std::uint64_t>(batch.batch_index) + 1));
        }
      } catch (const Error&) {
        if (on_batch) {
          bm.retrain = true;
          bm.retrain_reason = decision.reason;
          on_batch(bm);
        }
        throw;
      }
      const auto t1 = std::chrono::steady_clock::now();
      replay.reset_trigger();
      bm.retrain = true;
      bm.retrain_reason = decision.reason;
      bm.retrain_seconds = std::chrono::duration<double>(t1 - t0).count();
      report.retrains.push_back({batch.batch_index, decision.reason, bm.retrain_seconds});
    }

    if (!queries.empty()) {
      std::vector<int> preds;
      if (kind == ClassifierKind::relation) {
        preds = classify(rm, replay, queries).labels;
      } else {
        preds = mlp_baseline_classify(mlp, queries);
      }
      std::size_t correct = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == truths[i]) ++correct;
      }
      bm.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
      cum_correct += correct;
      report.all_preds.insert(report.all_preds.end(), preds.begin(), preds.end());
      report.all_truths.insert(report.all_truths.end(), truths.begin(), truths.end());
    }
    if (!report.all_truths.empty()) {
      bm.cumulative_accuracy =
          static_cast<double>(cum_correct) / static_cast<double>(report.all_truths.size());
    }

    report.batches.push_back(bm);
    if (on_batch) on_batch(bm);
  }

  if (!report.all_truths.empty()) {
    report.final_accuracy = accuracy(report.all_preds, report.all_truths);
    std::set<int> all_classes = plan.base_classes;
    all_classes.insert(plan.new_classes.begin(), plan.new_classes.end());
    if (!all_classes.empty()) {
      report.final_macro_f1 = macro_f1(report.all_preds, report.all_truths, all_classes);
      report.per_class_f1_map = per_class_f1(report.all_preds, report.all_truths, all_classes);
    }
    if (!plan.base_classes.empty()) {
      report.base_macro_f1 = macro_f1(report.all_preds, report.all_truths, plan.base_classes);
    }
    if (!plan.new_classes.empty()) {
      report.new_macro_f1 = macro_f1(report.all_preds, report.all_truths, plan.new_classes);
    }
  }
  report.replay_snapshot_bytes = snapshot_bytes(replay).size();
  return report;
}

}  // namespace rocl
