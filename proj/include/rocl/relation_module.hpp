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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rocl/artifact.hpp"
#include "rocl/common.hpp"
#include "rocl/errors.hpp"
#include "rocl/losses.hpp"
#include "rocl/nn.hpp"
#include "rocl/replay.hpp"

namespace rocl {

struct RmConfig {
  int embedding_dim = 128;
  int support_per_class = 5;  // N_s
  double lambda_l2 = 1e-3;
  double lr = 1e-3;
  int batch_size = 50;
  int epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    require(embedding_dim >= 2, ErrCode::invalid_config, "embedding_dim must be at least 2");
    require(support_per_class >= 1, ErrCode::invalid_config, "support_per_class must be >= 1");
    require(lambda_l2 >= 0.0, ErrCode::invalid_config, "lambda_l2 must be nonnegative");
    require(lr > 0.0, ErrCode::invalid_config, "lr must be positive");
    require(batch_size >= 1, ErrCode::invalid_config, "batch_size must be positive");
    require(epochs >= 0, ErrCode::invalid_config, "epochs must be nonnegative");
  }
};

/// Scores r[i][j] in (0,1) for class representative i against query j.
struct RelationScores {
  Mat r;
  std::vector<int> class_ids;  // row order
};

/// Learnable comparator over embedding pairs: the concatenated pair is viewed
/// as a 2-channel sequence of length embedding_dim, passed through one
/// convolution (16 filters, kernel 3), a rectifier, a mean over positions,
/// and two fully connected layers to a scalar squashed by a sigmoid.
class RmModel {
 public:
  RmConfig cfg;
  Conv1d conv;
  Dense fc1;
  Dense fc2;

  struct Cache {
    Conv1d::Cache conv;
    Relu::Cache relu1;
    TimeAvgPool::Cache avg;
    Dense::Cache fc1;
    Relu::Cache relu2;
    Dense::Cache fc2;
    double sig = 0.0;  // forward output before clamping
  };

  std::vector<Param*> params() {
    std::vector<Param*> out;
    conv.collect(out);
    fc1.collect(out);
    fc2.collect(out);
    return out;
  }

  std::vector<const Param*> params() const {
    return {&conv.weight, &conv.bias, &fc1.weight, &fc1.bias, &fc2.weight, &fc2.bias};
  }

  /// Raw sigmoid output for one (representative, query) pair.
  double forward_pair(const std::vector<double>& rep, const std::vector<double>& query,
                      Cache& cache) const {
    const auto d = static_cast<std::size_t>(cfg.embedding_dim);
    require(rep.size() == d && query.size() == d, ErrCode::shape_mismatch,
            "pair width does not match embedding_dim");
    Mat x(d, 2);
    for (std::size_t t = 0; t < d; ++t) {
      x.at(t, 0) = rep[t];
      x.at(t, 1) = query[t];
    }
    Mat h = conv.forward(x, cache.conv);
    h = Relu::forward(h, cache.relu1);
    h = TimeAvgPool::forward(h, cache.avg);
    h = fc1.forward(h, cache.fc1);
    h = Relu::forward(h, cache.relu2);
    h = fc2.forward(h, cache.fc2);
    cache.sig = 1.0 / (1.0 + std::exp(-h.at(0, 0)));
    return cache.sig;
  }

  /// Accumulate parameter gradients for one pair given dL/d(score).
  void backward_pair(double d_score, Cache& cache) {
    const double s = cache.sig;
    Mat g(1, 1);
    g.at(0, 0) = d_score * s * (1.0 - s);
    Mat h = fc2.backward(g, cache.fc2);
    h = Relu::backward(h, cache.relu2);
    h = fc1.backward(h, cache.fc1);
    h = TimeAvgPool::backward(h, cache.avg, conv.out_ch);
    h = Relu::backward(h, cache.relu1);
    conv.backward(h, cache.conv);  // gradient w.r.t. the pair itself is unused
  }

  std::uint64_t checksum() const { return param_checksum(params()); }
};

/// Scores are reported strictly inside (0,1); extreme sigmoid outputs that
/// round to 0 or 1 in floating point are clamped by this margin.
constexpr double kScoreClamp = 1e-12;

inline RmModel build_rm(const RmConfig& cfg) {
  cfg.validate();
  RmModel rm;
  rm.cfg = cfg;
  std::mt19937 rng(derive_seed(cfg.seed, 700));
  rm.conv.init(2, 16, 3, 1, 1, rng);
  rm.fc1.init(16, 64, rng);
  rm.fc2.init(64, 1, rng);
  return rm;
}

struct Episode {
  std::map<int, std::vector<EmbeddingSample>> support;
  std::map<int, std::vector<EmbeddingSample>> query;
  std::vector<int> class_ids;
};

/// Split each replay class into N_s random support samples and the remaining
/// query samples; every class must keep at least one query sample.
inline Episode sample_episode(const ReplayBuffer& replay, int n_support, std::mt19937& rng) {
  require(n_support >= 1, ErrCode::invalid_config, "n_support must be positive");
  Episode ep;
  for (const auto& [cls, samples] : replay.store()) {
    require(samples.size() > static_cast<std::size_t>(n_support), ErrCode::class_too_small,
            "class " + std::to_string(cls) + " has " + std::to_string(samples.size()) +
                " samples, need more than " + std::to_string(n_support));
    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i < static_cast<std::size_t>(n_support)) {
        ep.support[cls].push_back(samples[idx[i]]);
      } else {
        ep.query[cls].push_back(samples[idx[i]]);
      }
    }
    ep.class_ids.push_back(cls);
  }
  return ep;
}

/// Element-wise mean of one class's support embeddings.
inline std::vector<double> class_representative(const std::vector<EmbeddingSample>& samples) {
  require(!samples.empty(), ErrCode::empty_support, "no support samples");
  std::vector<double> mean(samples.front().vec.size(), 0.0);
  for (const auto& s : samples) {
    require(s.vec.size() == mean.size(), ErrCode::dimension_mismatch,
            "inconsistent embedding widths in support set");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s.vec[i];
  }
  for (double& v : mean) v /= static_cast<double>(samples.size());
  return mean;
}

/// Score every (representative, query) pair; rows follow the order of
/// `support_reps`.
inline RelationScores relation_scores(const RmModel& rm,
                                      const std::vector<std::vector<double>>& support_reps,
                                      const std::vector<int>& rep_class_ids,
                                      const std::vector<std::vector<double>>& queries) {
  require(support_reps.size() == rep_class_ids.size(), ErrCode::shape_mismatch,
          "representative count does not match class id count");
  RelationScores out;
  out.class_ids = rep_class_ids;
  out.r = Mat(support_reps.size(), queries.size());
  for (std::size_t i = 0; i < support_reps.size(); ++i) {
    for (std::size_t j = 0; j < queries.size(); ++j) {
      RmModel::Cache cache;
      const double s = rm.forward_pair(support_reps[i], queries[j], cache);
      out.r.at(i, j) = std::clamp(s, kScoreClamp, 1.0 - kScoreClamp);
    }
  }
  return out;
}

/// Episode objective: sum over all (class, query) pairs of the squared gap to
/// the match indicator, plus (lambda / 2m) times the squared parameter norm,
/// m being the number of support classes.
inline double rm_loss(const Mat& scores, const std::vector<int>& support_labels,
                      const std::vector<int>& query_labels, double lambda_l2,
                      const std::vector<const Param*>& weights) {
  require(scores.rows == support_labels.size(), ErrCode::shape_mismatch,
          "score rows do not match support labels");
  require(scores.cols == query_labels.size(), ErrCode::shape_mismatch,
          "score cols do not match query labels");
  require(!support_labels.empty(), ErrCode::empty_support, "no support classes");
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    for (std::size_t j = 0; j < scores.cols; ++j) {
      const double target = support_labels[i] == query_labels[j] ? 1.0 : 0.0;
      const double diff = scores.at(i, j) - target;
      loss += diff * diff;
    }
  }
  if (lambda_l2 > 0.0) {
    double sq = 0.0;
    for (const Param* p : weights) {
      for (double v : p->value.data) sq += v * v;
    }
    loss += lambda_l2 / (2.0 * static_cast<double>(support_labels.size())) * sq;
  }
  return loss;
}

struct RmTrainLog {
  std::vector<double> epoch_loss;
  double final_replay_accuracy = 0.0;
};

struct ClassifyResult {
  std::vector<int> labels;
  RelationScores scores;
};

/// Representatives of every replay class from its full sample list, ascending
/// class id.
inline std::pair<std::vector<std::vector<double>>, std::vector<int>> replay_representatives(
    const ReplayBuffer& replay) {
  std::vector<std::vector<double>> reps;
  std::vector<int> ids;
  for (const auto& [cls, samples] : replay.store()) {
    reps.push_back(class_representative(samples));
    ids.push_back(cls);
  }
  return {reps, ids};
}

/// Label queries by the highest-scoring class representative; ties go to the
/// smallest class id.
inline ClassifyResult classify(const RmModel& rm, const ReplayBuffer& replay,
                               const std::vector<std::vector<double>>& queries) {
  require(replay.class_count() >= 1, ErrCode::empty_replay, "replay buffer is empty");
  auto [reps, ids] = replay_representatives(replay);
  ClassifyResult out;
  out.scores = relation_scores(rm, reps, ids, queries);
  out.labels.resize(queries.size());
  for (std::size_t j = 0; j < queries.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < reps.size(); ++i) {
      if (out.scores.r.at(i, j) > out.scores.r.at(best, j)) best = i;
    }
    out.labels[j] = ids[best];  // ids ascend, so ties keep the smallest id
  }
  return out;
}

/// Train a fresh comparator on the replay buffer: each epoch draws a new
/// episode, and the episode's query set is consumed in batches, one adaptive
/// gradient step per batch.
inline RmModel train_rm(const ReplayBuffer& replay, const RmConfig& cfg,
                        RmTrainLog* log = nullptr) {
  cfg.validate();
  require(replay.class_count() >= 2, ErrCode::class_too_small,
          "need at least 2 classes in replay");
  RmModel rm = build_rm(cfg);
  const std::vector<Param*> params = rm.params();
  Adam opt;
  opt.lr = cfg.lr;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937 rng(derive_seed(cfg.seed, 707, static_cast<std::uint64_t>(epoch)));
    const Episode ep = sample_episode(replay, cfg.support_per_class, rng);

    std::vector<std::vector<double>> reps;
    std::vector<int> rep_ids;
    for (const auto& [cls, samples] : ep.support) {
      reps.push_back(class_representative(samples));
      rep_ids.push_back(cls);
    }
    std::vector<const EmbeddingSample*> queries;
    for (const auto& [cls, samples] : ep.query) {
      for (const auto& s : samples) queries.push_back(&s);
    }
    const double m = static_cast<double>(rep_ids.size());

    double epoch_loss = 0.0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t start = 0; start < queries.size(); start += bs) {
      const std::size_t end = std::min(queries.size(), start + bs);
      Adam::zero_grads(params);
      double batch_loss = 0.0;
      for (std::size_t j = start; j < end; ++j) {
        for (std::size_t i = 0; i < reps.size(); ++i) {
          RmModel::Cache cache;
          const double s = rm.forward_pair(reps[i], queries[j]->vec, cache);
          const double target = rep_ids[i] == queries[j]->label ? 1.0 : 0.0;
          const double diff = s - target;
          batch_loss += diff * diff;
          rm.backward_pair(2.0 * diff, cache);
        }
      }
      if (cfg.lambda_l2 > 0.0) {
        for (Param* p : params) {
          for (std::size_t k = 0; k < p->value.data.size(); ++k) {
            batch_loss += cfg.lambda_l2 / (2.0 * m) * p->value.data[k] * p->value.data[k];
            p->grad.data[k] += cfg.lambda_l2 / m * p->value.data[k];
          }
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrCode::non_finite_loss,
                    "non-finite relation loss at epoch " + std::to_string(epoch));
      }
      opt.step(params);
      epoch_loss += batch_loss;
    }
    if (log != nullptr) log->epoch_loss.push_back(epoch_loss);
  }

  if (log != nullptr) {
    std::vector<std::vector<double>> all;
    std::vector<int> truth;
    for (const auto& [cls, samples] : replay.store()) {
      for (const auto& s : samples) {
        all.push_back(s.vec);
        truth.push_back(cls);
      }
    }
    const ClassifyResult res = classify(rm, replay, all);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (res.labels[i] == truth[i]) ++correct;
    }
    log->final_replay_accuracy =
        truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  }
  return rm;
}

// ---------------------------------------------------------------------------
// Three-layer MLP ablation classifier: one embedding in, replay-class logits
// out, trained with cross-entropy on every replay sample.
// ---------------------------------------------------------------------------

class MlpModel {
 public:
  RmConfig cfg;
  Dense fc1, fc2, fc3;
  std::vector<int> class_ids;

  struct Cache {
    Dense::Cache fc1;
    Relu::Cache relu1;
    Dense::Cache fc2;
    Relu::Cache relu2;
    Dense::Cache fc3;
  };

  std::vector<Param*> params() {
    std::vector<Param*> out;
    fc1.collect(out);
    fc2.collect(out);
    fc3.collect(out);
    return out;
  }

  Mat forward(const std::vector<double>& emb, Cache& cache) const {
    Mat x(1, emb.size());
    x.data = emb;
    Mat h = fc1.forward(x, cache.fc1);
    h = Relu::forward(h, cache.relu1);
    h = fc2.forward(h, cache.fc2);
    h = Relu::forward(h, cache.relu2);
    return fc3.forward(h, cache.fc3);
  }

  void backward(const Mat& d_logits, Cache& cache) {
    Mat h = fc3.backward(d_logits, cache.fc3);
    h = Relu::backward(h, cache.relu2);
    h = fc2.backward(h, cache.fc2);
    h = Relu::backward(h, cache.relu1);
    fc1.backward(h, cache.fc1);
  }
};

inline MlpModel mlp_baseline_train(const ReplayBuffer& replay, const RmConfig& cfg,
                                   std::vector<double>* loss_log = nullptr) {
  cfg.validate();
  require(replay.class_count() >= 2, ErrCode::class_too_small,
          "need at least 2 classes in replay");
  MlpModel mlp;
  mlp.cfg = cfg;
  mlp.class_ids = replay.known_classes();
  std::mt19937 init_rng(derive_seed(cfg.seed, 711));
  mlp.fc1.init(static_cast<std::size_t>(cfg.embedding_dim), 64, init_rng);
  mlp.fc2.init(64, 64, init_rng);
  mlp.fc3.init(64, mlp.class_ids.size(), init_rng);

  std::vector<const EmbeddingSample*> samples;
  std::vector<int> targets;
  for (const auto& [cls, list] : replay.store()) {
    const auto it = std::lower_bound(mlp.class_ids.begin(), mlp.class_ids.end(), cls);
    const int target = static_cast<int>(std::distance(mlp.class_ids.begin(), it));
    for (const auto& s : list) {
      samples.push_back(&s);
      targets.push_back(target);
    }
  }

  const std::vector<Param*> params = mlp.params();
  Adam opt;
  opt.lr = cfg.lr;
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937 rng(derive_seed(cfg.seed, 712, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::size_t b = end - start;
      Adam::zero_grads(params);
      Mat logits(b, mlp.class_ids.size());
      std::vector<int> batch_targets(b);
      std::vector<MlpModel::Cache> caches(b);
      for (std::size_t i = 0; i < b; ++i) {
        const Mat l = mlp.forward(samples[order[start + i]]->vec, caches[i]);
        for (std::size_t c = 0; c < l.cols; ++c) logits.at(i, c) = l.at(0, c);
        batch_targets[i] = targets[order[start + i]];
      }
      const SoftmaxXent ce = softmax_cross_entropy(logits, batch_targets);
      if (!std::isfinite(ce.loss)) {
        throw Error(ErrCode::non_finite_loss,
                    "non-finite ablation loss at epoch " + std::to_string(epoch));
      }
      for (std::size_t i = 0; i < b; ++i) {
        Mat dl(1, logits.cols);
        for (std::size_t c = 0; c < logits.cols; ++c) dl.at(0, c) = ce.grad_logits.at(i, c);
        mlp.backward(dl, caches[i]);
      }
      opt.step(params);
      epoch_loss += ce.loss;
    }
    if (loss_log != nullptr) loss_log->push_back(epoch_loss);
  }
  return mlp;
}

inline std::vector<int> mlp_baseline_classify(const MlpModel& mlp,
                                              const std::vector<std::vector<double>>& queries) {
  std::vector<int> out(queries.size());
  for (std::size_t j = 0; j < queries.size(); ++j) {
    MlpModel::Cache cache;
    const Mat l = mlp.forward(queries[j], cache);
    out[j] = mlp.class_ids[argmax_tie_low(l.data)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Artifact round-trip for the comparator, same container as the extractor.
// ---------------------------------------------------------------------------

inline void save_rm(const RmModel& rm, const std::string& path) {
  Artifact art;
  art.descriptor["kind"] = "relation_module";
  nlohmann::json cfg;
  cfg["embedding_dim"] = rm.cfg.embedding_dim;
  cfg["support_per_class"] = rm.cfg.support_per_class;
  cfg["lambda_l2"] = rm.cfg.lambda_l2;
  art.descriptor["config"] = cfg;
  const std::vector<std::string> names = {"conv.weight", "conv.bias", "fc1.weight",
                                          "fc1.bias",    "fc2.weight", "fc2.bias"};
  const std::vector<const Param*> params = rm.params();
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    layers.push_back({{"name", names[i]},
                      {"shape", {params[i]->value.rows, params[i]->value.cols}}});
    ArtifactBlob b;
    b.name = names[i];
    for (double v : params[i]->value.data) b.values.push_back(static_cast<float>(v));
    art.blobs.push_back(std::move(b));
  }
  art.descriptor["layers"] = layers;
  save_artifact(art, path);
}

inline RmModel load_rm(const std::string& path) {
  const Artifact art = load_artifact(path);
  require(art.descriptor.value("kind", "") == "relation_module", ErrCode::corrupt_artifact,
          "artifact is not a relation module");
  RmConfig cfg;
  cfg.embedding_dim = art.descriptor.at("config").at("embedding_dim").get<int>();
  cfg.support_per_class = art.descriptor.at("config").at("support_per_class").get<int>();
  cfg.lambda_l2 = art.descriptor.at("config").at("lambda_l2").get<double>();
  RmModel rm = build_rm(cfg);
  const std::vector<std::string> names = {"conv.weight", "conv.bias", "fc1.weight",
                                          "fc1.bias",    "fc2.weight", "fc2.bias"};
  std::vector<Param*> params = rm.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ArtifactBlob& b = art.blob(names[i]);
    require(b.values.size() == params[i]->value.data.size(), ErrCode::corrupt_artifact,
            "blob '" + names[i] + "' has wrong element count");
    for (std::size_t k = 0; k < b.values.size(); ++k) {
      params[i]->value.data[k] = static_cast<double>(b.values[k]);
    }
  }
  return rm;
}

}  // namespace rocl
