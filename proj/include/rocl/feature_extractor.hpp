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
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rocl/artifact.hpp"
#include "rocl/common.hpp"
#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"
#include "rocl/losses.hpp"
#include "rocl/nn.hpp"

namespace rocl {

struct FeConfig {
  int input_channels = 0;
  int window_len = 0;
  int embedding_dim = 128;
  std::vector<int> conv_channels = {64, 128};
  std::vector<int> kernel_sizes = {5, 5};
  int lstm_hidden = 128;
  int n_classes_base = 0;
  double tau = 0.1;
  double lr = 1e-3;
  int batch_size = 50;
  int epochs = 50;
  bool use_contrastive = true;
  bool supcon_normalize = true;
  std::uint64_t seed = 0;

  void validate() const {
    require(input_channels >= 1, ErrCode::invalid_config, "input_channels must be positive");
    require(window_len >= 1, ErrCode::invalid_config, "window_len must be positive");
    require(embedding_dim >= 2, ErrCode::invalid_config, "embedding_dim must be at least 2");
    require(!conv_channels.empty(), ErrCode::invalid_config, "need at least one conv block");
    require(conv_channels.size() == kernel_sizes.size(), ErrCode::invalid_config,
            "conv_channels and kernel_sizes lengths differ");
    for (int k : kernel_sizes)
      require(k >= 1, ErrCode::invalid_config, "kernel sizes must be positive");
    for (int c : conv_channels)
      require(c >= 1, ErrCode::invalid_config, "conv channel counts must be positive");
    require(lstm_hidden >= 1, ErrCode::invalid_config, "lstm_hidden must be positive");
    require(n_classes_base >= 2, ErrCode::invalid_config, "need at least 2 base classes");
    require(tau > 0.0, ErrCode::invalid_config, "tau must be positive");
    require(lr > 0.0, ErrCode::invalid_config, "lr must be positive");
    require(batch_size >= 2, ErrCode::invalid_config, "batch_size must be at least 2");
    require(epochs >= 0, ErrCode::invalid_config, "epochs must be nonnegative");
  }
};

/// Fixed-dimension feature vector with its class label and arrival time; the
/// unit stored in the replay buffer.
struct EmbeddingSample {
  std::vector<double> vec;
  int label = -1;
  double timestamp = 0.0;
};

inline Mat window_to_mat(const SensorWindow& w) {
  Mat x(w.width, w.channels);
  x.data = w.data;
  return x;
}

/// Convolutional-recurrent feature extractor: per conv block
/// (convolution stride 2, rectifier, max-pool 2), then a recurrent layer over
/// the shortened sequence, a mean over time, and a linear map to the
/// embedding. A linear head on top of the embedding produces base-class
/// logits and exists only for pre-training; the embedding is the layer
/// the rest of the system consumes.
class FeModel {
 public:
  FeConfig cfg;
  std::vector<Conv1d> convs;
  Lstm lstm;
  Dense embed_fc;
  Dense head;
  std::vector<int> class_ids;  // sorted base-class labels; position = logit index
  Normalizer norm;             // channel statistics the training data was scaled with
  bool frozen = false;

  struct Cache {
    std::vector<Conv1d::Cache> conv;
    std::vector<Relu::Cache> relu;
    std::vector<MaxPool1d::Cache> pool;
    Lstm::Cache lstm;
    TimeAvgPool::Cache avg;
    Dense::Cache embed;
    Dense::Cache head;
  };

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& c : convs) c.collect(out);
    lstm.collect(out);
    embed_fc.collect(out);
    head.collect(out);
    return out;
  }

  std::vector<const Param*> params() const {
    std::vector<const Param*> out;
    for (const auto& c : convs) {
      out.push_back(&c.weight);
      out.push_back(&c.bias);
    }
    out.push_back(&lstm.wx);
    out.push_back(&lstm.wh);
    out.push_back(&lstm.bias);
    out.push_back(&embed_fc.weight);
    out.push_back(&embed_fc.bias);
    out.push_back(&head.weight);
    out.push_back(&head.bias);
    return out;
  }

  /// Penultimate activation for one window, [1 x embedding_dim].
  Mat forward_embed(const Mat& x, Cache& cache) const {
    require(x.rows == static_cast<std::size_t>(cfg.window_len) &&
                x.cols == static_cast<std::size_t>(cfg.input_channels),
            ErrCode::shape_mismatch, "window shape does not match model input");
    cache.conv.resize(convs.size());
    cache.relu.resize(convs.size());
    cache.pool.resize(convs.size());
    Mat h = x;
    for (std::size_t i = 0; i < convs.size(); ++i) {
      h = convs[i].forward(h, cache.conv[i]);
      h = Relu::forward(h, cache.relu[i]);
      MaxPool1d pool;
      h = pool.forward(h, cache.pool[i]);
    }
    h = lstm.forward(h, cache.lstm);
    h = TimeAvgPool::forward(h, cache.avg);
    return embed_fc.forward(h, cache.embed);
  }

  Mat forward_logits(const Mat& embedding, Cache& cache) const {
    return head.forward(embedding, cache.head);
  }

  /// Backward through the trunk given d(embedding); d(logits) optional.
  void backward(const Mat& d_embed, const Mat* d_logits, Cache& cache) {
    Mat g = d_embed;
    if (d_logits != nullptr) {
      const Mat from_head = head.backward(*d_logits, cache.head);
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += from_head.data[i];
    }
    g = embed_fc.backward(g, cache.embed);
    g = TimeAvgPool::backward(g, cache.avg, cfg.lstm_hidden);
    g = lstm.backward(g, cache.lstm);
    for (std::size_t i = convs.size(); i-- > 0;) {
      MaxPool1d pool;
      g = pool.backward(g, cache.pool[i]);
      g = Relu::backward(g, cache.relu[i]);
      g = convs[i].backward(g, cache.conv[i]);
    }
  }

  int logit_index(int label) const {
    auto it = std::lower_bound(class_ids.begin(), class_ids.end(), label);
    require(it != class_ids.end() && *it == label, ErrCode::invalid_config,
            "label " + std::to_string(label) + " is not a base class");
    return static_cast<int>(std::distance(class_ids.begin(), it));
  }

  /// Round every parameter to its float32 value and mark the model frozen, so
  /// in-memory inference matches a saved-and-reloaded copy bit for bit.
  void freeze() {
    for (Param* p : params()) {
      for (double& v : p->value.data) v = to_f32(v);
    }
    frozen = true;
  }

  std::uint64_t checksum() const { return param_checksum(params()); }
};

inline FeModel build_fe(const FeConfig& cfg) {
  cfg.validate();
  FeModel fe;
  fe.cfg = cfg;
  std::mt19937 rng(derive_seed(cfg.seed, 500));
  std::size_t ch = static_cast<std::size_t>(cfg.input_channels);
  std::size_t t = static_cast<std::size_t>(cfg.window_len);
  fe.convs.resize(cfg.conv_channels.size());
  for (std::size_t i = 0; i < fe.convs.size(); ++i) {
    const auto k = static_cast<std::size_t>(cfg.kernel_sizes[i]);
    fe.convs[i].init(ch, static_cast<std::size_t>(cfg.conv_channels[i]), k, 2, k / 2, rng);
    t = fe.convs[i].out_len(t);
    require(t >= 2, ErrCode::invalid_config, "window too short for the conv stack");
    t /= 2;  // max-pool
    ch = static_cast<std::size_t>(cfg.conv_channels[i]);
  }
  require(t >= 1, ErrCode::invalid_config, "window too short for the conv stack");
  fe.lstm.init(ch, static_cast<std::size_t>(cfg.lstm_hidden), rng);
  fe.embed_fc.init(static_cast<std::size_t>(cfg.lstm_hidden),
                   static_cast<std::size_t>(cfg.embedding_dim), rng);
  fe.head.init(static_cast<std::size_t>(cfg.embedding_dim),
               static_cast<std::size_t>(cfg.n_classes_base), rng);
  return fe;
}

inline EmbeddingSample embed(const FeModel& fe, const SensorWindow& w) {
  FeModel::Cache cache;
  const Mat e = fe.forward_embed(window_to_mat(w), cache);
  EmbeddingSample s;
  s.vec = e.data;
  s.label = w.label;
  s.timestamp = w.timestamp;
  return s;
}

inline std::vector<EmbeddingSample> embed_all(const FeModel& fe,
                                              const std::vector<SensorWindow>& ws) {
  std::vector<EmbeddingSample> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(embed(fe, w));
  return out;
}

struct FeTrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_ce;
  std::vector<double> epoch_con;
  double final_train_accuracy = 0.0;
};

/// Combined pre-training objective on one batch: mean cross-entropy over the
/// original windows' logits plus, when enabled, the contrastive loss over the
/// windows' fourfold augmentations.
inline double total_fe_loss(const FeModel& fe, const std::vector<SensorWindow>& originals,
                            const std::vector<SensorWindow>& augmented) {
  require(!originals.empty(), ErrCode::empty_input, "no windows");
  Mat logits(originals.size(), static_cast<std::size_t>(fe.cfg.n_classes_base));
  std::vector<int> idx(originals.size());
  for (std::size_t i = 0; i < originals.size(); ++i) {
    FeModel::Cache cache;
    const Mat e = fe.forward_embed(window_to_mat(originals[i]), cache);
    const Mat l = fe.forward_logits(e, cache);
    for (std::size_t c = 0; c < l.cols; ++c) logits.at(i, c) = l.at(0, c);
    idx[i] = fe.logit_index(originals[i].label);
  }
  double loss = softmax_cross_entropy(logits, idx).loss;
  if (fe.cfg.use_contrastive && !augmented.empty()) {
    Mat emb(augmented.size(), static_cast<std::size_t>(fe.cfg.embedding_dim));
    std::vector<int> labels(augmented.size());
    for (std::size_t i = 0; i < augmented.size(); ++i) {
      FeModel::Cache cache;
      const Mat e = fe.forward_embed(window_to_mat(augmented[i]), cache);
      for (std::size_t c = 0; c < e.cols; ++c) emb.at(i, c) = e.at(0, c);
      labels[i] = augmented[i].label;
    }
    loss += supcon_loss(emb, labels, fe.cfg.tau, fe.cfg.supcon_normalize);
  }
  return loss;
}

/// Pre-train the feature extractor. `augmented` must hold the four
/// augmentations of windows[i] at positions 4i..4i+3 (as produced by
/// augment_fourfold); pass an empty vector to train on cross-entropy alone.
/// Returns with every parameter rounded to float32 and the model frozen.
inline FeTrainLog train_fe(FeModel& fe, const std::vector<SensorWindow>& windows,
                           const std::vector<SensorWindow>& augmented) {
  require(!fe.frozen, ErrCode::invalid_config, "model is already frozen");
  require(!windows.empty(), ErrCode::empty_input, "no training windows");
  require(augmented.empty() || augmented.size() == windows.size() * 4, ErrCode::shape_mismatch,
          "augmented set must hold exactly four entries per window");

  std::set<int> label_set;
  for (const auto& w : windows) label_set.insert(w.label);
  require(static_cast<int>(label_set.size()) == fe.cfg.n_classes_base, ErrCode::invalid_config,
          "training labels do not match n_classes_base");
  fe.class_ids.assign(label_set.begin(), label_set.end());

  // NaN inputs would be silently zeroed by the relu stages, so reject them
  // here instead of training on garbage.
  auto all_finite = [](const std::vector<SensorWindow>& ws) {
    for (const auto& w : ws) {
      for (double v : w.data) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  };
  require(all_finite(windows) && all_finite(augmented), ErrCode::non_finite_loss,
          "training windows contain non-finite values");

  const bool contrastive = fe.cfg.use_contrastive && !augmented.empty();
  Adam opt;
  opt.lr = fe.cfg.lr;
  const std::vector<Param*> params = fe.params();

  FeTrainLog log;
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < fe.cfg.epochs; ++epoch) {
    std::mt19937 shuffle_rng(derive_seed(fe.cfg.seed, 505, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double ep_loss = 0.0, ep_ce = 0.0, ep_con = 0.0;
    std::size_t n_batches = 0;
    const auto bs = static_cast<std::size_t>(fe.cfg.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::size_t b = end - start;
      Adam::zero_grads(params);

      // Cross-entropy on the original windows.
      std::vector<FeModel::Cache> caches(b);
      Mat logits(b, static_cast<std::size_t>(fe.cfg.n_classes_base));
      std::vector<int> targets(b);
      for (std::size_t i = 0; i < b; ++i) {
        const SensorWindow& w = windows[order[start + i]];
        const Mat e = fe.forward_embed(window_to_mat(w), caches[i]);
        const Mat l = fe.forward_logits(e, caches[i]);
        for (std::size_t c = 0; c < l.cols; ++c) logits.at(i, c) = l.at(0, c);
        targets[i] = fe.logit_index(w.label);
      }
      const SoftmaxXent ce = softmax_cross_entropy(logits, targets);
      const Mat zero_embed(1, static_cast<std::size_t>(fe.cfg.embedding_dim));
      for (std::size_t i = 0; i < b; ++i) {
        Mat dl(1, logits.cols);
        for (std::size_t c = 0; c < logits.cols; ++c) dl.at(0, c) = ce.grad_logits.at(i, c);
        fe.backward(zero_embed, &dl, caches[i]);
      }

      // Contrastive loss on the batch's augmented views.
      double con = 0.0;
      if (contrastive) {
        const std::size_t m = 4 * b;
        std::vector<FeModel::Cache> acaches(m);
        Mat emb(m, static_cast<std::size_t>(fe.cfg.embedding_dim));
        std::vector<int> labels(m);
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t k = 0; k < 4; ++k) {
            const SensorWindow& w = augmented[4 * order[start + i] + k];
            const Mat e = fe.forward_embed(window_to_mat(w), acaches[4 * i + k]);
            for (std::size_t c = 0; c < e.cols; ++c) emb.at(4 * i + k, c) = e.at(0, c);
            labels[4 * i + k] = w.label;
          }
        }
        const SupConResult sc =
            supcon_loss_grad(emb, labels, fe.cfg.tau, fe.cfg.supcon_normalize);
        con = sc.loss;
        for (std::size_t i = 0; i < m; ++i) {
          Mat de(1, emb.cols);
          for (std::size_t c = 0; c < emb.cols; ++c) de.at(0, c) = sc.grad.at(i, c);
          fe.backward(de, nullptr, acaches[i]);
        }
      }

      const double batch_loss = ce.loss + con;
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrCode::non_finite_loss,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(n_batches) + " (ce=" + std::to_string(ce.loss) +
                        ", con=" + std::to_string(con) + ")");
      }
      opt.step(params);
      ep_loss += batch_loss;
      ep_ce += ce.loss;
      ep_con += con;
      ++n_batches;
    }
    log.epoch_loss.push_back(ep_loss / static_cast<double>(n_batches));
    log.epoch_ce.push_back(ep_ce / static_cast<double>(n_batches));
    log.epoch_con.push_back(ep_con / static_cast<double>(n_batches));
  }

  fe.freeze();

  std::size_t correct = 0;
  for (const auto& w : windows) {
    FeModel::Cache cache;
    const Mat e = fe.forward_embed(window_to_mat(w), cache);
    const Mat l = fe.forward_logits(e, cache);
    if (argmax_tie_low(l.data) == static_cast<std::size_t>(fe.logit_index(w.label))) ++correct;
  }
  log.final_train_accuracy = static_cast<double>(correct) / static_cast<double>(windows.size());
  return log;
}

// ---------------------------------------------------------------------------
// Artifact round-trip.
// ---------------------------------------------------------------------------

namespace detail {

inline ArtifactBlob param_blob(const std::string& name, const Param& p) {
  ArtifactBlob b;
  b.name = name;
  b.values.reserve(p.value.data.size());
  for (double v : p.value.data) b.values.push_back(static_cast<float>(v));
  return b;
}

inline void load_param(const Artifact& art, const std::string& name, Param& p) {
  const ArtifactBlob& b = art.blob(name);
  require(b.values.size() == p.value.data.size(), ErrCode::corrupt_artifact,
          "blob '" + name + "' has wrong element count");
  for (std::size_t i = 0; i < b.values.size(); ++i)
    p.value.data[i] = static_cast<double>(b.values[i]);
}

}  // namespace detail

inline void save_fe(const FeModel& fe, const std::string& path) {
  require(fe.frozen, ErrCode::invalid_config, "refusing to save an unfrozen model");
  Artifact art;
  nlohmann::json cfg;
  cfg["input_channels"] = fe.cfg.input_channels;
  cfg["window_len"] = fe.cfg.window_len;
  cfg["embedding_dim"] = fe.cfg.embedding_dim;
  cfg["conv_channels"] = fe.cfg.conv_channels;
  cfg["kernel_sizes"] = fe.cfg.kernel_sizes;
  cfg["lstm_hidden"] = fe.cfg.lstm_hidden;
  cfg["n_classes_base"] = fe.cfg.n_classes_base;
  cfg["tau"] = fe.cfg.tau;
  cfg["supcon_normalize"] = fe.cfg.supcon_normalize;
  art.descriptor["kind"] = "feature_extractor";
  art.descriptor["config"] = cfg;
  art.descriptor["class_ids"] = fe.class_ids;

  nlohmann::json layers = nlohmann::json::array();
  const std::vector<std::string> names = [&] {
    std::vector<std::string> n;
    for (std::size_t i = 0; i < fe.convs.size(); ++i) {
      n.push_back("conv" + std::to_string(i) + ".weight");
      n.push_back("conv" + std::to_string(i) + ".bias");
    }
    n.insert(n.end(), {"lstm.wx", "lstm.wh", "lstm.bias", "embed.weight", "embed.bias",
                       "head.weight", "head.bias"});
    return n;
  }();
  const std::vector<const Param*> params = fe.params();
  require(params.size() == names.size(), ErrCode::invalid_config, "parameter naming out of sync");
  for (std::size_t i = 0; i < params.size(); ++i) {
    layers.push_back({{"name", names[i]},
                      {"shape", {params[i]->value.rows, params[i]->value.cols}}});
    art.blobs.push_back(detail::param_blob(names[i], *params[i]));
  }
  art.descriptor["layers"] = layers;

  ArtifactBlob mean{"norm.mean", {}}, stdev{"norm.std", {}};
  for (double v : fe.norm.mean) mean.values.push_back(static_cast<float>(v));
  for (double v : fe.norm.stdev) stdev.values.push_back(static_cast<float>(v));
  art.blobs.push_back(std::move(mean));
  art.blobs.push_back(std::move(stdev));

  save_artifact(art, path);
}

inline FeModel load_fe(const std::string& path) {
  const Artifact art = load_artifact(path);
  require(art.descriptor.value("kind", "") == "feature_extractor", ErrCode::corrupt_artifact,
          "artifact is not a feature extractor");
  const nlohmann::json& cfg = art.descriptor.at("config");
  FeConfig fc;
  fc.input_channels = cfg.at("input_channels").get<int>();
  fc.window_len = cfg.at("window_len").get<int>();
  fc.embedding_dim = cfg.at("embedding_dim").get<int>();
  fc.conv_channels = cfg.at("conv_channels").get<std::vector<int>>();
  fc.kernel_sizes = cfg.at("kernel_sizes").get<std::vector<int>>();
  fc.lstm_hidden = cfg.at("lstm_hidden").get<int>();
  fc.n_classes_base = cfg.at("n_classes_base").get<int>();
  fc.tau = cfg.at("tau").get<double>();
  fc.supcon_normalize = cfg.at("supcon_normalize").get<bool>();

  FeModel fe = build_fe(fc);
  fe.class_ids = art.descriptor.at("class_ids").get<std::vector<int>>();
  require(fe.class_ids.size() == static_cast<std::size_t>(fc.n_classes_base),
          ErrCode::corrupt_artifact, "class id list does not match n_classes_base");

  std::vector<std::string> names;
  for (const auto& layer : art.descriptor.at("layers")) {
    names.push_back(layer.at("name").get<std::string>());
  }
  const std::vector<Param*> params = fe.params();
  require(params.size() == names.size(), ErrCode::corrupt_artifact,
          "layer list does not match architecture");
  for (std::size_t i = 0; i < params.size(); ++i)
    detail::load_param(art, names[i], *params[i]);

  const ArtifactBlob& mean = art.blob("norm.mean");
  const ArtifactBlob& stdev = art.blob("norm.std");
  fe.norm.mean.assign(mean.values.begin(), mean.values.end());
  fe.norm.stdev.assign(stdev.values.begin(), stdev.values.end());

  fe.frozen = true;
  return fe;
}

}  // namespace rocl
