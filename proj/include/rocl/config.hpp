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

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rocl/augment.hpp"
#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"
#include "rocl/feature_extractor.hpp"
#include "rocl/relation_module.hpp"
#include "rocl/smote.hpp"
#include "rocl/streaming.hpp"
#include "rocl/synth.hpp"

namespace rocl {

/// One flat key-value config drives every command. Each field has a usable
/// default; a run on synthetic data needs no config file at all. Unknown keys
/// in a config file are rejected rather than ignored so typos cannot
/// silently fall back to defaults.
struct RunConfig {
  // Data source.
  std::string dataset = "synthetic";  // pamap2 | hapt | dsads | synthetic
  std::string data_dir;               // native dataset root (non-synthetic)
  std::string out_dir = "out";

  // Split and windowing.
  std::string scenario = "within";     // within | between
  std::vector<int> new_subjects;       // subjects forming split regions 3/4
  std::vector<int> base_classes;       // empty: every class not in new_classes
  std::vector<int> new_classes;        // classes withheld until the stream
  std::vector<int> drop_classes;       // labels removed after windowing (e.g. 0)
  std::vector<int> pamap2_channels;    // indices into the 52 sensor columns
  double window_seconds = 5.12;
  double overlap = 0.5;

  // Feature extractor.
  int embedding_dim = 128;
  std::vector<int> conv_channels = {64, 128};
  std::vector<int> conv_kernels = {5, 5};
  int lstm_hidden = 128;
  double tau = 0.1;
  double fe_lr = 1e-3;
  int fe_batch_size = 50;
  int fe_epochs = 50;
  bool use_contrastive = true;
  bool supcon_normalize = true;

  // Augmentation.
  double jitter_sigma = 0.05;
  double scale_sigma = 0.1;
  double magnitude_warp_sigma = 0.2;
  double time_warp_sigma = 0.2;
  int warp_knots = 4;

  // Oversampling.
  int smote_k = 5;
  int smote_target_per_class = 0;  // 0: match the largest class

  // Relation module and replay.
  int replay_capacity = 20;     // N
  int support_per_class = 5;    // N_s
  double lambda_l2 = 1e-3;
  double rm_lr = 1e-3;
  int rm_batch_size = 50;
  int rm_epochs = 50;
  std::string classifier = "relation";  // relation | mlp3

  // Stream plan.
  int stream_batch_size = 64;
  double base_label_fraction = 0.10;
  int labeled_per_new_class = 20;
  int intro_chunk = 6;

  // Synthetic generator (dataset == "synthetic").
  int synth_classes = 8;
  int synth_subjects = 4;
  int synth_channels = 6;
  int synth_samples_per_class = 2048;
  double synth_rate_hz = 32.0;
  double synth_noise_sigma = 0.1;
  double synth_subject_jitter = 0.03;

  std::uint64_t seed = 7;

  void validate() const {
    require(dataset == "pamap2" || dataset == "hapt" || dataset == "dsads" ||
                dataset == "synthetic",
            ErrCode::invalid_config, "dataset must be pamap2|hapt|dsads|synthetic");
    require(scenario == "within" || scenario == "between", ErrCode::invalid_config,
            "scenario must be within|between");
    require(classifier == "relation" || classifier == "mlp3", ErrCode::invalid_config,
            "classifier must be relation|mlp3");
    require(window_seconds > 0.0, ErrCode::invalid_config, "window_seconds must be positive");
    require(overlap >= 0.0 && overlap < 1.0, ErrCode::invalid_config,
            "overlap must lie in [0, 1)");
    require(replay_capacity >= 1, ErrCode::invalid_config, "replay_capacity must be positive");
    // Episodic retraining splits every class into support + at least one
    // query, so each new class must arrive with more than a support's worth
    // of samples, and the buffer must be allowed to hold that many.
    require(intro_chunk > support_per_class, ErrCode::invalid_config,
            "intro_chunk must exceed support_per_class");
    require(replay_capacity > support_per_class, ErrCode::invalid_config,
            "replay_capacity must exceed support_per_class");
    fe_config(1, 1, 2).validate();  // placeholders; real shape arrives with the data
    rm_config().validate();
    augmentation_config().validate();
    smote_config().validate();
    stream_config().validate();
  }

  FeConfig fe_config(int input_channels, int window_len, int n_classes_base) const {
    FeConfig c;
    c.input_channels = input_channels;
    c.window_len = window_len;
    c.embedding_dim = embedding_dim;
    c.conv_channels = conv_channels;
    c.kernel_sizes = conv_kernels;
    c.lstm_hidden = lstm_hidden;
    c.n_classes_base = n_classes_base;
    c.tau = tau;
    c.lr = fe_lr;
    c.batch_size = fe_batch_size;
    c.epochs = fe_epochs;
    c.use_contrastive = use_contrastive;
    c.supcon_normalize = supcon_normalize;
    c.seed = seed;
    return c;
  }

  RmConfig rm_config() const {
    RmConfig c;
    c.embedding_dim = embedding_dim;
    c.support_per_class = support_per_class;
    c.lambda_l2 = lambda_l2;
    c.lr = rm_lr;
    c.batch_size = rm_batch_size;
    c.epochs = rm_epochs;
    c.seed = seed;
    return c;
  }

  AugmentationConfig augmentation_config() const {
    AugmentationConfig c;
    c.sigma_jitter = jitter_sigma;
    c.sigma_scale = scale_sigma;
    c.sigma_mwarp = magnitude_warp_sigma;
    c.sigma_twarp = time_warp_sigma;
    c.n_knots = warp_knots;
    c.seed = seed;
    return c;
  }

  SmoteConfig smote_config() const {
    SmoteConfig c;
    c.k_neighbors = smote_k;
    c.target_per_class = smote_target_per_class;
    c.seed = seed;
    return c;
  }

  StreamPlanConfig stream_config() const {
    StreamPlanConfig c;
    c.batch_size = stream_batch_size;
    c.base_label_fraction = base_label_fraction;
    c.labeled_per_new_class = labeled_per_new_class;
    c.intro_chunk = intro_chunk;
    c.seed = seed;
    return c;
  }

  SynthSpec synth_spec() const {
    SynthSpec s;
    s.n_classes = synth_classes;
    s.n_subjects = synth_subjects;
    s.n_channels = synth_channels;
    s.samples_per_class = synth_samples_per_class;
    s.sample_rate_hz = synth_rate_hz;
    s.noise_sigma = synth_noise_sigma;
    s.subject_jitter = synth_subject_jitter;
    s.seed = seed;
    return s;
  }

  SplitMode split_mode() const {
    return scenario == "within" ? SplitMode::within_subject : SplitMode::between_subject;
  }

  ClassifierKind classifier_kind() const {
    return classifier == "relation" ? ClassifierKind::relation : ClassifierKind::mlp3;
  }
};

namespace detail {

inline std::vector<int> int_list(const nlohmann::json& v, const std::string& key) {
  require(v.is_array(), ErrCode::invalid_config, key + " must be an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    require(e.is_number_integer(), ErrCode::invalid_config,
            key + " must contain only integers");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace detail

/// Merges a parsed JSON object over the defaults. Every key is optional;
/// anything not in the schema throws UnknownKey.
inline RunConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrCode::invalid_config, "config root must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "dataset") cfg.dataset = value.get<std::string>();
      else if (key == "data_dir") cfg.data_dir = value.get<std::string>();
      else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
      else if (key == "scenario") cfg.scenario = value.get<std::string>();
      else if (key == "new_subjects") cfg.new_subjects = detail::int_list(value, key);
      else if (key == "base_classes") cfg.base_classes = detail::int_list(value, key);
      else if (key == "new_classes") cfg.new_classes = detail::int_list(value, key);
      else if (key == "drop_classes") cfg.drop_classes = detail::int_list(value, key);
      else if (key == "pamap2_channels") cfg.pamap2_channels = detail::int_list(value, key);
      else if (key == "window_seconds") cfg.window_seconds = value.get<double>();
      else if (key == "overlap") cfg.overlap = value.get<double>();
      else if (key == "embedding_dim") cfg.embedding_dim = value.get<int>();
      else if (key == "conv_channels") cfg.conv_channels = detail::int_list(value, key);
      else if (key == "conv_kernels") cfg.conv_kernels = detail::int_list(value, key);
      else if (key == "lstm_hidden") cfg.lstm_hidden = value.get<int>();
      else if (key == "tau") cfg.tau = value.get<double>();
      else if (key == "fe_lr") cfg.fe_lr = value.get<double>();
      else if (key == "fe_batch_size") cfg.fe_batch_size = value.get<int>();
      else if (key == "fe_epochs") cfg.fe_epochs = value.get<int>();
      else if (key == "use_contrastive") cfg.use_contrastive = value.get<bool>();
      else if (key == "supcon_normalize") cfg.supcon_normalize = value.get<bool>();
      else if (key == "jitter_sigma") cfg.jitter_sigma = value.get<double>();
      else if (key == "scale_sigma") cfg.scale_sigma = value.get<double>();
      else if (key == "magnitude_warp_sigma") cfg.magnitude_warp_sigma = value.get<double>();
      else if (key == "time_warp_sigma") cfg.time_warp_sigma = value.get<double>();
      else if (key == "warp_knots") cfg.warp_knots = value.get<int>();
      else if (key == "smote_k") cfg.smote_k = value.get<int>();
      else if (key == "smote_target_per_class") cfg.smote_target_per_class = value.get<int>();
      else if (key == "replay_capacity") cfg.replay_capacity = value.get<int>();
      else if (key == "support_per_class") cfg.support_per_class = value.get<int>();
      else if (key == "lambda_l2") cfg.lambda_l2 = value.get<double>();
      else if (key == "rm_lr") cfg.rm_lr = value.get<double>();
      else if (key == "rm_batch_size") cfg.rm_batch_size = value.get<int>();
      else if (key == "rm_epochs") cfg.rm_epochs = value.get<int>();
      else if (key == "classifier") cfg.classifier = value.get<std::string>();
      else if (key == "stream_batch_size") cfg.stream_batch_size = value.get<int>();
      else if (key == "base_label_fraction") cfg.base_label_fraction = value.get<double>();
      else if (key == "labeled_per_new_class") cfg.labeled_per_new_class = value.get<int>();
      else if (key == "intro_chunk") cfg.intro_chunk = value.get<int>();
      else if (key == "synth_classes") cfg.synth_classes = value.get<int>();
      else if (key == "synth_subjects") cfg.synth_subjects = value.get<int>();
      else if (key == "synth_channels") cfg.synth_channels = value.get<int>();
      else if (key == "synth_samples_per_class") cfg.synth_samples_per_class = value.get<int>();
      else if (key == "synth_rate_hz") cfg.synth_rate_hz = value.get<double>();
      else if (key == "synth_noise_sigma") cfg.synth_noise_sigma = value.get<double>();
      else if (key == "synth_subject_jitter") cfg.synth_subject_jitter = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw Error(ErrCode::unknown_key, "unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrCode::invalid_config,
                  "config key '" + key + "': " + std::string(e.what()));
    }
  }
  cfg.validate();
  return cfg;
}

/// Effective config with defaults merged; echoed into every report so a run
/// can be reproduced from its own output.
inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["dataset"] = c.dataset;
  j["data_dir"] = c.data_dir;
  j["out_dir"] = c.out_dir;
  j["scenario"] = c.scenario;
  j["new_subjects"] = c.new_subjects;
  j["base_classes"] = c.base_classes;
  j["new_classes"] = c.new_classes;
  j["drop_classes"] = c.drop_classes;
  j["pamap2_channels"] = c.pamap2_channels;
  j["window_seconds"] = c.window_seconds;
  j["overlap"] = c.overlap;
  j["embedding_dim"] = c.embedding_dim;
  j["conv_channels"] = c.conv_channels;
  j["conv_kernels"] = c.conv_kernels;
  j["lstm_hidden"] = c.lstm_hidden;
  j["tau"] = c.tau;
  j["fe_lr"] = c.fe_lr;
  j["fe_batch_size"] = c.fe_batch_size;
  j["fe_epochs"] = c.fe_epochs;
  j["use_contrastive"] = c.use_contrastive;
  j["supcon_normalize"] = c.supcon_normalize;
  j["jitter_sigma"] = c.jitter_sigma;
  j["scale_sigma"] = c.scale_sigma;
  j["magnitude_warp_sigma"] = c.magnitude_warp_sigma;
  j["time_warp_sigma"] = c.time_warp_sigma;
  j["warp_knots"] = c.warp_knots;
  j["smote_k"] = c.smote_k;
  j["smote_target_per_class"] = c.smote_target_per_class;
  j["replay_capacity"] = c.replay_capacity;
  j["support_per_class"] = c.support_per_class;
  j["lambda_l2"] = c.lambda_l2;
  j["rm_lr"] = c.rm_lr;
  j["rm_batch_size"] = c.rm_batch_size;
  j["rm_epochs"] = c.rm_epochs;
  j["classifier"] = c.classifier;
  j["stream_batch_size"] = c.stream_batch_size;
  j["base_label_fraction"] = c.base_label_fraction;
  j["labeled_per_new_class"] = c.labeled_per_new_class;
  j["intro_chunk"] = c.intro_chunk;
  j["synth_classes"] = c.synth_classes;
  j["synth_subjects"] = c.synth_subjects;
  j["synth_channels"] = c.synth_channels;
  j["synth_samples_per_class"] = c.synth_samples_per_class;
  j["synth_rate_hz"] = c.synth_rate_hz;
  j["synth_noise_sigma"] = c.synth_noise_sigma;
  j["synth_subject_jitter"] = c.synth_subject_jitter;
  j["seed"] = c.seed;
  return j;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrCode::io_error, "cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrCode::malformed_input, path + ": " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace rocl
