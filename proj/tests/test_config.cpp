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

#include <filesystem>
#include <fstream>

#include "rocl/config.hpp"

using namespace rocl;

TEST_CASE("defaults form a valid runnable configuration") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.dataset == "synthetic");
  CHECK(cfg.split_mode() == SplitMode::within_subject);
  CHECK(cfg.classifier_kind() == ClassifierKind::relation);

  const FeConfig fc = cfg.fe_config(6, 512, 5);
  CHECK(fc.embedding_dim == 128);
  CHECK(fc.conv_channels == std::vector<int>{64, 128});
  CHECK(fc.tau == 0.1);

  const RmConfig rc = cfg.rm_config();
  CHECK(rc.support_per_class == 5);
  CHECK(rc.lambda_l2 == 1e-3);

  const SynthSpec spec = cfg.synth_spec();
  CHECK(spec.n_classes == 8);
  CHECK(spec.samples_per_class == 2048);
}

TEST_CASE("json round trip preserves every setting") {
  RunConfig cfg;
  cfg.dataset = "pamap2";
  cfg.data_dir = "/data/p2";
  cfg.out_dir = "results";
  cfg.scenario = "between";
  cfg.new_subjects = {5, 6};
  cfg.base_classes = {1, 2, 3};
  cfg.new_classes = {4, 12};
  cfg.drop_classes = {0};
  cfg.pamap2_channels = {3, 4, 5};
  cfg.window_seconds = 2.56;
  cfg.overlap = 0.25;
  cfg.embedding_dim = 32;
  cfg.conv_channels = {16};
  cfg.conv_kernels = {3};
  cfg.lstm_hidden = 24;
  cfg.tau = 0.2;
  cfg.fe_lr = 5e-4;
  cfg.fe_batch_size = 16;
  cfg.fe_epochs = 7;
  cfg.use_contrastive = false;
  cfg.supcon_normalize = false;
  cfg.jitter_sigma = 0.01;
  cfg.scale_sigma = 0.02;
  cfg.magnitude_warp_sigma = 0.03;
  cfg.time_warp_sigma = 0.04;
  cfg.warp_knots = 6;
  cfg.smote_k = 3;
  cfg.smote_target_per_class = 40;
  cfg.replay_capacity = 12;
  cfg.support_per_class = 4;
  cfg.lambda_l2 = 2e-3;
  cfg.rm_lr = 2e-3;
  cfg.rm_batch_size = 20;
  cfg.rm_epochs = 9;
  cfg.classifier = "mlp3";
  cfg.stream_batch_size = 32;
  cfg.base_label_fraction = 0.2;
  cfg.labeled_per_new_class = 10;
  cfg.intro_chunk = 5;  // must stay above support_per_class
  cfg.synth_classes = 5;
  cfg.synth_subjects = 3;
  cfg.synth_channels = 4;
  cfg.synth_samples_per_class = 256;
  cfg.synth_rate_hz = 16.0;
  cfg.synth_noise_sigma = 0.07;
  cfg.synth_subject_jitter = 0.01;
  cfg.seed = 99;

  const RunConfig back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.dataset == "pamap2");
  CHECK(back.new_subjects == std::vector<int>{5, 6});
  CHECK(back.pamap2_channels == std::vector<int>{3, 4, 5});
  CHECK(back.use_contrastive == false);
  CHECK(back.seed == 99);
  CHECK(back.split_mode() == SplitMode::between_subject);
  CHECK(back.classifier_kind() == ClassifierKind::mlp3);
}

TEST_CASE("partial json overrides only the named keys") {
  const nlohmann::json j = {{"embedding_dim", 64}, {"fe_epochs", 3}};
  const RunConfig cfg = config_from_json(j);
  CHECK(cfg.embedding_dim == 64);
  CHECK(cfg.fe_epochs == 3);
  CHECK(cfg.dataset == "synthetic");  // untouched default
  CHECK(cfg.lstm_hidden == 128);
}

TEST_CASE("unknown keys are refused by name") {
  const nlohmann::json j = {{"embeding_dim", 64}};  // typo
  CHECK_THROWS_MATCHES(config_from_json(j), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::unknown_key;
                       }));
}

TEST_CASE("type mismatches surface as config errors") {
  CHECK_THROWS_MATCHES(config_from_json({{"embedding_dim", "big"}}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::invalid_config;
                       }));
  CHECK_THROWS_AS(config_from_json({{"new_subjects", 5}}), Error);
  CHECK_THROWS_AS(config_from_json({{"use_contrastive", "yes"}}), Error);
}

TEST_CASE("semantic validation rejects out-of-range settings") {
  auto expect_invalid = [](RunConfig cfg) {
    CHECK_THROWS_MATCHES(cfg.validate(), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrCode::invalid_config;
                         }));
  };
  RunConfig cfg;
  cfg.dataset = "mnist";
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.scenario = "sideways";
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.classifier = "svm";
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.overlap = 1.0;
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.tau = 0.0;
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.conv_channels = {16, 32};
  cfg.conv_kernels = {5};  // length mismatch
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.intro_chunk = 25;  // above labeled_per_new_class
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.intro_chunk = cfg.support_per_class;  // a new class could never retrain
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.replay_capacity = cfg.support_per_class;  // no room for support + query
  expect_invalid(cfg);

  cfg = RunConfig{};
  cfg.replay_capacity = 0;
  expect_invalid(cfg);
}

TEST_CASE("config files load, and bad paths or syntax are reported") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "rocl_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"dataset": "synthetic", "synth_classes": 4, "seed": 21})";
  }
  const RunConfig cfg = load_config_file(path.string());
  CHECK(cfg.synth_classes == 4);
  CHECK(cfg.seed == 21);
  fs::remove(path);

  CHECK_THROWS_MATCHES(load_config_file((fs::temp_directory_path() / "absent.json").string()),
                       Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::io_error;
                       }));

  {
    std::ofstream out(path);
    out << "{not json";
  }
  // Unparseable text is malformed input; invalid_config is for valid JSON
  // with bad contents.
  CHECK_THROWS_MATCHES(load_config_file(path.string()), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::malformed_input;
                       }));
  fs::remove(path);
}

TEST_CASE("derived sub-configurations inherit the shared seed") {
  RunConfig cfg;
  cfg.seed = 4242;
  CHECK(cfg.fe_config(2, 32, 3).seed == 4242);
  CHECK(cfg.rm_config().seed == 4242);
  CHECK(cfg.augmentation_config().seed == 4242);
  CHECK(cfg.smote_config().seed == 4242);
  CHECK(cfg.stream_config().seed == 4242);
  CHECK(cfg.synth_spec().seed == 4242);
}
