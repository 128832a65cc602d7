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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rocl/dataset.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

/// Invoke the installed binary with stdout and stderr captured.
RunResult run_cli(const std::string& args) {
  static const std::string capture =
      (fs::temp_directory_path() / "rocl_cli_capture.txt").string();
  const std::string cmd = std::string(ROCL_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
#ifdef _WIN32
  r.exit_code = status;
#else
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
  std::ifstream in(capture);
  std::ostringstream os;
  os << in.rdbuf();
  r.output = os.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << content;
}

/// A synthetic run small enough that the whole pipeline finishes in seconds.
fs::path tiny_config(const fs::path& dir) {
  const nlohmann::json j = {{"dataset", "synthetic"},
                            {"scenario", "between"},
                            {"base_classes", {0, 1}},
                            {"new_subjects", {1}},
                            {"window_seconds", 1.0},
                            {"overlap", 0.5},
                            {"embedding_dim", 8},
                            {"conv_channels", {6}},
                            {"conv_kernels", {3}},
                            {"lstm_hidden", 8},
                            {"fe_epochs", 2},
                            {"fe_batch_size", 16},
                            {"warp_knots", 4},
                            {"smote_k", 3},
                            {"replay_capacity", 6},
                            {"support_per_class", 2},
                            {"rm_epochs", 3},
                            {"rm_batch_size", 16},
                            {"rm_lr", 0.01},
                            {"stream_batch_size", 8},
                            {"base_label_fraction", 0.25},
                            {"labeled_per_new_class", 4},
                            {"intro_chunk", 3},
                            {"synth_classes", 4},
                            {"synth_subjects", 2},
                            {"synth_channels", 2},
                            {"synth_samples_per_class", 160},
                            {"synth_rate_hz", 32.0},
                            {"seed", 7}};
  const fs::path path = dir / "config.json";
  write_file(path, j.dump(2));
  return path;
}

}  // namespace

TEST_CASE("the binary drives the whole pipeline from one config") {
  const fs::path work = fs::temp_directory_path() / "rocl_cli_pipeline";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cfg = tiny_config(work);
  const std::string base_args = "--config " + cfg.string() + " --out-dir " + work.string();

  SECTION("pretrain, stream, evaluate, plot") {
    const RunResult pre = run_cli("pretrain " + base_args);
    INFO(pre.output);
    REQUIRE(pre.exit_code == 0);
    CHECK(fs::exists(work / "fe_model.bin"));
    CHECK(fs::exists(work / "pretrain_report.json"));
    const nlohmann::json pre_json = nlohmann::json::parse(pre.output);
    CHECK(pre_json.at("artifact").get<std::string>() == (work / "fe_model.bin").string());
    CHECK(pre_json.at("final_train_accuracy").get<double>() >= 0.0);

    const nlohmann::json report =
        nlohmann::json::parse(read_file(work / "pretrain_report.json"));
    CHECK(report.at("base_classes") == nlohmann::json({0, 1}));
    CHECK(report.at("epoch_loss").size() == 2);

    const RunResult st = run_cli("stream " + base_args);
    INFO(st.output);
    REQUIRE(st.exit_code == 0);
    CHECK(fs::exists(work / "stream_summary.json"));
    CHECK(fs::exists(work / "stream_batches.jsonl"));
    CHECK(fs::exists(work / "replay_snapshot.bin"));
    CHECK(fs::exists(work / "predictions.txt"));
    CHECK(fs::exists(work / "truths.txt"));

    const std::string first_summary = read_file(work / "stream_summary.json");
    const nlohmann::json summary = nlohmann::json::parse(first_summary);
    CHECK(summary.at("classifier").get<std::string>() == "relation");
    CHECK(summary.at("n_batches").get<int>() >= 9);
    CHECK(summary.at("final_macro_f1").is_number());
    CHECK(summary.at("introduction_batch").size() == 2);

    // Batch lines parse one per line, indices in order.
    std::ifstream lines(work / "stream_batches.jsonl");
    std::string line;
    int expect_index = 0;
    while (std::getline(lines, line)) {
      const nlohmann::json bj = nlohmann::json::parse(line);
      CHECK(bj.at("batch_index").get<int>() == expect_index);
      ++expect_index;
    }
    CHECK(expect_index == summary.at("n_batches").get<int>());

    // The summary is a pure function of config and seed.
    const RunResult again = run_cli("stream " + base_args);
    REQUIRE(again.exit_code == 0);
    CHECK(read_file(work / "stream_summary.json") == first_summary);

    // Scoring the run's own outputs agrees with the summary.
    const RunResult ev = run_cli("eval --predictions " + (work / "predictions.txt").string() +
                                 " --truths " + (work / "truths.txt").string());
    INFO(ev.output);
    REQUIRE(ev.exit_code == 0);
    const nlohmann::json ej = nlohmann::json::parse(ev.output);
    CHECK(ej.at("macro_f1").get<double>() ==
          Catch::Approx(summary.at("final_macro_f1").get<double>()).margin(1e-9));

    // Self-evaluation of the truths is perfect by construction.
    const RunResult self = run_cli("eval --predictions " + (work / "truths.txt").string() +
                                   " --truths " + (work / "truths.txt").string());
    REQUIRE(self.exit_code == 0);
    CHECK(nlohmann::json::parse(self.output).at("accuracy").get<double>() == 1.0);

    const RunResult plot = run_cli("plot-pca " + base_args);
    INFO(plot.output);
    REQUIRE(plot.exit_code == 0);
    const std::string svg = read_file(work / "embedding_pca.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("class ") != std::string::npos);  // legend entries
  }

  fs::remove_all(work);
}

TEST_CASE("the worked scoring example round-trips through eval") {
  const fs::path work = fs::temp_directory_path() / "rocl_cli_eval";
  fs::remove_all(work);
  fs::create_directories(work);
  write_file(work / "p.txt", "0\n1\n1\n1\n");
  write_file(work / "t.txt", "0\n0\n1\n1\n");

  const RunResult ev = run_cli("eval --predictions " + (work / "p.txt").string() +
                               " --truths " + (work / "t.txt").string());
  REQUIRE(ev.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(ev.output);
  CHECK(j.at("n").get<int>() == 4);
  CHECK(j.at("accuracy").get<double>() == Catch::Approx(0.75).margin(1e-12));
  CHECK(j.at("macro_f1").get<double>() == Catch::Approx(11.0 / 15.0).margin(1e-12));

  write_file(work / "bad.txt", "0\nzebra\n");
  const RunResult bad = run_cli("eval --predictions " + (work / "bad.txt").string() +
                                " --truths " + (work / "t.txt").string());
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("MalformedInput") != std::string::npos);
  fs::remove_all(work);
}

TEST_CASE("synthetic recordings export as loadable csv files") {
  const fs::path work = fs::temp_directory_path() / "rocl_cli_synth";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cfg = tiny_config(work);

  const RunResult r =
      run_cli("synth-data --config " + cfg.string() + " --out-dir " + work.string());
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  CHECK(nlohmann::json::parse(r.output).at("files").get<int>() == 8);

  std::size_t csvs = 0;
  fs::path sample;
  for (const auto& entry : fs::directory_iterator(work)) {
    if (entry.path().extension() == ".csv") {
      ++csvs;
      sample = entry.path();
    }
  }
  CHECK(csvs == 8);  // one per (class, subject)
  const rocl::RawRecording rec = rocl::read_recording_csv(sample.string());
  CHECK(rec.n_samples() == 160);
  CHECK(rec.n_channels == 2);
  fs::remove_all(work);
}

TEST_CASE("failures come back as machine-readable error objects") {
  const fs::path work = fs::temp_directory_path() / "rocl_cli_errors";
  fs::remove_all(work);
  fs::create_directories(work);

  SECTION("unknown config key") {
    write_file(work / "bad.json", R"({"embeding_dim": 8})");
    const RunResult r = run_cli("pretrain --config " + (work / "bad.json").string());
    CHECK(r.exit_code == 1);
    const nlohmann::json j = nlohmann::json::parse(r.output);
    CHECK(j.at("error").at("code").get<std::string>() == "UnknownKey");
  }
  SECTION("dataset without a directory") {
    write_file(work / "p2.json", R"({"dataset": "pamap2"})");
    const RunResult r = run_cli("pretrain --config " + (work / "p2.json").string() +
                                " --out-dir " + work.string());
    CHECK(r.exit_code == 1);
    const nlohmann::json j = nlohmann::json::parse(r.output);
    CHECK(j.at("error").at("code").get<std::string>() == "InvalidConfig");
    CHECK(j.at("error").at("message").get<std::string>().find("data_dir") !=
          std::string::npos);
  }
  SECTION("missing subcommand is a usage error") {
    const RunResult r = run_cli("");
    CHECK(r.exit_code != 0);
  }
  SECTION("streaming before pretraining reports the absent artifact") {
    const fs::path cfg = tiny_config(work);
    const RunResult r = run_cli("stream --config " + cfg.string() + " --out-dir " +
                                (work / "empty").string());
    CHECK(r.exit_code == 1);
    const nlohmann::json j = nlohmann::json::parse(r.output);
    CHECK(j.at("error").at("code").get<std::string>() == "IoError");
  }

  fs::remove_all(work);
}
