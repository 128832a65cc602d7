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

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rocl/commands.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool out_dir_set = false;
};

rocl::RunConfig effective_config(const GlobalOpts& g) {
  rocl::RunConfig cfg =
      g.config_path.empty() ? rocl::RunConfig{} : rocl::load_config_file(g.config_path);
  if (g.seed_set) cfg.seed = g.seed;
  if (g.out_dir_set) cfg.out_dir = g.out_dir;
  return cfg;
}

void print_error_json(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cout << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming activity recognition with replay-based continual learning"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON run configuration file");
  app.add_option("--seed", g.seed, "override the config seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_option("--out-dir", g.out_dir, "override the config output directory")
      ->each([&](const std::string&) { g.out_dir_set = true; });

  auto* pretrain = app.add_subcommand(
      "pretrain", "train and save the feature extractor from the base-class split");

  std::string fe_path;
  auto* stream = app.add_subcommand(
      "stream", "run the continual-learning stream against a saved feature extractor");
  stream->add_option("--fe", fe_path, "feature extractor artifact (default <out-dir>/fe_model.bin)");

  std::string pred_path, truth_path;
  auto* eval = app.add_subcommand("eval", "score a prediction file against a truth file");
  eval->add_option("--predictions", pred_path, "one predicted label per line")->required();
  eval->add_option("--truths", truth_path, "one true label per line")->required();

  std::string plot_out;
  auto* plot = app.add_subcommand("plot-pca", "scatter plot of test-split embeddings in 2-D");
  plot->add_option("--fe", fe_path, "feature extractor artifact (default <out-dir>/fe_model.bin)");
  plot->add_option("--out", plot_out, "output SVG path (default <out-dir>/embedding_pca.svg)");

  auto* synth = app.add_subcommand("synth-data", "write the synthetic dataset as CSV files");

  // Let `rocl_cli <cmd> --config ...` reach the app-level options.
  for (CLI::App* sub : {pretrain, stream, eval, plot, synth}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    print_error_json("cli", e.what());
    return e.get_exit_code();
  }

  try {
    if (pretrain->parsed()) {
      const rocl::RunConfig cfg = effective_config(g);
      const rocl::PretrainOutputs out = rocl::cmd_pretrain(cfg);
      nlohmann::json j;
      j["artifact"] = out.fe_path;
      j["final_train_accuracy"] = out.report["final_train_accuracy"];
      std::cout << j.dump() << std::endl;
    } else if (stream->parsed()) {
      const rocl::RunConfig cfg = effective_config(g);
      const std::string fe = fe_path.empty() ? rocl::detail::out_path(cfg, "fe_model.bin") : fe_path;
      const rocl::StreamOutputs out = rocl::cmd_stream(cfg, fe);
      nlohmann::json j;
      j["summary"] = out.summary_path;
      j["batches"] = out.batches_path;
      j["snapshot"] = out.snapshot_path;
      j["final_macro_f1"] = out.report.final_macro_f1;
      std::cout << j.dump() << std::endl;
    } else if (eval->parsed()) {
      std::cout << rocl::cmd_eval(pred_path, truth_path).dump() << std::endl;
    } else if (plot->parsed()) {
      const rocl::RunConfig cfg = effective_config(g);
      const std::string fe = fe_path.empty() ? rocl::detail::out_path(cfg, "fe_model.bin") : fe_path;
      const std::string path = rocl::cmd_plot_pca(cfg, fe, plot_out);
      nlohmann::json j;
      j["plot"] = path;
      std::cout << j.dump() << std::endl;
    } else if (synth->parsed()) {
      const rocl::RunConfig cfg = effective_config(g);
      const auto paths = rocl::cmd_synth_data(cfg);
      nlohmann::json j;
      j["files"] = paths.size();
      j["out_dir"] = cfg.out_dir;
      std::cout << j.dump() << std::endl;
    }
  } catch (const rocl::Error& e) {
    print_error_json(rocl::err_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error_json("internal", e.what());
    return 1;
  }
  return 0;
}
