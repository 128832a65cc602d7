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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rocl/config.hpp"
#include "rocl/loaders.hpp"
#include "rocl/metrics.hpp"
#include "rocl/replay.hpp"

namespace rocl {

// ---------------------------------------------------------------------------
// Shared pipeline front end: raw data -> cleansed windows -> scenario split.
// ---------------------------------------------------------------------------

inline std::vector<RawRecording> load_recordings(const RunConfig& cfg) {
  if (cfg.dataset == "synthetic") return synth_generate(cfg.synth_spec());
  require(!cfg.data_dir.empty(), ErrCode::invalid_config,
          "data_dir is required for dataset '" + cfg.dataset + "'");
  if (cfg.dataset == "pamap2") return load_pamap2(cfg.data_dir, cfg.pamap2_channels);
  if (cfg.dataset == "hapt") return load_hapt(cfg.data_dir);
  return load_dsads(cfg.data_dir);
}

inline std::vector<SensorWindow> make_windows(const RunConfig& cfg,
                                              const std::vector<RawRecording>& recordings) {
  std::vector<SensorWindow> windows;
  for (const RawRecording& rec : recordings) {
    const RawRecording clean = interpolate_missing(rec);
    const auto ws = segment_windows(clean, cfg.window_seconds, cfg.overlap);
    windows.insert(windows.end(), ws.begin(), ws.end());
  }
  const std::set<int> drop(cfg.drop_classes.begin(), cfg.drop_classes.end());
  windows = filter_classes(windows, drop);
  require(!windows.empty(), ErrCode::empty_input, "no windows left after class filtering");
  return windows;
}

/// Resolves the base-class and new-subject sets. Explicit config wins; with
/// no classes configured the three highest class ids stream in as new (fewer
/// if that would leave less than two base classes), and with no subjects
/// configured the upper half of the subject ids plays the "new subject" role.
inline std::pair<std::set<int>, std::set<int>> resolve_scenario(
    const RunConfig& cfg, const std::vector<SensorWindow>& windows) {
  std::set<int> all_classes, all_subjects;
  for (const auto& w : windows) {
    all_classes.insert(w.label);
    all_subjects.insert(w.subject_id);
  }

  std::set<int> base;
  if (!cfg.base_classes.empty()) {
    base.insert(cfg.base_classes.begin(), cfg.base_classes.end());
  } else if (!cfg.new_classes.empty()) {
    base = all_classes;
    for (int c : cfg.new_classes) base.erase(c);
  } else {
    require(all_classes.size() >= 3, ErrCode::degenerate_split,
            "need at least 3 classes to derive a default base/new split");
    const std::size_t n_new = std::min<std::size_t>(3, all_classes.size() - 2);
    base = all_classes;
    for (std::size_t i = 0; i < n_new; ++i) base.erase(std::prev(base.end()));
  }

  std::set<int> new_subj;
  if (!cfg.new_subjects.empty()) {
    new_subj.insert(cfg.new_subjects.begin(), cfg.new_subjects.end());
  } else {
    require(all_subjects.size() >= 2, ErrCode::degenerate_split,
            "need at least 2 subjects to derive a default subject split");
    const std::size_t n_new = all_subjects.size() / 2;
    auto it = all_subjects.end();
    for (std::size_t i = 0; i < n_new; ++i) new_subj.insert(*--it);
  }
  return {base, new_subj};
}

inline ScenarioSplit prepare_split(const RunConfig& cfg) {
  const auto recordings = load_recordings(cfg);
  const auto windows = make_windows(cfg, recordings);
  const auto [base, new_subj] = resolve_scenario(cfg, windows);
  return scenario_split(windows, base, new_subj, cfg.split_mode());
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrCode::io_error, "cannot open " + path + " for writing");
  out << content;
  require(out.good(), ErrCode::io_error, "write failed for " + path);
}

inline nlohmann::json f1_map_json(const std::map<int, double>& per_class) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [cls, f1] : per_class) j[std::to_string(cls)] = f1;
  return j;
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// pretrain: cleanse -> window -> normalize -> oversample -> augment -> train.
// ---------------------------------------------------------------------------

struct PretrainOutputs {
  std::string fe_path;
  nlohmann::json report;
};

inline PretrainOutputs cmd_pretrain(const RunConfig& cfg) {
  cfg.validate();
  const ScenarioSplit split = prepare_split(cfg);

  const Normalizer norm = fit_normalizer(split.fe_train);
  const std::vector<SensorWindow> train = normalize(split.fe_train, norm);

  const SmoteResult balanced = smote_oversample(group_by_class(train), cfg.smote_config());
  const std::vector<SensorWindow> train_balanced = flatten_classes(balanced.by_class);
  const std::vector<SensorWindow> augmented =
      augment_fourfold(train_balanced, cfg.augmentation_config());

  FeConfig fe_cfg = cfg.fe_config(static_cast<int>(train_balanced.front().channels),
                                  static_cast<int>(train_balanced.front().width),
                                  static_cast<int>(split.base_classes.size()));
  FeModel fe = build_fe(fe_cfg);
  fe.norm = norm;
  const FeTrainLog log = train_fe(fe, train_balanced, augmented);

  const std::string fe_path = detail::out_path(cfg, "fe_model.bin");
  save_fe(fe, fe_path);

  nlohmann::json report;
  report["config"] = config_to_json(cfg);
  report["artifact"] = fe_path;
  report["contrastive_enabled"] = cfg.use_contrastive;
  report["base_classes"] = std::vector<int>(split.base_classes.begin(), split.base_classes.end());
  report["new_classes"] = std::vector<int>(split.new_classes.begin(), split.new_classes.end());
  report["window_len"] = fe_cfg.window_len;
  report["input_channels"] = fe_cfg.input_channels;
  report["train_windows"] = split.fe_train.size();
  report["train_windows_balanced"] = train_balanced.size();
  report["augmented_views"] = augmented.size();
  report["synthetic_added"] = balanced.records.size();
  report["epoch_loss"] = log.epoch_loss;
  report["epoch_cross_entropy"] = log.epoch_ce;
  report["epoch_contrastive"] = log.epoch_con;
  report["final_train_accuracy"] = log.final_train_accuracy;
  report["model_checksum"] = fe.checksum();
  detail::write_text_file(detail::out_path(cfg, "pretrain_report.json"), report.dump(2) + "\n");
  return {fe_path, report};
}

// ---------------------------------------------------------------------------
// stream: plan the arrival order, seed the replay buffer, run, report.
// ---------------------------------------------------------------------------

struct StreamOutputs {
  MetricsReport report;
  nlohmann::json summary;
  std::string summary_path;
  std::string batches_path;
  std::string snapshot_path;
};

inline nlohmann::json batch_json(const BatchMetrics& bm) {
  nlohmann::json j;
  j["batch_index"] = bm.batch_index;
  j["n_unlabeled"] = bm.n_unlabeled;
  j["accuracy"] = bm.accuracy;  // null when the batch had nothing to score
  j["cumulative_accuracy"] = bm.cumulative_accuracy;
  j["retrain"] = bm.retrain;
  j["retrain_reason"] = bm.retrain_reason;
  j["retrain_seconds"] = bm.retrain_seconds;
  return j;
}

inline StreamOutputs cmd_stream(const RunConfig& cfg, const std::string& fe_path) {
  cfg.validate();
  const FeModel fe = load_fe(fe_path);

  ScenarioSplit split = prepare_split(cfg);
  split.fe_train = normalize(split.fe_train, fe.norm);
  split.rm_train_pool = normalize(split.rm_train_pool, fe.norm);
  split.test = normalize(split.test, fe.norm);

  const StreamPlan plan = make_stream_plan(split, cfg.stream_config());

  std::map<int, std::vector<EmbeddingSample>> base_embeddings;
  for (const EmbeddingSample& s : embed_all(fe, split.fe_train)) {
    base_embeddings[s.label].push_back(s);
  }
  ReplayBuffer replay = init_from_base(base_embeddings, static_cast<std::size_t>(cfg.replay_capacity),
                                       cfg.seed);

  const std::string batches_path = detail::out_path(cfg, "stream_batches.jsonl");
  std::ofstream batches_out(batches_path, std::ios::binary);
  require(batches_out.good(), ErrCode::io_error, "cannot open " + batches_path + " for writing");
  auto on_batch = [&](const BatchMetrics& bm) {
    batches_out << batch_json(bm).dump() << "\n";
    batches_out.flush();
  };

  const MetricsReport report =
      run_stream(fe, cfg.rm_config(), replay, plan, cfg.classifier_kind(), on_batch);

  const std::string snapshot_path = detail::out_path(cfg, "replay_snapshot.bin");
  snapshot_save(replay, snapshot_path);

  // Wall-clock timings stay in the per-batch log; the summary only carries
  // values that reproduce bit-for-bit under a fixed seed.
  nlohmann::json summary;
  summary["config"] = config_to_json(cfg);
  summary["fe_artifact"] = fe_path;
  summary["classifier"] = cfg.classifier;
  summary["n_batches"] = plan.batches.size();
  nlohmann::json intro = nlohmann::json::object();
  for (const auto& [cls, b] : plan.introduction_batch) intro[std::to_string(cls)] = b;
  summary["introduction_batch"] = intro;
  summary["final_accuracy"] = report.final_accuracy;
  summary["final_macro_f1"] = report.final_macro_f1;
  summary["base_macro_f1"] = report.base_macro_f1;
  summary["new_macro_f1"] = report.new_macro_f1;
  summary["per_class_f1"] = detail::f1_map_json(report.per_class_f1_map);
  nlohmann::json retrains = nlohmann::json::array();
  for (const RetrainEvent& ev : report.retrains) {
    retrains.push_back({{"batch_index", ev.batch_index}, {"reason", ev.reason}});
  }
  summary["retrains"] = retrains;
  summary["replay_snapshot_bytes"] = report.replay_snapshot_bytes;
  summary["replay_classes"] = replay.class_count();
  summary["replay_samples"] = replay.total_samples();

  const std::string summary_path = detail::out_path(cfg, "stream_summary.json");
  detail::write_text_file(summary_path, summary.dump(2) + "\n");

  std::ostringstream preds, truths;
  for (int p : report.all_preds) preds << p << "\n";
  for (int t : report.all_truths) truths << t << "\n";
  detail::write_text_file(detail::out_path(cfg, "predictions.txt"), preds.str());
  detail::write_text_file(detail::out_path(cfg, "truths.txt"), truths.str());

  return {report, summary, summary_path, batches_path, snapshot_path};
}

// ---------------------------------------------------------------------------
// eval: score a prediction file against a truth file.
// ---------------------------------------------------------------------------

inline std::vector<int> read_label_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrCode::io_error, "cannot open " + path);
  std::vector<int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const int v = std::stoi(line, &used);
      require(used == line.size(), ErrCode::malformed_input,
              path + ":" + std::to_string(lineno) + ": trailing characters");
      out.push_back(v);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(ErrCode::malformed_input,
                  path + ":" + std::to_string(lineno) + ": not an integer label");
    }
  }
  return out;
}

inline nlohmann::json cmd_eval(const std::string& pred_path, const std::string& truth_path) {
  const std::vector<int> preds = read_label_file(pred_path);
  const std::vector<int> truths = read_label_file(truth_path);
  nlohmann::json j;
  j["n"] = preds.size();
  j["accuracy"] = accuracy(preds, truths);
  j["macro_f1"] = macro_f1(preds, truths);
  const std::set<int> classes(truths.begin(), truths.end());
  j["per_class_f1"] = detail::f1_map_json(per_class_f1(preds, truths, classes));
  return j;
}

// ---------------------------------------------------------------------------
// plot-pca: 2-D projection of test-split embeddings as an SVG scatter.
// ---------------------------------------------------------------------------

inline std::string svg_color(std::size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kPalette[i % 10];
}

inline std::string pca_scatter_svg(const Mat& projected, const std::vector<int>& labels) {
  require(projected.rows == labels.size(), ErrCode::length_mismatch,
          "one label per projected row required");
  require(projected.cols >= 2, ErrCode::invalid_config, "need a 2-D projection");

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (projected.rows > 0) {
    xmin = xmax = projected.at(0, 0);
    ymin = ymax = projected.at(0, 1);
    for (std::size_t i = 1; i < projected.rows; ++i) {
      xmin = std::min(xmin, projected.at(i, 0));
      xmax = std::max(xmax, projected.at(i, 0));
      ymin = std::min(ymin, projected.at(i, 1));
      ymax = std::max(ymax, projected.at(i, 1));
    }
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

  const double W = 640.0, H = 480.0, margin = 40.0, legend_w = 110.0;
  const double plot_w = W - 2 * margin - legend_w, plot_h = H - 2 * margin;
  auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return H - margin - (y - ymin) / (ymax - ymin) * plot_h; };

  std::set<int> classes(labels.begin(), labels.end());
  std::map<int, std::size_t> color_of;
  for (int c : classes) color_of.emplace(c, color_of.size());

  std::ostringstream svg;
  svg << std::setprecision(6) << std::fixed;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << static_cast<int>(W)
      << "\" height=\"" << static_cast<int>(H) << "\" viewBox=\"0 0 " << static_cast<int>(W)
      << " " << static_cast<int>(H) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < projected.rows; ++i) {
    svg << "<circle cx=\"" << sx(projected.at(i, 0)) << "\" cy=\"" << sy(projected.at(i, 1))
        << "\" r=\"3\" fill=\"" << svg_color(color_of.at(labels[i])) << "\" fill-opacity=\"0.7\"/>\n";
  }
  double ly = margin;
  for (int c : classes) {
    const double lx = W - margin - legend_w + 10.0;
    svg << "<circle cx=\"" << lx << "\" cy=\"" << ly << "\" r=\"5\" fill=\""
        << svg_color(color_of.at(c)) << "\"/>\n";
    svg << "<text x=\"" << lx + 12.0 << "\" y=\"" << ly + 4.0
        << "\" font-family=\"sans-serif\" font-size=\"13\">class " << c << "</text>\n";
    ly += 20.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

inline std::string cmd_plot_pca(const RunConfig& cfg, const std::string& fe_path,
                                const std::string& out_file = "") {
  cfg.validate();
  const FeModel fe = load_fe(fe_path);
  ScenarioSplit split = prepare_split(cfg);
  const std::vector<SensorWindow> windows = normalize(split.test, fe.norm);

  const std::vector<EmbeddingSample> samples = embed_all(fe, windows);
  Mat emb(samples.size(), fe.cfg.embedding_dim > 0 ? static_cast<std::size_t>(fe.cfg.embedding_dim) : 0);
  std::vector<int> labels(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy(samples[i].vec.begin(), samples[i].vec.end(), emb.row(i));
    labels[i] = samples[i].label;
  }
  const PcaResult pca = pca_project(emb, 2);

  const std::string path = out_file.empty() ? detail::out_path(cfg, "embedding_pca.svg") : out_file;
  detail::write_text_file(path, pca_scatter_svg(pca.projected, labels));
  return path;
}

// ---------------------------------------------------------------------------
// synth-data: dump the generator's recordings as interchange CSV files.
// ---------------------------------------------------------------------------

inline std::vector<std::string> cmd_synth_data(const RunConfig& cfg) {
  cfg.validate();
  const auto recordings = synth_generate(cfg.synth_spec());
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const RawRecording& rec = recordings[i];
    std::ostringstream name;
    name << "synth_c" << std::setw(2) << std::setfill('0') << rec.labels.front() << "_s"
         << std::setw(2) << std::setfill('0') << rec.subject_id << ".csv";
    const std::string path = detail::out_path(cfg, name.str());
    write_recording_csv(rec, path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace rocl
