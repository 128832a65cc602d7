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
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rocl/common.hpp"
#include "rocl/errors.hpp"

namespace rocl {

/// One continuous multichannel sensor recording. Channel data is stored
/// row-major [T x C]; labels and timestamps run parallel to the rows.
struct RawRecording {
  int subject_id = 0;
  double sample_rate_hz = 0.0;
  std::size_t n_channels = 0;
  std::vector<double> channels;    // [T x C]
  std::vector<int> labels;         // length T
  std::vector<double> timestamps;  // length T, strictly increasing seconds

  std::size_t n_samples() const { return labels.size(); }

  double at(std::size_t t, std::size_t c) const { return channels[t * n_channels + c]; }
  double& at(std::size_t t, std::size_t c) { return channels[t * n_channels + c]; }

  void validate() const {
    require(sample_rate_hz > 0.0, ErrCode::invalid_spec, "sample_rate_hz must be positive");
    require(channels.size() == n_samples() * n_channels, ErrCode::shape_mismatch,
            "channel matrix does not match label count");
    require(timestamps.size() == n_samples(), ErrCode::shape_mismatch,
            "timestamps do not match label count");
    for (std::size_t t = 1; t < timestamps.size(); ++t) {
      require(timestamps[t] > timestamps[t - 1], ErrCode::invalid_spec,
              "timestamps must be strictly increasing");
    }
  }
};

/// Fixed-length window cut from a recording, the unit fed to the feature
/// extractor. `data` is row-major [W x C].
struct SensorWindow {
  std::vector<double> data;  // [W x C]
  std::size_t width = 0;     // W
  std::size_t channels = 0;  // C
  int label = -1;
  int subject_id = 0;
  double timestamp = 0.0;  // window start, seconds
  double window_seconds = 0.0;

  double at(std::size_t t, std::size_t c) const { return data[t * channels + c]; }
  double& at(std::size_t t, std::size_t c) { return data[t * channels + c]; }
};

struct Normalizer {
  std::vector<double> mean;
  std::vector<double> stdev;  // floored at kStdFloor

  static constexpr double kStdFloor = 1e-8;
};

enum class SplitMode { within_subject, between_subject };

inline const char* split_mode_name(SplitMode m) {
  return m == SplitMode::within_subject ? "within_subject" : "between_subject";
}

/// Four-region layout over (class in base set?, subject in new set?):
///   region 1: base class, base subject     region 2: base class, new subject
///   region 3: new class,  base subject     region 4: new class,  new subject
struct ScenarioSplit {
  std::vector<SensorWindow> fe_train;       // region 1
  std::vector<SensorWindow> rm_train_pool;  // labeled candidates for streaming
  std::vector<SensorWindow> test;           // scored stream data
  SplitMode mode = SplitMode::within_subject;
  std::set<int> base_classes;
  std::set<int> new_classes;
  std::set<int> new_subjects;
};

/// Fill NaN gaps per channel: interior runs by linear interpolation between
/// the nearest valid neighbors, leading/trailing runs by copying the nearest
/// valid value. Finite input values pass through untouched.
inline RawRecording interpolate_missing(const RawRecording& rec) {
  RawRecording out = rec;
  const std::size_t T = rec.n_samples();
  const std::size_t C = rec.n_channels;
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<std::size_t> valid;
    for (std::size_t t = 0; t < T; ++t) {
      if (!std::isnan(rec.at(t, c))) valid.push_back(t);
    }
    require(!valid.empty(), ErrCode::all_missing_channel,
            "channel " + std::to_string(c) + " has no finite values");
    if (valid.size() == T) continue;

    for (std::size_t t = 0; t < valid.front(); ++t) out.at(t, c) = rec.at(valid.front(), c);
    for (std::size_t t = valid.back() + 1; t < T; ++t) out.at(t, c) = rec.at(valid.back(), c);
    for (std::size_t i = 0; i + 1 < valid.size(); ++i) {
      const std::size_t lo = valid[i], hi = valid[i + 1];
      if (hi == lo + 1) continue;
      const double vlo = rec.at(lo, c), vhi = rec.at(hi, c);
      for (std::size_t t = lo + 1; t < hi; ++t) {
        const double w = static_cast<double>(t - lo) / static_cast<double>(hi - lo);
        out.at(t, c) = vlo + w * (vhi - vlo);
      }
    }
  }
  return out;
}

inline std::size_t window_stride(std::size_t window_len, double overlap_fraction) {
  const double raw = static_cast<double>(window_len) * (1.0 - overlap_fraction);
  auto s = static_cast<std::size_t>(std::llround(raw));
  return std::max<std::size_t>(1, s);
}

/// Slice a cleansed recording into fixed-size windows.
///
/// Window length W = round(window_seconds * rate); stride is
/// max(1, round(W * (1 - overlap))). Each window takes the majority label of
/// its rows, ties resolving to the smallest class id.
inline std::vector<SensorWindow> segment_windows(const RawRecording& rec, double window_seconds,
                                                 double overlap_fraction) {
  require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrCode::invalid_spec,
          "overlap must lie in [0, 1)");
  rec.validate();
  const std::size_t T = rec.n_samples();
  const std::size_t C = rec.n_channels;
  const auto W = static_cast<std::size_t>(std::llround(window_seconds * rec.sample_rate_hz));
  require(W >= 1, ErrCode::invalid_spec, "window shorter than one sample");
  require(W <= T, ErrCode::window_too_long,
          "window of " + std::to_string(W) + " samples exceeds recording length " +
              std::to_string(T));
  const std::size_t stride = window_stride(W, overlap_fraction);

  std::vector<SensorWindow> out;
  out.reserve((T - W) / stride + 1);
  for (std::size_t start = 0; start + W <= T; start += stride) {
    SensorWindow w;
    w.width = W;
    w.channels = C;
    w.subject_id = rec.subject_id;
    w.timestamp = rec.timestamps[start];
    w.window_seconds = window_seconds;
    w.data.assign(rec.channels.begin() + static_cast<std::ptrdiff_t>(start * C),
                  rec.channels.begin() + static_cast<std::ptrdiff_t>((start + W) * C));

    std::map<int, std::size_t> votes;
    for (std::size_t t = 0; t < W; ++t) votes[rec.labels[start + t]]++;
    std::size_t best = 0;
    for (const auto& [cls, n] : votes) {
      if (n > best) {  // map iteration is ascending, so ties keep the smallest id
        best = n;
        w.label = cls;
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

/// Per-channel mean and population standard deviation over every row of every
/// supplied window. Constant channels get the floor value instead of zero.
inline Normalizer fit_normalizer(const std::vector<SensorWindow>& windows) {
  require(!windows.empty(), ErrCode::empty_input, "no windows supplied");
  const std::size_t C = windows.front().channels;
  std::vector<double> sum(C, 0.0), sumsq(C, 0.0);
  std::size_t n = 0;
  for (const auto& w : windows) {
    require(w.channels == C, ErrCode::channel_mismatch, "inconsistent channel counts");
    for (std::size_t t = 0; t < w.width; ++t) {
      for (std::size_t c = 0; c < C; ++c) {
        const double v = w.at(t, c);
        sum[c] += v;
        sumsq[c] += v * v;
      }
    }
    n += w.width;
  }
  Normalizer norm;
  norm.mean.resize(C);
  norm.stdev.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    norm.mean[c] = sum[c] / static_cast<double>(n);
    const double var = std::max(0.0, sumsq[c] / static_cast<double>(n) - norm.mean[c] * norm.mean[c]);
    norm.stdev[c] = std::max(Normalizer::kStdFloor, std::sqrt(var));
  }
  return norm;
}

inline std::vector<SensorWindow> normalize(const std::vector<SensorWindow>& windows,
                                           const Normalizer& norm) {
  std::vector<SensorWindow> out = windows;
  for (auto& w : out) {
    require(w.channels == norm.mean.size(), ErrCode::channel_mismatch,
            "window has " + std::to_string(w.channels) + " channels, normalizer has " +
                std::to_string(norm.mean.size()));
    for (std::size_t t = 0; t < w.width; ++t) {
      for (std::size_t c = 0; c < w.channels; ++c) {
        w.at(t, c) = (w.at(t, c) - norm.mean[c]) / norm.stdev[c];
      }
    }
  }
  return out;
}

inline int scenario_region(const SensorWindow& w, const std::set<int>& base_classes,
                           const std::set<int>& new_subjects) {
  const bool base = base_classes.count(w.label) > 0;
  const bool fresh = new_subjects.count(w.subject_id) > 0;
  if (base && !fresh) return 1;
  if (base && fresh) return 2;
  if (!base && !fresh) return 3;
  return 4;
}

/// Partition windows into the four-region layout and assemble the train /
/// adaptation / test sets for the requested evaluation mode.
inline ScenarioSplit scenario_split(const std::vector<SensorWindow>& windows,
                                    const std::set<int>& base_classes,
                                    const std::set<int>& new_subjects, SplitMode mode) {
  require(!windows.empty(), ErrCode::empty_input, "no windows supplied");
  std::set<int> all_classes, all_subjects;
  for (const auto& w : windows) {
    all_classes.insert(w.label);
    all_subjects.insert(w.subject_id);
  }
  require(!base_classes.empty(), ErrCode::degenerate_split, "base class set is empty");
  require(!new_subjects.empty(), ErrCode::degenerate_split, "new subject set is empty");
  for (int c : base_classes)
    require(all_classes.count(c) > 0, ErrCode::degenerate_split,
            "base class " + std::to_string(c) + " absent from data");
  for (int s : new_subjects)
    require(all_subjects.count(s) > 0, ErrCode::degenerate_split,
            "new subject " + std::to_string(s) + " absent from data");
  require(base_classes.size() < all_classes.size(), ErrCode::degenerate_split,
          "base classes must be a strict subset of all classes");
  require(new_subjects.size() < all_subjects.size(), ErrCode::degenerate_split,
          "new subjects must be a strict subset of all subjects");

  std::vector<SensorWindow> regions[5];
  for (const auto& w : windows) regions[scenario_region(w, base_classes, new_subjects)].push_back(w);

  ScenarioSplit split;
  split.mode = mode;
  split.base_classes = base_classes;
  split.new_subjects = new_subjects;
  for (int c : all_classes) {
    if (!base_classes.count(c)) split.new_classes.insert(c);
  }

  auto concat = [](const std::vector<SensorWindow>& a, const std::vector<SensorWindow>& b) {
    std::vector<SensorWindow> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
  };

  split.fe_train = regions[1];
  if (mode == SplitMode::within_subject) {
    split.rm_train_pool = concat(regions[2], regions[4]);
    split.test = concat(regions[2], regions[4]);
    require(!regions[1].empty() && !regions[2].empty() && !regions[4].empty(),
            ErrCode::degenerate_split, "a region required by within_subject mode is empty");
  } else {
    split.rm_train_pool = concat(regions[1], regions[3]);
    split.test = concat(regions[2], regions[4]);
    require(!regions[1].empty() && !regions[2].empty() && !regions[3].empty() &&
                !regions[4].empty(),
            ErrCode::degenerate_split, "a region required by between_subject mode is empty");
  }
  return split;
}

// ---------------------------------------------------------------------------
// CSV interchange: one recording per file, header
// subject_id,timestamp,label,ch_0,...,ch_{C-1}; missing values spelled NaN.
// ---------------------------------------------------------------------------

inline void write_recording_csv(const RawRecording& rec, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrCode::io_error, "cannot open " + path + " for writing");
  out << "subject_id,timestamp,label";
  for (std::size_t c = 0; c < rec.n_channels; ++c) out << ",ch_" << c;
  out << "\n";
  out.precision(17);
  for (std::size_t t = 0; t < rec.n_samples(); ++t) {
    out << rec.subject_id << ',' << rec.timestamps[t] << ',' << rec.labels[t];
    for (std::size_t c = 0; c < rec.n_channels; ++c) {
      const double v = rec.at(t, c);
      if (std::isnan(v)) {
        out << ",NaN";
      } else {
        out << ',' << v;
      }
    }
    out << "\n";
  }
  require(out.good(), ErrCode::io_error, "write failed for " + path);
}

inline double parse_csv_value(const std::string& tok, const std::string& path, std::size_t line) {
  if (tok == "NaN" || tok == "nan" || tok == "NAN") return kNaN;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw Error(ErrCode::malformed_input,
                path + ":" + std::to_string(line) + ": bad numeric field '" + tok + "'");
  }
  require(used == tok.size(), ErrCode::malformed_input,
          path + ":" + std::to_string(line) + ": trailing junk in field '" + tok + "'");
  return v;
}

/// Read one interchange-format CSV. The sample rate is recovered from the
/// median timestamp delta since the format does not carry it explicitly.
inline RawRecording read_recording_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrCode::io_error, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrCode::malformed_input,
          path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  require(header.size() >= 4 && header[0] == "subject_id" && header[1] == "timestamp" &&
              header[2] == "label",
          ErrCode::malformed_input, path + ": unexpected header");
  const std::size_t C = header.size() - 3;

  RawRecording rec;
  rec.n_channels = C;
  std::size_t lineno = 1;
  bool have_subject = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> fields;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    require(fields.size() == C + 3, ErrCode::malformed_input,
            path + ":" + std::to_string(lineno) + ": expected " + std::to_string(C + 3) +
                " fields, got " + std::to_string(fields.size()));
    const int subject = static_cast<int>(parse_csv_value(fields[0], path, lineno));
    if (!have_subject) {
      rec.subject_id = subject;
      have_subject = true;
    } else {
      require(subject == rec.subject_id, ErrCode::malformed_input,
              path + ":" + std::to_string(lineno) + ": mixed subject ids in one recording");
    }
    rec.timestamps.push_back(parse_csv_value(fields[1], path, lineno));
    rec.labels.push_back(static_cast<int>(parse_csv_value(fields[2], path, lineno)));
    for (std::size_t c = 0; c < C; ++c)
      rec.channels.push_back(parse_csv_value(fields[3 + c], path, lineno));
  }
  require(rec.n_samples() >= 2, ErrCode::malformed_input, path + ": fewer than two samples");

  std::vector<double> deltas(rec.n_samples() - 1);
  for (std::size_t t = 0; t + 1 < rec.n_samples(); ++t)
    deltas[t] = rec.timestamps[t + 1] - rec.timestamps[t];
  std::nth_element(deltas.begin(), deltas.begin() + static_cast<std::ptrdiff_t>(deltas.size() / 2),
                   deltas.end());
  const double dt = deltas[deltas.size() / 2];
  require(dt > 0.0, ErrCode::malformed_input, path + ": timestamps not increasing");
  rec.sample_rate_hz = 1.0 / dt;
  rec.validate();
  return rec;
}

/// Drop windows whose label is in the given set (e.g. transient activities or
/// classes excluded from an experiment).
inline std::vector<SensorWindow> filter_classes(const std::vector<SensorWindow>& windows,
                                                const std::set<int>& drop) {
  if (drop.empty()) return windows;
  std::vector<SensorWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    if (!drop.count(w.label)) out.push_back(w);
  }
  return out;
}

}  // namespace rocl
