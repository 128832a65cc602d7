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
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"

namespace rocl {

namespace detail {

inline std::vector<double> parse_number_row(const std::string& line, char sep,
                                            const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string tok;
  while (sep == ' ' ? static_cast<bool>(ss >> tok) : static_cast<bool>(std::getline(ss, tok, sep))) {
    if (tok.empty()) continue;
    if (tok == "NaN" || tok == "nan" || tok == "NAN") {
      out.push_back(kNaN);
      continue;
    }
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw Error(ErrCode::malformed_input, where + ": bad numeric field '" + tok + "'");
    }
  }
  return out;
}

/// Recordings from different files get disjoint time bases so that arrival
/// times never collide across sources.
inline double file_time_base(std::size_t ordinal, double span_seconds) {
  return static_cast<double>(ordinal) * (span_seconds + 60.0);
}

}  // namespace detail

/// Native layout: one space-separated `subjectNNN.dat` per participant at
/// 100 Hz; column 0 is the in-file timestamp, column 1 the activity id, and
/// the remaining 52 columns are sensor channels (heart rate plus three
/// 17-column inertial units). `channel_selection` indexes into those 52
/// sensor columns; an empty selection keeps all of them.
inline std::vector<RawRecording> load_pamap2(const std::string& dir,
                                             const std::vector<int>& channel_selection = {}) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), ErrCode::io_error, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("subject", 0) == 0 && name.size() > 7 && entry.path().extension() == ".dat") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrCode::io_error, "no subject*.dat files in " + dir);

  std::vector<RawRecording> out;
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const std::string path = files[fi].string();
    std::ifstream in(path);
    require(in.good(), ErrCode::io_error, "cannot open " + path);

    const std::string stem = files[fi].stem().string();  // subjectNNN
    int subject = 0;
    try {
      subject = std::stoi(stem.substr(7));
    } catch (const std::exception&) {
      throw Error(ErrCode::malformed_input, path + ": cannot parse subject id");
    }

    RawRecording rec;
    rec.subject_id = subject;
    rec.sample_rate_hz = 100.0;
    std::vector<int> select = channel_selection;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<double> row =
          detail::parse_number_row(line, ' ', path + ":" + std::to_string(lineno));
      require(row.size() == 54, ErrCode::malformed_input,
              path + ":" + std::to_string(lineno) + ": expected 54 columns, got " +
                  std::to_string(row.size()));
      if (select.empty()) {
        select.resize(52);
        for (int c = 0; c < 52; ++c) select[static_cast<std::size_t>(c)] = c;
      }
      if (rec.n_channels == 0) rec.n_channels = select.size();
      rec.timestamps.push_back(detail::file_time_base(fi, 90000.0) + row[0]);
      rec.labels.push_back(static_cast<int>(row[1]));
      for (int c : select) {
        require(c >= 0 && c < 52, ErrCode::invalid_config,
                "channel selection index out of range");
        rec.channels.push_back(row[static_cast<std::size_t>(c) + 2]);
      }
    }
    require(rec.n_samples() >= 2, ErrCode::malformed_input, path + ": fewer than two samples");
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

/// Native layout: `RawData/acc_expNN_userNN.txt` and matching `gyro_*` files
/// holding three space-separated values per 50 Hz sample, plus `labels.txt`
/// rows of (experiment, user, activity, start, end) with 1-based inclusive
/// sample ranges. Unlabeled stretches get label 0. The six channels are
/// accelerometer x/y/z then gyroscope x/y/z.
inline std::vector<RawRecording> load_hapt(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  const fs::path raw = fs::is_directory(root / "RawData") ? root / "RawData" : root;
  const fs::path labels_path = raw / "labels.txt";
  require(fs::exists(labels_path), ErrCode::io_error, labels_path.string() + " not found");

  struct Interval {
    int activity, start, end;
  };
  std::map<std::pair<int, int>, std::vector<Interval>> intervals;  // (exp, user)
  {
    std::ifstream in(labels_path);
    require(in.good(), ErrCode::io_error, "cannot open " + labels_path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<double> row = detail::parse_number_row(
          line, ' ', labels_path.string() + ":" + std::to_string(lineno));
      require(row.size() == 5, ErrCode::malformed_input,
              labels_path.string() + ":" + std::to_string(lineno) + ": expected 5 columns");
      intervals[{static_cast<int>(row[0]), static_cast<int>(row[1])}].push_back(
          {static_cast<int>(row[2]), static_cast<int>(row[3]), static_cast<int>(row[4])});
    }
  }

  auto read_xyz = [](const fs::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrCode::io_error, "cannot open " + path.string());
    std::vector<std::array<double, 3>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<double> row =
          detail::parse_number_row(line, ' ', path.string() + ":" + std::to_string(lineno));
      require(row.size() == 3, ErrCode::malformed_input,
              path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
      rows.push_back({row[0], row[1], row[2]});
    }
    return rows;
  };

  std::vector<fs::path> acc_files;
  for (const auto& entry : fs::directory_iterator(raw)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("acc_exp", 0) == 0 && entry.path().extension() == ".txt") {
      acc_files.push_back(entry.path());
    }
  }
  std::sort(acc_files.begin(), acc_files.end());
  require(!acc_files.empty(), ErrCode::io_error, "no acc_exp*.txt files in " + raw.string());

  std::vector<RawRecording> out;
  for (std::size_t fi = 0; fi < acc_files.size(); ++fi) {
    const std::string name = acc_files[fi].filename().string();  // acc_expNN_userNN.txt
    int exp = 0, user = 0;
    try {
      exp = std::stoi(name.substr(7, name.find("_user") - 7));
      user = std::stoi(name.substr(name.find("_user") + 5));
    } catch (const std::exception&) {
      throw Error(ErrCode::malformed_input, name + ": cannot parse experiment/user ids");
    }
    const fs::path gyro_path = raw / ("gyro" + name.substr(3));
    const auto acc = read_xyz(acc_files[fi]);
    const auto gyro = read_xyz(gyro_path);
    require(acc.size() == gyro.size(), ErrCode::malformed_input,
            name + ": accelerometer and gyroscope row counts differ");
    require(acc.size() >= 2, ErrCode::malformed_input, name + ": fewer than two samples");

    RawRecording rec;
    rec.subject_id = user;
    rec.sample_rate_hz = 50.0;
    rec.n_channels = 6;
    const std::size_t T = acc.size();
    rec.labels.assign(T, 0);
    rec.timestamps.resize(T);
    rec.channels.reserve(T * 6);
    const double base =
        detail::file_time_base(fi, static_cast<double>(T) / rec.sample_rate_hz);
    for (std::size_t t = 0; t < T; ++t) {
      rec.timestamps[t] = base + static_cast<double>(t) / rec.sample_rate_hz;
      for (int c = 0; c < 3; ++c) rec.channels.push_back(acc[t][static_cast<std::size_t>(c)]);
      for (int c = 0; c < 3; ++c) rec.channels.push_back(gyro[t][static_cast<std::size_t>(c)]);
    }
    auto it = intervals.find({exp, user});
    if (it != intervals.end()) {
      for (const Interval& iv : it->second) {
        for (int s = iv.start; s <= iv.end && s >= 1; ++s) {
          if (static_cast<std::size_t>(s) <= T) rec.labels[static_cast<std::size_t>(s - 1)] = iv.activity;
        }
      }
    }
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

/// Native layout: `aNN/pN/sNN.txt`, one file per pre-segmented 5-second unit
/// of 125 comma-separated rows with 45 sensor columns at 25 Hz. Each segment
/// becomes its own single-activity recording, so windowing it at 5 s with no
/// overlap yields exactly one window per segment.
inline std::vector<RawRecording> load_dsads(const std::string& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), ErrCode::io_error, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().extension() == ".txt" &&
        entry.path().filename().string().rfind("s", 0) == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrCode::io_error, "no segment files in " + dir);

  std::vector<RawRecording> out;
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const fs::path& path = files[fi];
    // .../aNN/pN/sNN.txt
    const std::string a = path.parent_path().parent_path().filename().string();
    const std::string p = path.parent_path().filename().string();
    require(a.size() >= 2 && a[0] == 'a' && p.size() >= 2 && p[0] == 'p',
            ErrCode::malformed_input, path.string() + ": not under aNN/pN/");
    int activity = 0, subject = 0;
    try {
      activity = std::stoi(a.substr(1));
      subject = std::stoi(p.substr(1));
    } catch (const std::exception&) {
      throw Error(ErrCode::malformed_input, path.string() + ": cannot parse activity/subject");
    }

    std::ifstream in(path);
    require(in.good(), ErrCode::io_error, "cannot open " + path.string());
    RawRecording rec;
    rec.subject_id = subject;
    rec.sample_rate_hz = 25.0;
    rec.n_channels = 45;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<double> row =
          detail::parse_number_row(line, ',', path.string() + ":" + std::to_string(lineno));
      require(row.size() == 45, ErrCode::malformed_input,
              path.string() + ":" + std::to_string(lineno) + ": expected 45 columns, got " +
                  std::to_string(row.size()));
      rec.channels.insert(rec.channels.end(), row.begin(), row.end());
      rec.labels.push_back(activity);
    }
    require(rec.labels.size() == 125, ErrCode::malformed_input,
            path.string() + ": expected 125 rows, got " + std::to_string(rec.labels.size()));
    rec.timestamps.resize(rec.labels.size());
    const double base = detail::file_time_base(fi, 5.0);
    for (std::size_t t = 0; t < rec.timestamps.size(); ++t) {
      rec.timestamps[t] = base + static_cast<double>(t) / rec.sample_rate_hz;
    }
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace rocl
