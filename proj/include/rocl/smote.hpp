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
#include <numeric>
#include <random>
#include <vector>

#include "rocl/common.hpp"
#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"

namespace rocl {

struct SmoteConfig {
  int k_neighbors = 5;
  int target_per_class = 0;  // 0 means "match the largest class"
  std::uint64_t seed = 0;

  void validate() const {
    require(k_neighbors >= 1, ErrCode::invalid_config, "k_neighbors must be at least 1");
    require(target_per_class >= 0, ErrCode::invalid_config,
            "target_per_class must be nonnegative");
  }
};

/// How one synthetic window was built: out[cls][synth_idx] equals
/// base + delta * (neighbor - base) over the flattened data.
struct SmoteRecord {
  int cls = 0;
  std::size_t base_idx = 0;
  std::size_t neighbor_idx = 0;
  std::size_t synth_idx = 0;
  double delta = 0.0;
};

struct SmoteResult {
  std::map<int, std::vector<SensorWindow>> by_class;
  std::vector<SmoteRecord> records;
};

namespace detail {

inline double sq_distance(const SensorWindow& a, const SensorWindow& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s;
}

/// Indices of the k nearest same-class neighbors of `base`, nearest first,
/// ties broken by index so the ordering is total.
inline std::vector<std::size_t> k_nearest(const std::vector<SensorWindow>& cls_windows,
                                          std::size_t base, int k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(cls_windows.size() - 1);
  for (std::size_t j = 0; j < cls_windows.size(); ++j) {
    if (j == base) continue;
    dist.emplace_back(sq_distance(cls_windows[base], cls_windows[j]), j);
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
  std::vector<std::size_t> out(keep);
  for (std::size_t i = 0; i < keep; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace detail

/// Grow every class to the target count by interpolated synthetics:
/// pick a random base sample, a random one of its k nearest same-class
/// neighbors, and a factor delta uniform on (0,1]; the synthetic is
/// base + delta * (neighbor - base). Originals are kept unchanged and come
/// first in each class's list.
inline SmoteResult smote_oversample(const std::map<int, std::vector<SensorWindow>>& by_class,
                                    const SmoteConfig& cfg) {
  cfg.validate();
  require(!by_class.empty(), ErrCode::empty_input, "no classes supplied");

  std::size_t target = static_cast<std::size_t>(cfg.target_per_class);
  if (target == 0) {
    for (const auto& [cls, ws] : by_class) target = std::max(target, ws.size());
  }

  SmoteResult result;
  result.by_class = by_class;
  for (auto& [cls, ws] : result.by_class) {
    if (ws.size() >= target) continue;
    require(ws.size() >= 2, ErrCode::too_few_samples,
            "class " + std::to_string(cls) + " has fewer than 2 samples");
    for (std::size_t i = 1; i < ws.size(); ++i) {
      require(ws[i].data.size() == ws[0].data.size(), ErrCode::shape_mismatch,
              "inconsistent window shapes in class " + std::to_string(cls));
    }

    std::vector<std::vector<std::size_t>> neighbors(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i)
      neighbors[i] = detail::k_nearest(ws, i, cfg.k_neighbors);

    std::mt19937 rng(derive_seed(cfg.seed, 404, static_cast<std::uint64_t>(cls)));
    std::uniform_int_distribution<std::size_t> pick_base(0, ws.size() - 1);
    const std::size_t n_original = ws.size();
    while (ws.size() < target) {
      const std::size_t base = pick_base(rng);
      const auto& nb = neighbors[base];
      std::uniform_int_distribution<std::size_t> pick_nb(0, nb.size() - 1);
      const std::size_t neighbor = nb[pick_nb(rng)];
      const double delta = uniform_pos(rng);

      SensorWindow synth = ws[base];
      for (std::size_t i = 0; i < synth.data.size(); ++i) {
        synth.data[i] += delta * (ws[neighbor].data[i] - ws[base].data[i]);
      }
      result.records.push_back({cls, base, neighbor, ws.size(), delta});
      ws.push_back(std::move(synth));
    }
    (void)n_original;
  }
  return result;
}

/// Convenience grouping for pipeline code.
inline std::map<int, std::vector<SensorWindow>> group_by_class(
    const std::vector<SensorWindow>& windows) {
  std::map<int, std::vector<SensorWindow>> out;
  for (const auto& w : windows) out[w.label].push_back(w);
  return out;
}

inline std::vector<SensorWindow> flatten_classes(
    const std::map<int, std::vector<SensorWindow>>& by_class) {
  std::vector<SensorWindow> out;
  for (const auto& [cls, ws] : by_class) out.insert(out.end(), ws.begin(), ws.end());
  return out;
}

}  // namespace rocl
