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
#include <random>
#include <string>
#include <vector>

#include "rocl/common.hpp"
#include "rocl/errors.hpp"
#include "rocl/feature_extractor.hpp"

namespace rocl {

/// Timestamp sparsity of one class's buffer: the sum over samples of the
/// distance to their nearest (in time) other sample. Larger means the kept
/// samples cover a wider stretch of the stream. Each sample's term is found
/// through a sorted copy, but the terms are accumulated in input order so the
/// result is bit-identical to the naive all-pairs double loop.
inline double d_m(const std::vector<double>& timestamps) {
  const std::size_t n = timestamps.size();
  if (n < 2) return 0.0;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return timestamps[a] < timestamps[b]; });
  std::vector<double> nearest(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double here = timestamps[order[p]];
    double best = kNaN;
    if (p > 0) best = here - timestamps[order[p - 1]];
    if (p + 1 < n) {
      const double right = timestamps[order[p + 1]] - here;
      best = std::isnan(best) ? right : std::min(best, right);
    }
    nearest[order[p]] = best;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += nearest[k];
  return total;
}

struct ReplayUpdateReport {
  std::size_t inserted = 0;
  std::size_t replaced = 0;
  std::size_t rejected = 0;
  std::vector<int> new_classes;
};

struct RetrainDecision {
  bool retrain = false;
  std::string reason;  // "new_class", "replacement_threshold", or empty
};

/// Bounded per-class store of embeddings, kept timestamp-sparse. Embedding
/// vectors are rounded to float32 on entry, matching the snapshot wire format
/// so a saved and reloaded buffer is indistinguishable from the original.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity_per_class = 20) : capacity_(capacity_per_class) {
    require(capacity_ >= 1, ErrCode::invalid_config, "capacity must be at least 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t embedding_dim() const { return dim_; }
  bool new_class_flag() const { return new_class_flag_; }
  const std::map<int, std::vector<EmbeddingSample>>& store() const { return store_; }
  const std::map<int, std::uint32_t>& replaced_since_retrain() const { return replaced_; }

  std::vector<int> known_classes() const {
    std::vector<int> out;
    out.reserve(store_.size());
    for (const auto& [cls, samples] : store_) out.push_back(cls);
    return out;
  }

  std::size_t class_count() const { return store_.size(); }

  std::size_t total_samples() const {
    std::size_t n = 0;
    for (const auto& [cls, samples] : store_) n += samples.size();
    return n;
  }

  std::vector<double> class_timestamps(int cls) const {
    std::vector<double> out;
    auto it = store_.find(cls);
    if (it == store_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& s : it->second) out.push_back(s.timestamp);
    return out;
  }

  ReplayUpdateReport update(const std::vector<EmbeddingSample>& incoming) {
    ReplayUpdateReport report;
    for (const auto& raw : incoming) {
      EmbeddingSample s = raw;
      require(std::isfinite(s.timestamp), ErrCode::invalid_spec, "non-finite timestamp");
      check_dim(s);
      for (double& v : s.vec) v = to_f32(v);

      auto it = store_.find(raw.label);
      if (it == store_.end()) {
        store_[raw.label].push_back(std::move(s));
        replaced_[raw.label] = 0;
        new_class_flag_ = true;
        report.new_classes.push_back(raw.label);
        ++report.inserted;
        continue;
      }
      std::vector<EmbeddingSample>& samples = it->second;
      if (samples.size() < capacity_) {
        samples.push_back(std::move(s));
        ++report.inserted;
        continue;
      }

      // Full class: find the single eviction that maximizes sparsity, and
      // apply it only on strict improvement. Ties evict the oldest sample.
      std::vector<double> ts;
      ts.reserve(samples.size());
      for (const auto& e : samples) ts.push_back(e.timestamp);
      const double current = d_m(ts);

      double best_val = -1.0;
      double best_evict_time = 0.0;
      std::size_t best_idx = samples.size();
      for (std::size_t e = 0; e < samples.size(); ++e) {
        std::vector<double> cand = ts;
        cand[e] = s.timestamp;
        const double val = d_m(cand);
        if (best_idx == samples.size() || val > best_val ||
            (val == best_val && ts[e] < best_evict_time)) {
          best_val = val;
          best_idx = e;
          best_evict_time = ts[e];
        }
      }
      if (best_val > current) {
        samples[best_idx] = std::move(s);
        replaced_[raw.label] += 1;
        ++report.replaced;
      } else {
        ++report.rejected;
      }
    }
    return report;
  }

  /// Retrain is due when a class unseen at the last retrain has arrived, or
  /// some class has had at least ceil(N/4) of its slots replaced.
  RetrainDecision should_retrain() const {
    RetrainDecision d;
    if (new_class_flag_) {
      d.retrain = true;
      d.reason = "new_class";
      return d;
    }
    const auto threshold =
        static_cast<std::uint32_t>((capacity_ + 3) / 4);  // ceil(N/4)
    for (const auto& [cls, count] : replaced_) {
      if (count >= threshold) {
        d.retrain = true;
        d.reason = "replacement_threshold";
        return d;
      }
    }
    return d;
  }

  void reset_trigger() {
    for (auto& [cls, count] : replaced_) count = 0;
    new_class_flag_ = false;
  }

  /// Restore internal state wholesale; only the snapshot loader uses this.
  void restore(std::size_t dim, bool flag, std::map<int, std::vector<EmbeddingSample>> store,
               std::map<int, std::uint32_t> replaced) {
    dim_ = dim;
    new_class_flag_ = flag;
    store_ = std::move(store);
    replaced_ = std::move(replaced);
  }

 private:
  void check_dim(const EmbeddingSample& s) {
    require(!s.vec.empty(), ErrCode::dimension_mismatch, "empty embedding");
    if (dim_ == 0) dim_ = s.vec.size();
    require(s.vec.size() == dim_, ErrCode::dimension_mismatch,
            "embedding width " + std::to_string(s.vec.size()) + " does not match buffer width " +
                std::to_string(dim_));
  }

  std::size_t capacity_;
  std::size_t dim_ = 0;
  bool new_class_flag_ = false;
  std::map<int, std::vector<EmbeddingSample>> store_;
  std::map<int, std::uint32_t> replaced_;
};

/// Seed the buffer before streaming: a uniform random subset of min(N, all)
/// embeddings per base class, counters zeroed.
inline ReplayBuffer init_from_base(const std::map<int, std::vector<EmbeddingSample>>& by_class,
                                   std::size_t capacity, std::uint64_t seed) {
  require(!by_class.empty(), ErrCode::empty_input, "no base classes supplied");
  ReplayBuffer buf(capacity);
  std::map<int, std::vector<EmbeddingSample>> store;
  std::map<int, std::uint32_t> replaced;
  std::size_t dim = 0;
  for (const auto& [cls, samples] : by_class) {
    require(!samples.empty(), ErrCode::empty_class,
            "class " + std::to_string(cls) + " supplies no embeddings");
    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937 rng(derive_seed(seed, 606, static_cast<std::uint64_t>(cls)));
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t keep = std::min(capacity, samples.size());
    for (std::size_t i = 0; i < keep; ++i) {
      EmbeddingSample s = samples[idx[i]];
      require(!s.vec.empty(), ErrCode::dimension_mismatch, "empty embedding");
      if (dim == 0) dim = s.vec.size();
      require(s.vec.size() == dim, ErrCode::dimension_mismatch, "inconsistent embedding widths");
      for (double& v : s.vec) v = to_f32(v);
      s.label = cls;
      store[cls].push_back(std::move(s));
    }
    replaced[cls] = 0;
  }
  buf.restore(dim, false, std::move(store), std::move(replaced));
  return buf;
}

// ---------------------------------------------------------------------------
// Snapshot file: magic "ROCLRPL1" | u32 version | u32 embedding_dim | u32 N
// | u8 new-class flag | u32 class count | per class (ascending id):
// i32 class id, u32 replaced counter, u32 sample count, then per sample
// embedding_dim * f32 LE followed by the f64 LE timestamp.
// ---------------------------------------------------------------------------

inline std::string snapshot_bytes(const ReplayBuffer& buf) {
  std::string out;
  out.append("ROCLRPL1", 8);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.embedding_dim()));
  put_u32(out, static_cast<std::uint32_t>(buf.capacity()));
  out.push_back(buf.new_class_flag() ? '\x01' : '\x00');
  put_u32(out, static_cast<std::uint32_t>(buf.store().size()));
  for (const auto& [cls, samples] : buf.store()) {
    put_u32(out, static_cast<std::uint32_t>(cls));
    put_u32(out, buf.replaced_since_retrain().at(cls));
    put_u32(out, static_cast<std::uint32_t>(samples.size()));
    for (const auto& s : samples) {
      for (double v : s.vec) put_f32(out, static_cast<float>(v));
      put_f64(out, s.timestamp);
    }
  }
  return out;
}

inline void snapshot_save(const ReplayBuffer& buf, const std::string& path) {
  const std::string bytes = snapshot_bytes(buf);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrCode::io_error, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrCode::io_error, "write failed for " + path);
}

inline ReplayBuffer snapshot_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrCode::io_error, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() >= 8 && bytes.compare(0, 8, "ROCLRPL1") == 0, ErrCode::corrupt_artifact,
          "bad magic; not a replay snapshot");
  const std::string body = bytes.substr(8);
  ByteReader r(body);
  const std::uint32_t version = r.u32();
  require(version == 1, ErrCode::version_mismatch,
          "unsupported snapshot version " + std::to_string(version));
  const std::uint32_t dim = r.u32();
  const std::uint32_t capacity = r.u32();
  const std::string flag_byte = r.bytes(1);
  const bool flag = flag_byte[0] != '\x00';
  const std::uint32_t n_classes = r.u32();

  std::map<int, std::vector<EmbeddingSample>> store;
  std::map<int, std::uint32_t> replaced;
  for (std::uint32_t ci = 0; ci < n_classes; ++ci) {
    const int cls = static_cast<std::int32_t>(r.u32());
    const std::uint32_t rep = r.u32();
    const std::uint32_t count = r.u32();
    require(count <= capacity, ErrCode::corrupt_artifact, "class exceeds declared capacity");
    std::vector<EmbeddingSample> samples(count);
    for (auto& s : samples) {
      s.label = cls;
      s.vec.resize(dim);
      for (auto& v : s.vec) v = static_cast<double>(r.f32());
      s.timestamp = r.f64();
    }
    store[cls] = std::move(samples);
    replaced[cls] = rep;
  }
  require(r.at_end(), ErrCode::corrupt_artifact, "trailing bytes after class records");

  ReplayBuffer buf(capacity);
  buf.restore(dim, flag, std::move(store), std::move(replaced));
  return buf;
}

}  // namespace rocl
