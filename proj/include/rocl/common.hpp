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
#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <limits>
#include <random>
#include <vector>

#include "rocl/errors.hpp"

namespace rocl {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// splitmix64 step, used to derive independent child seeds from one master
/// seed plus a stream index.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint32_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return static_cast<std::uint32_t>(h & 0xffffffffu);
}

inline double gauss(std::mt19937& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(rng);
}

/// Uniform on (0, 1]: the open-at-zero side matters when the draw is used as
/// an interpolation weight that must be able to reach the far endpoint.
inline double uniform_pos(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return 1.0 - d(rng);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out[n - 1] = hi;
  return out;
}

/// Index of the maximum element; ties resolve to the smallest index.
inline std::size_t argmax_tie_low(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Little-endian binary helpers for the artifact and snapshot formats.
inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& buf, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(buf, bits);
}

inline void put_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(buf, bits);
}

/// Cursor over a byte buffer; every read is bounds-checked so that truncated
/// files surface as CorruptArtifact instead of undefined behavior.
class ByteReader {
 public:
  explicit ByteReader(const std::string& buf) : buf_(buf) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf_[pos_ + i]);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf_[pos_ + i]);
    pos_ += 8;
    return v;
  }

  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == buf_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= buf_.size(), ErrCode::corrupt_artifact, "unexpected end of file");
  }

  const std::string& buf_;
  std::size_t pos_ = 0;
};

inline std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& data) { return fnv1a(data.data(), data.size()); }

/// Round to the nearest float32-representable value. Frozen models are stored
/// as float32; rounding at freeze time makes serialized and in-memory
/// parameters identical.
inline double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace rocl
