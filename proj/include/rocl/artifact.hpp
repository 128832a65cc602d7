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

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rocl/common.hpp"
#include "rocl/errors.hpp"

namespace rocl {

/// One named float32 parameter tensor inside a model file.
struct ArtifactBlob {
  std::string name;
  std::vector<float> values;
};

/// Versioned binary model container:
///   magic "ROCLMDL1" | u32 version | u32 len + descriptor JSON (UTF-8)
///   | u32 blob count | per blob: u32 len + name, u64 count, count * f32 LE
///   | u64 FNV-1a checksum of all preceding bytes.
/// The descriptor carries the architecture (layer list with shapes) and any
/// settings a conforming reader needs to rebuild the model.
struct Artifact {
  nlohmann::json descriptor;
  std::vector<ArtifactBlob> blobs;

  static constexpr char kMagic[9] = "ROCLMDL1";
  static constexpr std::uint32_t kVersion = 1;

  const ArtifactBlob& blob(const std::string& name) const {
    for (const auto& b : blobs) {
      if (b.name == name) return b;
    }
    throw Error(ErrCode::corrupt_artifact, "missing parameter blob '" + name + "'");
  }
};

inline std::string artifact_bytes(const Artifact& art) {
  std::string out;
  out.append(Artifact::kMagic, 8);
  put_u32(out, Artifact::kVersion);
  const std::string desc = art.descriptor.dump();
  put_u32(out, static_cast<std::uint32_t>(desc.size()));
  out += desc;
  put_u32(out, static_cast<std::uint32_t>(art.blobs.size()));
  for (const auto& b : art.blobs) {
    put_u32(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put_u64(out, b.values.size());
    for (float v : b.values) put_f32(out, v);
  }
  put_u64(out, fnv1a(out.data(), out.size()));
  return out;
}

inline void save_artifact(const Artifact& art, const std::string& path) {
  const std::string bytes = artifact_bytes(art);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrCode::io_error, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrCode::io_error, "write failed for " + path);
}

inline Artifact parse_artifact(const std::string& bytes) {
  require(bytes.size() >= 8 + 4 + 8, ErrCode::corrupt_artifact, "file too short");
  require(bytes.compare(0, 8, Artifact::kMagic, 8) == 0, ErrCode::corrupt_artifact,
          "bad magic; not a model file");

  const std::size_t body_len = bytes.size() - 8;
  {
    const std::string tail_bytes = bytes.substr(body_len);
    ByteReader tail(tail_bytes);
    const std::uint64_t stored = tail.u64();
    const std::uint64_t actual = fnv1a(bytes.data(), body_len);
    require(stored == actual, ErrCode::corrupt_artifact, "checksum mismatch");
  }

  const std::string body = bytes.substr(8, body_len - 8);
  ByteReader r(body);
  const std::uint32_t version = r.u32();
  require(version == Artifact::kVersion, ErrCode::version_mismatch,
          "unsupported model file version " + std::to_string(version));

  Artifact art;
  const std::uint32_t desc_len = r.u32();
  const std::string desc = r.bytes(desc_len);
  try {
    art.descriptor = nlohmann::json::parse(desc);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrCode::corrupt_artifact, std::string("bad descriptor JSON: ") + e.what());
  }
  const std::uint32_t n_blobs = r.u32();
  art.blobs.resize(n_blobs);
  for (auto& b : art.blobs) {
    const std::uint32_t name_len = r.u32();
    b.name = r.bytes(name_len);
    const std::uint64_t count = r.u64();
    b.values.resize(count);
    for (auto& v : b.values) v = r.f32();
  }
  require(r.at_end(), ErrCode::corrupt_artifact, "trailing bytes after blobs");
  return art;
}

inline Artifact load_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrCode::io_error, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_artifact(bytes);
}

}  // namespace rocl
