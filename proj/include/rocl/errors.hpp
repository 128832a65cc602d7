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

#include <stdexcept>
#include <string>

namespace rocl {

enum class ErrCode {
  all_missing_channel,
  window_too_long,
  empty_input,
  channel_mismatch,
  degenerate_split,
  invalid_spec,
  too_few_samples,
  bad_knots,
  invalid_config,
  shape_mismatch,
  no_positive,
  non_finite_loss,
  class_too_small,
  empty_support,
  empty_replay,
  empty_class,
  dimension_mismatch,
  corrupt_artifact,
  version_mismatch,
  insufficient_data,
  length_mismatch,
  malformed_input,
  io_error,
  unknown_key,
};

inline const char* err_name(ErrCode c) {
  switch (c) {
    case ErrCode::all_missing_channel: return "AllMissingChannel";
    case ErrCode::window_too_long: return "WindowTooLong";
    case ErrCode::empty_input: return "EmptyInput";
    case ErrCode::channel_mismatch: return "ChannelMismatch";
    case ErrCode::degenerate_split: return "DegenerateSplit";
    case ErrCode::invalid_spec: return "InvalidSpec";
    case ErrCode::too_few_samples: return "TooFewSamples";
    case ErrCode::bad_knots: return "BadKnots";
    case ErrCode::invalid_config: return "InvalidConfig";
    case ErrCode::shape_mismatch: return "ShapeMismatch";
    case ErrCode::no_positive: return "NoPositive";
    case ErrCode::non_finite_loss: return "NonFiniteLoss";
    case ErrCode::class_too_small: return "ClassTooSmall";
    case ErrCode::empty_support: return "EmptySupport";
    case ErrCode::empty_replay: return "EmptyReplay";
    case ErrCode::empty_class: return "EmptyClass";
    case ErrCode::dimension_mismatch: return "DimensionMismatch";
    case ErrCode::corrupt_artifact: return "CorruptArtifact";
    case ErrCode::version_mismatch: return "VersionMismatch";
    case ErrCode::insufficient_data: return "InsufficientData";
    case ErrCode::length_mismatch: return "LengthMismatch";
    case ErrCode::malformed_input: return "MalformedInput";
    case ErrCode::io_error: return "IoError";
    case ErrCode::unknown_key: return "UnknownKey";
  }
  return "Unknown";
}

/// Library-wide exception carrying a stable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrCode code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

  ErrCode code() const { return code_; }

 private:
  ErrCode code_;
};

inline void require(bool cond, ErrCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace rocl
