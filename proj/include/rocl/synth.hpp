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
#include <random>
#include <vector>

#include "rocl/common.hpp"
#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"

namespace rocl {

/// Parameters for the desk-scale synthetic activity generator. Each class is
/// a distinct two-harmonic waveform family; subjects after the first shift
/// every frequency by `subject_jitter` per subject index, giving a controlled
/// domain gap between "seen" and "new" wearers.
struct SynthSpec {
  int n_classes = 8;
  int n_subjects = 4;
  int n_channels = 6;
  int samples_per_class = 2048;  // per (class, subject) recording
  double sample_rate_hz = 32.0;
  double noise_sigma = 0.1;
  double subject_jitter = 0.03;
  std::uint64_t seed = 0;
};

namespace detail {

struct WaveParams {
  double a1, phase1, a2, phase2;
};

/// Drawn from a generator keyed on (seed, class, channel) only, so class
/// shapes are identical across subjects and independent of the noise stream.
inline WaveParams wave_params(const SynthSpec& spec, int cls, int ch) {
  std::mt19937 rng(derive_seed(spec.seed, 101, static_cast<std::uint64_t>(cls),
                               static_cast<std::uint64_t>(ch)));
  std::uniform_real_distribution<double> amp1(0.6, 1.4);
  std::uniform_real_distribution<double> amp2(0.2, 0.6);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
  WaveParams p;
  p.a1 = amp1(rng);
  p.phase1 = phase(rng);
  p.a2 = amp2(rng);
  p.phase2 = phase(rng);
  return p;
}

}  // namespace detail

/// Base frequency of class 0; chosen so its period is exactly 32 samples,
/// which keeps the zero-noise waveform checkable by pure phase arithmetic.
inline double synth_base_frequency(const SynthSpec& spec) { return spec.sample_rate_hz / 32.0; }

inline double synth_class_frequency(const SynthSpec& spec, int cls) {
  return synth_base_frequency(spec) * (1.0 + 0.5 * cls);
}

/// Generate one single-activity recording per (class, subject) pair, ordered
/// class-major. Recordings get disjoint, globally increasing timestamp ranges
/// so embeddings drawn from different recordings never collide in time.
inline std::vector<RawRecording> synth_generate(const SynthSpec& spec) {
  require(spec.n_classes >= 2, ErrCode::invalid_spec, "need at least 2 classes");
  require(spec.n_subjects >= 1, ErrCode::invalid_spec, "need at least 1 subject");
  require(spec.n_channels >= 1, ErrCode::invalid_spec, "need at least 1 channel");
  require(spec.samples_per_class >= 2, ErrCode::invalid_spec, "need at least 2 samples per class");
  require(spec.sample_rate_hz > 0.0, ErrCode::invalid_spec, "sample rate must be positive");
  require(spec.noise_sigma >= 0.0, ErrCode::invalid_spec, "noise sigma must be nonnegative");

  const auto T = static_cast<std::size_t>(spec.samples_per_class);
  const auto C = static_cast<std::size_t>(spec.n_channels);
  const double span_seconds = static_cast<double>(T) / spec.sample_rate_hz + 1.0;

  std::vector<RawRecording> out;
  out.reserve(static_cast<std::size_t>(spec.n_classes * spec.n_subjects));
  for (int cls = 0; cls < spec.n_classes; ++cls) {
    const double f = synth_class_frequency(spec, cls);
    std::vector<detail::WaveParams> params;
    params.reserve(C);
    for (int ch = 0; ch < spec.n_channels; ++ch) params.push_back(detail::wave_params(spec, cls, ch));

    for (int subj = 0; subj < spec.n_subjects; ++subj) {
      std::mt19937 noise_rng(derive_seed(spec.seed, 202, static_cast<std::uint64_t>(cls),
                                         static_cast<std::uint64_t>(subj)));
      const double subj_factor = 1.0 + spec.subject_jitter * subj;
      const double t0 =
          static_cast<double>(cls * spec.n_subjects + subj) * span_seconds;

      RawRecording rec;
      rec.subject_id = subj;
      rec.sample_rate_hz = spec.sample_rate_hz;
      rec.n_channels = C;
      rec.labels.assign(T, cls);
      rec.timestamps.resize(T);
      rec.channels.resize(T * C);
      for (std::size_t t = 0; t < T; ++t) {
        const double sec = static_cast<double>(t) / spec.sample_rate_hz;
        rec.timestamps[t] = t0 + sec;
        for (std::size_t c = 0; c < C; ++c) {
          const auto& p = params[c];
          const double w = 2.0 * 3.14159265358979323846 * f * subj_factor * sec;
          double v = p.a1 * std::sin(w + p.phase1) + p.a2 * std::sin(2.0 * w + p.phase2);
          v += spec.noise_sigma * gauss(noise_rng);
          rec.at(t, c) = v;
        }
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace rocl
