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
#include <set>
#include <vector>

#include "rocl/errors.hpp"
#include "rocl/mat.hpp"

namespace rocl {

inline double accuracy(const std::vector<int>& preds, const std::vector<int>& truths) {
  require(preds.size() == truths.size() && !preds.empty(), ErrCode::length_mismatch,
          "prediction and truth vectors must be nonempty and equal-length");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == truths[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

/// Per-class F1 = 2TP / (2TP + FP + FN) for every class in `class_set` that
/// has at least one true instance; classes absent from the truth vector are
/// omitted from the result.
inline std::map<int, double> per_class_f1(const std::vector<int>& preds,
                                          const std::vector<int>& truths,
                                          const std::set<int>& class_set) {
  require(preds.size() == truths.size() && !preds.empty(), ErrCode::length_mismatch,
          "prediction and truth vectors must be nonempty and equal-length");
  std::map<int, double> out;
  for (int cls : class_set) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == cls;
      const bool t = truths[i] == cls;
      if (p && t) ++tp;
      if (p && !t) ++fp;
      if (!p && t) ++fn;
    }
    if (tp + fn == 0) continue;  // no true instances in this evaluation window
    out[cls] = 2.0 * static_cast<double>(tp) /
               static_cast<double>(2 * tp + fp + fn);
  }
  return out;
}

/// Unweighted mean of per-class F1 over the classes of `class_set` that have
/// true instances. A class predicted correctly zero times still counts (as 0)
/// as long as it appears in the truth vector.
inline double macro_f1(const std::vector<int>& preds, const std::vector<int>& truths,
                       const std::set<int>& class_set) {
  require(!class_set.empty(), ErrCode::empty_input, "class set is empty");
  const std::map<int, double> f1 = per_class_f1(preds, truths, class_set);
  if (f1.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [cls, v] : f1) sum += v;
  return sum / static_cast<double>(f1.size());
}

/// Convenience form scoring every class that occurs in the truth vector.
inline double macro_f1(const std::vector<int>& preds, const std::vector<int>& truths) {
  std::set<int> classes(truths.begin(), truths.end());
  return macro_f1(preds, truths, classes);
}

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and fills `vecs` with unit eigenvectors in its columns.
inline std::vector<double> jacobi_eigen(Mat a, Mat& vecs) {
  const std::size_t n = a.rows;
  vecs = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) vecs.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vecs.at(k, p), vkq = vecs.at(k, q);
          vecs.at(k, p) = c * vkp - s * vkq;
          vecs.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a.at(i, i);
  return ev;
}

}  // namespace detail

struct PcaResult {
  Mat projected;                  // [n x dims]
  Mat components;                 // [dims x d], rows are principal directions
  std::vector<double> explained;  // variance share per kept component
};

/// Project rows of `embeddings` onto the top principal components of their
/// covariance.
inline PcaResult pca_project(const Mat& embeddings, std::size_t dims = 2) {
  const std::size_t n = embeddings.rows, d = embeddings.cols;
  require(dims >= 1 && dims <= d, ErrCode::invalid_config,
          "dims must lie in [1, embedding width]");
  require(n >= dims, ErrCode::too_few_samples, "need at least `dims` samples");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += embeddings.at(i, c);
  }
  for (double& v : mean) v /= static_cast<double>(n);

  Mat cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double xa = embeddings.at(i, a) - mean[a];
      for (std::size_t b = a; b < d; ++b) {
        cov.at(a, b) += xa * (embeddings.at(i, b) - mean[b]);
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov.at(a, b) /= static_cast<double>(n);
      cov.at(b, a) = cov.at(a, b);
    }
  }

  Mat vecs;
  const std::vector<double> ev = detail::jacobi_eigen(cov, vecs);
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ev[a] > ev[b]; });

  double trace = 0.0;
  for (double v : ev) trace += std::max(v, 0.0);

  PcaResult out;
  out.components = Mat(dims, d);
  out.explained.resize(dims);
  for (std::size_t k = 0; k < dims; ++k) {
    for (std::size_t c = 0; c < d; ++c) out.components.at(k, c) = vecs.at(c, order[k]);
    out.explained[k] = trace > 0.0 ? std::max(ev[order[k]], 0.0) / trace : 0.0;
  }
  out.projected = Mat(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dims; ++k) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        acc += (embeddings.at(i, c) - mean[c]) * out.components.at(k, c);
      }
      out.projected.at(i, k) = acc;
    }
  }
  return out;
}

}  // namespace rocl
