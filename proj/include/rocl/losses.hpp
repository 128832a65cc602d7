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
#include <vector>

#include "rocl/errors.hpp"
#include "rocl/mat.hpp"

namespace rocl {

/// Mean negative log-likelihood of one-hot targets against post-softmax
/// probability rows: -(1/N) sum_n log p[n, label_n].
inline double cross_entropy_loss(const Mat& probs, const std::vector<int>& labels) {
  require(probs.rows == labels.size(), ErrCode::shape_mismatch,
          "probability rows and labels differ in count");
  require(probs.rows >= 1, ErrCode::empty_input, "no samples");
  double loss = 0.0;
  for (std::size_t n = 0; n < probs.rows; ++n) {
    const int y = labels[n];
    require(y >= 0 && static_cast<std::size_t>(y) < probs.cols, ErrCode::shape_mismatch,
            "label outside class range");
    loss -= std::log(probs.at(n, static_cast<std::size_t>(y)));
  }
  return loss / static_cast<double>(probs.rows);
}

/// Gradient of cross_entropy_loss with respect to the probabilities:
/// d/dp[n,c] = -(1/N) * [c == label_n] / p[n,c].
inline Mat cross_entropy_grad(const Mat& probs, const std::vector<int>& labels) {
  require(probs.rows == labels.size(), ErrCode::shape_mismatch,
          "probability rows and labels differ in count");
  Mat grad(probs.rows, probs.cols);
  const double inv_n = 1.0 / static_cast<double>(probs.rows);
  for (std::size_t n = 0; n < probs.rows; ++n) {
    const auto y = static_cast<std::size_t>(labels[n]);
    grad.at(n, y) = -inv_n / probs.at(n, y);
  }
  return grad;
}

/// Row-wise stable softmax.
inline Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows, logits.cols);
  for (std::size_t n = 0; n < logits.rows; ++n) {
    double m = logits.at(n, 0);
    for (std::size_t c = 1; c < logits.cols; ++c) m = std::max(m, logits.at(n, c));
    double denom = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      out.at(n, c) = std::exp(logits.at(n, c) - m);
      denom += out.at(n, c);
    }
    for (std::size_t c = 0; c < logits.cols; ++c) out.at(n, c) /= denom;
  }
  return out;
}

struct SoftmaxXent {
  double loss = 0.0;
  Mat probs;
  Mat grad_logits;  // (p - y)/N, the fused backward used in training
};

/// Softmax followed by mean cross-entropy, with the gradient taken directly
/// with respect to the logits. Equals cross_entropy_loss(softmax_rows(z), y).
inline SoftmaxXent softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels) {
  require(logits.rows == labels.size(), ErrCode::shape_mismatch,
          "logit rows and labels differ in count");
  require(logits.rows >= 1, ErrCode::empty_input, "no samples");
  SoftmaxXent out;
  out.probs = softmax_rows(logits);
  out.loss = cross_entropy_loss(out.probs, labels);
  out.grad_logits = out.probs;
  const double inv_n = 1.0 / static_cast<double>(logits.rows);
  for (std::size_t n = 0; n < logits.rows; ++n) {
    out.grad_logits.at(n, static_cast<std::size_t>(labels[n])) -= 1.0;
    for (std::size_t c = 0; c < logits.cols; ++c) out.grad_logits.at(n, c) *= inv_n;
  }
  return out;
}

namespace detail {

/// Rows scaled to unit L2 norm (with a tiny floor so zero rows stay finite),
/// plus the norms used, for the backward pass.
inline void l2_normalize_rows(const Mat& in, Mat& out, std::vector<double>& norms) {
  out = Mat(in.rows, in.cols);
  norms.assign(in.rows, 0.0);
  for (std::size_t r = 0; r < in.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < in.cols; ++c) s += in.at(r, c) * in.at(r, c);
    norms[r] = std::max(std::sqrt(s), 1e-12);
    for (std::size_t c = 0; c < in.cols; ++c) out.at(r, c) = in.at(r, c) / norms[r];
  }
}

}  // namespace detail

struct SupConResult {
  double loss = 0.0;
  Mat grad;  // with respect to the raw (pre-normalization) embeddings
};

/// Supervised contrastive loss over a batch of embeddings.
///
/// For each anchor a, with A(a) = all other samples and P(a) = other samples
/// sharing a's label:
///   L_a = (1/|P(a)|) * sum_{p in P(a)} -ln( exp(s_ap) / sum_{j in A(a)} exp(s_aj) )
/// and the total is sum_a L_a (a sum over anchors, not a mean). Similarities
/// s_aj are dot products divided by tau, taken on L2-normalized embeddings
/// when `normalize` is set (the default); softmax terms are stabilized by
/// max-subtraction.
inline SupConResult supcon_loss_grad(const Mat& emb, const std::vector<int>& labels, double tau,
                                     bool normalize = true, bool with_grad = true) {
  require(emb.rows == labels.size(), ErrCode::shape_mismatch,
          "embedding rows and labels differ in count");
  require(emb.rows >= 1, ErrCode::empty_input, "no samples");
  require(tau > 0.0, ErrCode::invalid_config, "tau must be positive");
  const std::size_t n = emb.rows;
  const std::size_t d = emb.cols;

  Mat z;
  std::vector<double> norms;
  if (normalize) {
    detail::l2_normalize_rows(emb, z, norms);
  } else {
    z = emb;
  }

  std::vector<std::size_t> pos_count(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != a && labels[j] == labels[a]) pos_count[a]++;
    }
    require(pos_count[a] >= 1, ErrCode::no_positive,
            "sample " + std::to_string(a) + " has no positive partner");
  }

  SupConResult out;
  Mat gz;  // gradient with respect to the normalized embeddings
  if (with_grad) gz = Mat(n, d);

  std::vector<double> s(n);
  for (std::size_t a = 0; a < n; ++a) {
    double smax = -1e300;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += z.at(a, c) * z.at(j, c);
      s[j] = dot / tau;
      smax = std::max(smax, s[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != a) denom += std::exp(s[j] - smax);
    }
    const double log_denom = smax + std::log(denom);

    double mean_pos = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != a && labels[j] == labels[a]) mean_pos += s[j];
    }
    mean_pos /= static_cast<double>(pos_count[a]);
    out.loss += log_denom - mean_pos;

    if (!with_grad) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      double g = std::exp(s[j] - smax) / denom;  // dL_a / ds_aj, softmax part
      if (labels[j] == labels[a]) g -= 1.0 / static_cast<double>(pos_count[a]);
      g /= tau;  // chain through s_aj = (z_a . z_j) / tau
      for (std::size_t c = 0; c < d; ++c) {
        gz.at(a, c) += g * z.at(j, c);
        gz.at(j, c) += g * z.at(a, c);
      }
    }
  }

  if (with_grad) {
    if (normalize) {
      // dz_raw = (g - z (z . g)) / ||raw||, per row.
      out.grad = Mat(n, d);
      for (std::size_t r = 0; r < n; ++r) {
        double zg = 0.0;
        for (std::size_t c = 0; c < d; ++c) zg += z.at(r, c) * gz.at(r, c);
        for (std::size_t c = 0; c < d; ++c) {
          out.grad.at(r, c) = (gz.at(r, c) - z.at(r, c) * zg) / norms[r];
        }
      }
    } else {
      out.grad = std::move(gz);
    }
  }
  return out;
}

inline double supcon_loss(const Mat& emb, const std::vector<int>& labels, double tau,
                          bool normalize = true) {
  return supcon_loss_grad(emb, labels, tau, normalize, /*with_grad=*/false).loss;
}

}  // namespace rocl
