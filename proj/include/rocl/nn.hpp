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
#include "rocl/errors.hpp"
#include "rocl/mat.hpp"

namespace rocl {

/// One trainable tensor with its gradient and adaptive-moment state.
struct Param {
  Mat value;
  Mat grad;
  Mat m;
  Mat v;

  void init(std::size_t rows, std::size_t cols) {
    value = Mat(rows, cols);
    grad = Mat(rows, cols);
    m = Mat(rows, cols);
    v = Mat(rows, cols);
  }

  void init_uniform(std::size_t rows, std::size_t cols, double bound, std::mt19937& rng) {
    init(rows, cols);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : value.data) w = dist(rng);
  }

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

/// Adaptive-moment gradient descent with bias correction.
struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;

  void step(const std::vector<Param*>& params) {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (Param* p : params) {
      for (std::size_t i = 0; i < p->value.data.size(); ++i) {
        const double g = p->grad.data[i];
        p->m.data[i] = beta1 * p->m.data[i] + (1.0 - beta1) * g;
        p->v.data[i] = beta2 * p->v.data[i] + (1.0 - beta2) * g * g;
        const double mhat = p->m.data[i] / bc1;
        const double vhat = p->v.data[i] / bc2;
        p->value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  static void zero_grads(const std::vector<Param*>& params) {
    for (Param* p : params) p->zero_grad();
  }
};

// ---------------------------------------------------------------------------
// Layers. Sequences are [T x C] matrices (time by channels); each layer works
// on one sample and writes what backward needs into an explicit cache, so a
// batch's caches can outlive the forward pass (losses couple samples).
// ---------------------------------------------------------------------------

/// 1-D convolution across time, all input channels to all output channels.
/// Weight layout: [out_ch x (in_ch * kernel)], row o holding the o-th filter.
struct Conv1d {
  std::size_t in_ch = 0, out_ch = 0, kernel = 1, stride = 1, pad = 0;
  Param weight;
  Param bias;

  struct Cache {
    Mat x;  // [T x in_ch], unpadded input
  };

  void init(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t s, std::size_t p,
            std::mt19937& rng) {
    in_ch = in_c;
    out_ch = out_c;
    kernel = k;
    stride = s;
    pad = p;
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * kernel));
    weight.init_uniform(out_ch, in_ch * kernel, bound, rng);
    bias.init(1, out_ch);
  }

  std::size_t out_len(std::size_t t_in) const {
    require(t_in + 2 * pad >= kernel, ErrCode::shape_mismatch,
            "sequence shorter than convolution kernel");
    return (t_in + 2 * pad - kernel) / stride + 1;
  }

  Mat forward(const Mat& x, Cache& cache) const {
    require(x.cols == in_ch, ErrCode::shape_mismatch, "conv input channel mismatch");
    cache.x = x;
    const std::size_t t_out = out_len(x.rows);
    Mat y(t_out, out_ch);
    for (std::size_t t = 0; t < t_out; ++t) {
      for (std::size_t o = 0; o < out_ch; ++o) {
        double acc = bias.value.at(0, o);
        for (std::size_t dk = 0; dk < kernel; ++dk) {
          const std::ptrdiff_t src =
              static_cast<std::ptrdiff_t>(t * stride + dk) - static_cast<std::ptrdiff_t>(pad);
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(x.rows)) continue;
          for (std::size_t ci = 0; ci < in_ch; ++ci) {
            acc += weight.value.at(o, ci * kernel + dk) *
                   x.at(static_cast<std::size_t>(src), ci);
          }
        }
        y.at(t, o) = acc;
      }
    }
    return y;
  }

  Mat backward(const Mat& dy, const Cache& cache) {
    const Mat& x = cache.x;
    Mat dx(x.rows, x.cols);
    for (std::size_t t = 0; t < dy.rows; ++t) {
      for (std::size_t o = 0; o < out_ch; ++o) {
        const double g = dy.at(t, o);
        if (g == 0.0) continue;
        bias.grad.at(0, o) += g;
        for (std::size_t dk = 0; dk < kernel; ++dk) {
          const std::ptrdiff_t src =
              static_cast<std::ptrdiff_t>(t * stride + dk) - static_cast<std::ptrdiff_t>(pad);
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(x.rows)) continue;
          for (std::size_t ci = 0; ci < in_ch; ++ci) {
            weight.grad.at(o, ci * kernel + dk) += g * x.at(static_cast<std::size_t>(src), ci);
            dx.at(static_cast<std::size_t>(src), ci) += g * weight.value.at(o, ci * kernel + dk);
          }
        }
      }
    }
    return dx;
  }

  void collect(std::vector<Param*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

struct Relu {
  struct Cache {
    Mat x;
  };

  static Mat forward(const Mat& x, Cache& cache) {
    cache.x = x;
    Mat y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
  }

  static Mat backward(const Mat& dy, const Cache& cache) {
    Mat dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
      if (cache.x.data[i] <= 0.0) dx.data[i] = 0.0;
    }
    return dx;
  }
};

/// Non-overlapping max pool over time with a fixed window; a trailing
/// remainder shorter than the window is dropped.
struct MaxPool1d {
  std::size_t window = 2;

  struct Cache {
    std::vector<std::size_t> argmax;  // flat [t_out * C] source row per output
    std::size_t t_in = 0;
    std::size_t channels = 0;
  };

  Mat forward(const Mat& x, Cache& cache) const {
    const std::size_t t_out = x.rows / window;
    require(t_out >= 1, ErrCode::shape_mismatch, "sequence shorter than pool window");
    cache.t_in = x.rows;
    cache.channels = x.cols;
    cache.argmax.assign(t_out * x.cols, 0);
    Mat y(t_out, x.cols);
    for (std::size_t t = 0; t < t_out; ++t) {
      for (std::size_t c = 0; c < x.cols; ++c) {
        std::size_t best = t * window;
        for (std::size_t k = 1; k < window; ++k) {
          if (x.at(t * window + k, c) > x.at(best, c)) best = t * window + k;
        }
        y.at(t, c) = x.at(best, c);
        cache.argmax[t * x.cols + c] = best;
      }
    }
    return y;
  }

  Mat backward(const Mat& dy, const Cache& cache) const {
    Mat dx(cache.t_in, cache.channels);
    for (std::size_t t = 0; t < dy.rows; ++t) {
      for (std::size_t c = 0; c < dy.cols; ++c) {
        dx.at(cache.argmax[t * dy.cols + c], c) += dy.at(t, c);
      }
    }
    return dx;
  }
};

/// Single-layer LSTM returning the full hidden sequence. Gate order in the
/// stacked weight rows is input, forget, cell, output; initial hidden and
/// cell states are zero.
struct Lstm {
  std::size_t in_dim = 0, hidden = 0;
  Param wx;  // [4H x in_dim]
  Param wh;  // [4H x H]
  Param bias;  // [1 x 4H]

  struct Cache {
    Mat x;                   // [T x in_dim]
    Mat h;                   // [T+1 x H], row 0 is the initial state
    Mat c;                   // [T+1 x H]
    Mat gi, gf, gg, go;      // [T x H] activated gates
  };

  void init(std::size_t in_d, std::size_t h, std::mt19937& rng) {
    in_dim = in_d;
    hidden = h;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    wx.init_uniform(4 * hidden, in_dim, bound, rng);
    wh.init_uniform(4 * hidden, hidden, bound, rng);
    bias.init_uniform(1, 4 * hidden, bound, rng);
  }

  Mat forward(const Mat& x, Cache& cache) const {
    require(x.cols == in_dim, ErrCode::shape_mismatch, "lstm input dimension mismatch");
    const std::size_t T = x.rows, H = hidden;
    cache.x = x;
    cache.h = Mat(T + 1, H);
    cache.c = Mat(T + 1, H);
    cache.gi = Mat(T, H);
    cache.gf = Mat(T, H);
    cache.gg = Mat(T, H);
    cache.go = Mat(T, H);

    std::vector<double> z(4 * H);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = bias.value.at(0, r);
        for (std::size_t c = 0; c < in_dim; ++c) acc += wx.value.at(r, c) * x.at(t, c);
        for (std::size_t c = 0; c < H; ++c) acc += wh.value.at(r, c) * cache.h.at(t, c);
        z[r] = acc;
      }
      for (std::size_t j = 0; j < H; ++j) {
        const double i = 1.0 / (1.0 + std::exp(-z[j]));
        const double f = 1.0 / (1.0 + std::exp(-z[H + j]));
        const double g = std::tanh(z[2 * H + j]);
        const double o = 1.0 / (1.0 + std::exp(-z[3 * H + j]));
        const double cc = f * cache.c.at(t, j) + i * g;
        cache.gi.at(t, j) = i;
        cache.gf.at(t, j) = f;
        cache.gg.at(t, j) = g;
        cache.go.at(t, j) = o;
        cache.c.at(t + 1, j) = cc;
        cache.h.at(t + 1, j) = o * std::tanh(cc);
      }
    }
    Mat y(T, H);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < H; ++j) y.at(t, j) = cache.h.at(t + 1, j);
    }
    return y;
  }

  Mat backward(const Mat& dy, const Cache& cache) {
    const std::size_t T = cache.x.rows, H = hidden;
    Mat dx(T, in_dim);
    std::vector<double> dh(H, 0.0), dc(H, 0.0), dz(4 * H);
    for (std::size_t tt = T; tt-- > 0;) {
      for (std::size_t j = 0; j < H; ++j) {
        const double i = cache.gi.at(tt, j), f = cache.gf.at(tt, j);
        const double g = cache.gg.at(tt, j), o = cache.go.at(tt, j);
        const double tc = std::tanh(cache.c.at(tt + 1, j));
        const double dht = dy.at(tt, j) + dh[j];
        const double dct = dc[j] + dht * o * (1.0 - tc * tc);
        dz[j] = (dct * g) * i * (1.0 - i);
        dz[H + j] = (dct * cache.c.at(tt, j)) * f * (1.0 - f);
        dz[2 * H + j] = (dct * i) * (1.0 - g * g);
        dz[3 * H + j] = (dht * tc) * o * (1.0 - o);
        dc[j] = dct * f;
      }
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double gz = dz[r];
        if (gz == 0.0) continue;
        bias.grad.at(0, r) += gz;
        for (std::size_t c = 0; c < in_dim; ++c) {
          wx.grad.at(r, c) += gz * cache.x.at(tt, c);
          dx.at(tt, c) += gz * wx.value.at(r, c);
        }
        for (std::size_t c = 0; c < H; ++c) {
          wh.grad.at(r, c) += gz * cache.h.at(tt, c);
          dh[c] += gz * wh.value.at(r, c);
        }
      }
    }
    return dx;
  }

  void collect(std::vector<Param*>& out) {
    out.push_back(&wx);
    out.push_back(&wh);
    out.push_back(&bias);
  }
};

/// Mean over the time axis: [T x C] -> [1 x C].
struct TimeAvgPool {
  struct Cache {
    std::size_t t_in = 0;
  };

  static Mat forward(const Mat& x, Cache& cache) {
    cache.t_in = x.rows;
    Mat y(1, x.cols);
    for (std::size_t t = 0; t < x.rows; ++t) {
      for (std::size_t c = 0; c < x.cols; ++c) y.at(0, c) += x.at(t, c);
    }
    for (std::size_t c = 0; c < x.cols; ++c) y.at(0, c) /= static_cast<double>(x.rows);
    return y;
  }

  static Mat backward(const Mat& dy, const Cache& cache, std::size_t channels) {
    Mat dx(cache.t_in, channels);
    const double inv = 1.0 / static_cast<double>(cache.t_in);
    for (std::size_t t = 0; t < cache.t_in; ++t) {
      for (std::size_t c = 0; c < channels; ++c) dx.at(t, c) = dy.at(0, c) * inv;
    }
    return dx;
  }
};

/// Fully connected layer on row vectors: y = x W^T + b, weight [out x in].
struct Dense {
  std::size_t in_dim = 0, out_dim = 0;
  Param weight;
  Param bias;

  struct Cache {
    Mat x;  // [1 x in]
  };

  void init(std::size_t in_d, std::size_t out_d, std::mt19937& rng) {
    in_dim = in_d;
    out_dim = out_d;
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim));
    weight.init_uniform(out_dim, in_dim, bound, rng);
    bias.init(1, out_dim);
  }

  Mat forward(const Mat& x, Cache& cache) const {
    require(x.rows == 1 && x.cols == in_dim, ErrCode::shape_mismatch, "dense input mismatch");
    cache.x = x;
    Mat y(1, out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = bias.value.at(0, o);
      for (std::size_t c = 0; c < in_dim; ++c) acc += weight.value.at(o, c) * x.at(0, c);
      y.at(0, o) = acc;
    }
    return y;
  }

  Mat backward(const Mat& dy, const Cache& cache) {
    Mat dx(1, in_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double g = dy.at(0, o);
      if (g == 0.0) continue;
      bias.grad.at(0, o) += g;
      for (std::size_t c = 0; c < in_dim; ++c) {
        weight.grad.at(o, c) += g * cache.x.at(0, c);
        dx.at(0, c) += g * weight.value.at(o, c);
      }
    }
    return dx;
  }

  void collect(std::vector<Param*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// Checksum over parameter bytes; used to prove that inference paths leave a
/// frozen model untouched.
inline std::uint64_t param_checksum(const std::vector<const Param*>& params) {
  std::string bytes;
  for (const Param* p : params) {
    for (double v : p->value.data) put_f64(bytes, v);
  }
  return fnv1a(bytes);
}

}  // namespace rocl
