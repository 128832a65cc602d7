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
#include <random>
#include <vector>

#include "rocl/common.hpp"
#include "rocl/dataset.hpp"
#include "rocl/errors.hpp"

namespace rocl {

struct AugmentationConfig {
  double sigma_jitter = 0.05;
  double sigma_scale = 0.1;
  double sigma_mwarp = 0.2;
  double sigma_twarp = 0.2;
  int n_knots = 4;
  std::uint64_t seed = 0;

  void validate() const {
    require(sigma_jitter >= 0.0 && sigma_scale >= 0.0 && sigma_mwarp >= 0.0 && sigma_twarp >= 0.0,
            ErrCode::invalid_config, "augmentation sigmas must be nonnegative");
    require(n_knots >= 2, ErrCode::invalid_config, "n_knots must be at least 2");
  }
};

/// Natural cubic spline in per-interval polynomial form
/// y = a_j + b_j dx + c_j dx^2 + d_j dx^3. This form reproduces constant knot
/// values bit-exactly (all derivative coefficients come out zero), which is
/// what makes the zero-sigma warps exact identities.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> u, std::vector<double> v) : u_(std::move(u)), a_(std::move(v)) {
    const std::size_t n = u_.size();
    require(n >= 2, ErrCode::bad_knots, "need at least 2 knots");
    require(a_.size() == n, ErrCode::bad_knots, "knot positions and values differ in length");
    for (std::size_t j = 0; j + 1 < n; ++j) {
      require(u_[j + 1] > u_[j], ErrCode::bad_knots, "knot positions must be strictly increasing");
    }
    for (std::size_t j = 0; j < n; ++j) {
      require(std::isfinite(u_[j]) && std::isfinite(a_[j]), ErrCode::bad_knots,
              "knots must be finite");
    }

    std::vector<double> h(n - 1), alpha(n, 0.0), l(n), mu(n), z(n);
    for (std::size_t j = 0; j + 1 < n; ++j) h[j] = u_[j + 1] - u_[j];
    for (std::size_t j = 1; j + 1 < n; ++j) {
      alpha[j] = 3.0 * (a_[j + 1] - a_[j]) / h[j] - 3.0 * (a_[j] - a_[j - 1]) / h[j - 1];
    }
    l[0] = 1.0;
    mu[0] = 0.0;
    z[0] = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      l[j] = 2.0 * (u_[j + 1] - u_[j - 1]) - h[j - 1] * mu[j - 1];
      mu[j] = h[j] / l[j];
      z[j] = (alpha[j] - h[j - 1] * z[j - 1]) / l[j];
    }
    c_.assign(n, 0.0);
    b_.assign(n - 1, 0.0);
    d_.assign(n - 1, 0.0);
    for (std::size_t jj = n - 1; jj-- > 0;) {
      c_[jj] = z[jj] - mu[jj] * c_[jj + 1];
      b_[jj] = (a_[jj + 1] - a_[jj]) / h[jj] - h[jj] * (c_[jj + 1] + 2.0 * c_[jj]) / 3.0;
      d_[jj] = (c_[jj + 1] - c_[jj]) / (3.0 * h[jj]);
    }
  }

  /// Queries outside [u_front, u_back] are clamped to the boundary.
  double operator()(double t) const {
    t = std::clamp(t, u_.front(), u_.back());
    auto it = std::upper_bound(u_.begin(), u_.end(), t);
    std::size_t j = static_cast<std::size_t>(std::distance(u_.begin(), it));
    j = (j == 0) ? 0 : j - 1;
    if (j > u_.size() - 2) j = u_.size() - 2;
    const double dx = t - u_[j];
    return a_[j] + dx * (b_[j] + dx * (c_[j] + dx * d_[j]));
  }

 private:
  std::vector<double> u_, a_, b_, c_, d_;
};

inline std::vector<double> cubic_spline_curve(const std::vector<double>& knot_pos,
                                              const std::vector<double>& knot_val,
                                              const std::vector<double>& t_grid) {
  CubicSpline s(knot_pos, knot_val);
  std::vector<double> out(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) out[i] = s(t_grid[i]);
  return out;
}

/// Additive Gaussian noise, one independent draw per element.
inline SensorWindow jitter(const SensorWindow& x, double sigma, std::mt19937& rng) {
  require(sigma >= 0.0, ErrCode::invalid_config, "sigma must be nonnegative");
  SensorWindow out = x;
  for (double& v : out.data) v += sigma * gauss(rng);
  return out;
}

/// One multiplicative factor per channel, drawn from N(1, sigma^2), constant
/// over time.
inline SensorWindow scale(const SensorWindow& x, double sigma, std::mt19937& rng) {
  require(sigma >= 0.0, ErrCode::invalid_config, "sigma must be nonnegative");
  SensorWindow out = x;
  std::vector<double> alpha(x.channels);
  for (double& a : alpha) a = 1.0 + sigma * gauss(rng);
  for (std::size_t t = 0; t < out.width; ++t) {
    for (std::size_t c = 0; c < out.channels; ++c) out.at(t, c) *= alpha[c];
  }
  return out;
}

namespace detail {

inline std::vector<double> even_knot_positions(std::size_t width, int n_knots) {
  return linspace(0.0, static_cast<double>(width - 1), static_cast<std::size_t>(n_knots));
}

}  // namespace detail

/// Multiply each channel by a smooth random curve: a natural cubic spline
/// through knot values drawn from N(1, sigma^2) at evenly spaced times,
/// independently per channel.
inline SensorWindow magnitude_warp(const SensorWindow& x, double sigma, int n_knots,
                                   std::mt19937& rng) {
  require(sigma >= 0.0, ErrCode::invalid_config, "sigma must be nonnegative");
  require(n_knots >= 2, ErrCode::invalid_config, "n_knots must be at least 2");
  SensorWindow out = x;
  const std::vector<double> u = detail::even_knot_positions(x.width, n_knots);
  for (std::size_t c = 0; c < x.channels; ++c) {
    std::vector<double> r(u.size());
    for (double& v : r) v = 1.0 + sigma * gauss(rng);
    CubicSpline s(u, r);
    for (std::size_t t = 0; t < x.width; ++t) out.at(t, c) *= s(static_cast<double>(t));
  }
  return out;
}

/// Distort the timeline: map each output index t to a source position
/// tau(t) given by a spline through (u, u * delta) with delta ~ N(1, sigma^2),
/// clamp tau into [0, W-1], and resample by linear interpolation. tau need not
/// be monotone; clamping plus interpolation handles any draw.
inline SensorWindow time_warp(const SensorWindow& x, double sigma, int n_knots,
                              std::mt19937& rng) {
  require(sigma >= 0.0, ErrCode::invalid_config, "sigma must be nonnegative");
  require(n_knots >= 2, ErrCode::invalid_config, "n_knots must be at least 2");
  SensorWindow out = x;
  const std::vector<double> u = detail::even_knot_positions(x.width, n_knots);
  const double last = static_cast<double>(x.width - 1);
  for (std::size_t c = 0; c < x.channels; ++c) {
    std::vector<double> warped(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) warped[j] = u[j] * (1.0 + sigma * gauss(rng));
    CubicSpline s(u, warped);
    for (std::size_t t = 0; t < x.width; ++t) {
      const double tau = std::clamp(s(static_cast<double>(t)), 0.0, last);
      const auto k = static_cast<std::size_t>(tau);
      if (k + 1 >= x.width) {
        out.at(t, c) = x.at(x.width - 1, c);
      } else {
        const double frac = tau - static_cast<double>(k);
        out.at(t, c) = x.at(k, c) + frac * (x.at(k + 1, c) - x.at(k, c));
      }
    }
  }
  return out;
}

/// Expand a window set fourfold: one jittered, one scaled, one
/// magnitude-warped, and one time-warped copy per input, each keeping its
/// source label. Every copy gets an independent generator derived from
/// (seed, window index, method), so outputs do not depend on traversal order.
inline std::vector<SensorWindow> augment_fourfold(const std::vector<SensorWindow>& windows,
                                                  const AugmentationConfig& cfg) {
  require(!windows.empty(), ErrCode::empty_input, "no windows supplied");
  cfg.validate();
  std::vector<SensorWindow> out;
  out.reserve(windows.size() * 4);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const SensorWindow& w = windows[i];
    {
      std::mt19937 rng(derive_seed(cfg.seed, 303, i, 0));
      out.push_back(jitter(w, cfg.sigma_jitter, rng));
    }
    {
      std::mt19937 rng(derive_seed(cfg.seed, 303, i, 1));
      out.push_back(scale(w, cfg.sigma_scale, rng));
    }
    {
      std::mt19937 rng(derive_seed(cfg.seed, 303, i, 2));
      out.push_back(magnitude_warp(w, cfg.sigma_mwarp, cfg.n_knots, rng));
    }
    {
      std::mt19937 rng(derive_seed(cfg.seed, 303, i, 3));
      out.push_back(time_warp(w, cfg.sigma_twarp, cfg.n_knots, rng));
    }
  }
  return out;
}

}  // namespace rocl
