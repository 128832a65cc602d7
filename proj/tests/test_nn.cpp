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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rocl/nn.hpp"

using namespace rocl;

namespace {

Mat random_mat(std::size_t r, std::size_t c, std::mt19937& rng) {
  Mat m(r, c);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : m.data) v = g(rng);
  return m;
}

/// Scalar readout L = sum_ij c_ij * y_ij with fixed random weights, so every
/// output element contributes to the checked gradient.
struct Readout {
  Mat c;
  explicit Readout(const Mat& shape_like, std::mt19937& rng) {
    c = random_mat(shape_like.rows, shape_like.cols, rng);
  }
  double loss(const Mat& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += c.data[i] * y.data[i];
    return s;
  }
  Mat grad() const { return c; }
};

/// Checks every parameter and the input of a layer against central
/// differences; `fwd` must be pure given the current parameter values.
template <typename Fwd, typename Bwd>
void check_gradients(std::vector<Param*> params, Mat& x, Fwd fwd, Bwd bwd) {
  std::mt19937 rng(99);
  Readout ro(fwd(), rng);
  auto loss = [&] { return ro.loss(fwd()); };

  Adam::zero_grads(params);
  const Mat dx = bwd(ro.grad());

  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double num = oracle::central_diff(loss, p->value.data[i]);
      INFO("param element " << i);
      CHECK(oracle::grad_close(p->grad.data[i], num));
    }
  }
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double num = oracle::central_diff(loss, x.data[i]);
    INFO("input element " << i);
    CHECK(oracle::grad_close(dx.data[i], num));
  }
}

}  // namespace

TEST_CASE("adam takes the textbook first step") {
  Param p;
  p.init(1, 1);
  p.value.at(0, 0) = 1.0;
  p.grad.at(0, 0) = 1.0;
  Adam opt;
  opt.step({&p});
  // First-step bias correction makes the update exactly lr / (1 + eps).
  CHECK(p.value.at(0, 0) == Catch::Approx(1.0 - 1e-3).epsilon(1e-9));
  CHECK(opt.step_count == 1);
}

TEST_CASE("adam accumulates moments across steps") {
  Param p;
  p.init(1, 1);
  Adam opt;
  for (int i = 0; i < 5; ++i) {
    p.grad.at(0, 0) = 1.0;
    opt.step({&p});
  }
  CHECK(p.value.at(0, 0) == Catch::Approx(-5e-3).epsilon(1e-6));
}

TEST_CASE("dense layer gradients") {
  std::mt19937 rng(3);
  Dense d;
  d.init(4, 3, rng);
  Mat x = random_mat(1, 4, rng);  // dense consumes one pooled row at a time
  Dense::Cache cache;
  std::vector<Param*> params;
  d.collect(params);
  check_gradients(
      params, x, [&] { return d.forward(x, cache); },
      [&](const Mat& dy) {
        d.forward(x, cache);
        return d.backward(dy, cache);
      });
}

TEST_CASE("conv layer gradients across stride and padding choices") {
  std::mt19937 rng(4);
  struct Shape {
    std::size_t k, s, p;
  };
  for (const Shape sh : {Shape{3, 1, 1}, Shape{5, 2, 2}, Shape{3, 2, 0}}) {
    Conv1d conv;
    conv.init(2, 3, sh.k, sh.s, sh.p, rng);
    Mat x = random_mat(9, 2, rng);
    Conv1d::Cache cache;
    std::vector<Param*> params;
    conv.collect(params);
    check_gradients(
        params, x, [&] { return conv.forward(x, cache); },
        [&](const Mat& dy) {
          conv.forward(x, cache);
          return conv.backward(dy, cache);
        });
  }
}

TEST_CASE("conv output length matches the usual formula") {
  std::mt19937 rng(5);
  Conv1d conv;
  conv.init(1, 1, 5, 2, 2, rng);
  CHECK(conv.out_len(64) == 32);  // (64 + 2*2 - 5)/2 + 1
  CHECK(conv.out_len(5) == 3);
  Conv1d narrow;
  narrow.init(1, 1, 3, 1, 0, rng);
  CHECK(narrow.out_len(3) == 1);
  CHECK_THROWS_AS(narrow.out_len(2), Error);
}

TEST_CASE("relu masks negatives in both directions") {
  Mat x(1, 4);
  x.data = {-1.0, 0.0, 2.0, -0.5};
  Relu::Cache cache;
  const Mat y = Relu::forward(x, cache);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 2.0, 0.0});
  Mat dy(1, 4, 1.0);
  const Mat dx = Relu::backward(dy, cache);
  CHECK(dx.data == std::vector<double>{0.0, 0.0, 1.0, 0.0});
}

TEST_CASE("max pooling halves time and routes gradient to the argmax") {
  Mat x(5, 2);
  x.data = {1.0, 9.0, 3.0, 8.0, 2.0, 0.0, 7.0, 1.0, 5.0, 5.0};  // odd tail dropped
  MaxPool1d pool;
  MaxPool1d::Cache cache;
  const Mat y = pool.forward(x, cache);
  REQUIRE(y.rows == 2);
  CHECK(y.at(0, 0) == 3.0);
  CHECK(y.at(0, 1) == 9.0);
  CHECK(y.at(1, 0) == 7.0);
  CHECK(y.at(1, 1) == 1.0);

  Mat dy(2, 2);
  dy.data = {1.0, 2.0, 3.0, 4.0};
  const Mat dx = pool.backward(dy, cache);
  CHECK(dx.at(1, 0) == 1.0);  // x(1,0)=3 won its pair
  CHECK(dx.at(0, 1) == 2.0);
  CHECK(dx.at(3, 0) == 3.0);
  CHECK(dx.at(3, 1) == 4.0);
  CHECK(dx.at(4, 0) == 0.0);  // dropped remainder gets nothing
}

TEST_CASE("lstm gradients through full backpropagation in time") {
  std::mt19937 rng(6);
  Lstm lstm;
  lstm.init(3, 4, rng);
  Mat x = random_mat(5, 3, rng);
  Lstm::Cache cache;
  std::vector<Param*> params;
  lstm.collect(params);
  check_gradients(
      params, x, [&] { return lstm.forward(x, cache); },
      [&](const Mat& dy) {
        lstm.forward(x, cache);
        return lstm.backward(dy, cache);
      });
}

TEST_CASE("time averaging pools rows and spreads gradient evenly") {
  Mat x(4, 2);
  x.data = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  TimeAvgPool::Cache cache;
  const Mat y = TimeAvgPool::forward(x, cache);
  REQUIRE(y.rows == 1);
  CHECK(y.at(0, 0) == Catch::Approx(4.0));
  CHECK(y.at(0, 1) == Catch::Approx(5.0));
  Mat dy(1, 2);
  dy.data = {4.0, 8.0};
  const Mat dx = TimeAvgPool::backward(dy, cache, 2);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(dx.at(t, 0) == Catch::Approx(1.0));
    CHECK(dx.at(t, 1) == Catch::Approx(2.0));
  }
}

TEST_CASE("parameter checksum is order- and value-sensitive") {
  std::mt19937 rng(8);
  Dense d;
  d.init(3, 2, rng);
  std::vector<Param*> params;
  d.collect(params);
  const std::vector<const Param*> view(params.begin(), params.end());
  const std::uint64_t before = param_checksum(view);
  d.weight.value.at(0, 0) += 1e-9;
  CHECK(param_checksum(view) != before);
}

TEST_CASE("adam drives a least-squares problem toward its optimum") {
  std::mt19937 rng(9);
  Dense d;
  d.init(2, 1, rng);
  const std::vector<std::vector<double>> xs = {
      {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, -0.5}};
  const std::vector<double> target = {1.0, -1.0, 0.0, 1.0};  // y = x0 - x1
  Adam opt;
  opt.lr = 1e-2;  // the optimum is ~1.4 away per weight; 2000 default steps fall short
  std::vector<Param*> params;
  d.collect(params);
  double first = -1.0, last = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Adam::zero_grads(params);
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Mat x(1, 2);
      x.data = xs[i];
      Dense::Cache cache;
      const Mat y = d.forward(x, cache);
      const double e = y.at(0, 0) - target[i];
      loss += e * e;
      Mat dy(1, 1);
      dy.at(0, 0) = 2.0 * e;
      d.backward(dy, cache);
    }
    if (it == 0) first = loss;
    last = loss;
    opt.step(params);
  }
  CHECK(last < 1e-4);
  CHECK(last < first);
}
