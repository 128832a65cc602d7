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
#include "rocl/losses.hpp"

using namespace rocl;

TEST_CASE("cross entropy of uniform predictions is ln C") {
  Mat probs(3, 4, 0.25);
  const std::vector<int> labels = {0, 2, 3};
  CHECK(cross_entropy_loss(probs, labels) == Catch::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy matches a hand-computed two-sample case") {
  Mat probs(2, 2);
  probs.at(0, 0) = 0.5;
  probs.at(0, 1) = 0.5;
  probs.at(1, 0) = 0.75;
  probs.at(1, 1) = 0.25;
  // -(ln 0.5 + ln 0.25) / 2
  CHECK(cross_entropy_loss(probs, {0, 1}) ==
        Catch::Approx(1.0397207708399179).epsilon(1e-12));
}

TEST_CASE("cross entropy gradient only touches the true-class probability") {
  Mat probs(2, 3);
  probs.data = {0.2, 0.3, 0.5, 0.6, 0.3, 0.1};
  const std::vector<int> labels = {2, 0};
  const Mat g = cross_entropy_grad(probs, labels);
  CHECK(g.at(0, 0) == 0.0);
  CHECK(g.at(0, 2) == Catch::Approx(-1.0 / (2.0 * 0.5)));
  CHECK(g.at(1, 0) == Catch::Approx(-1.0 / (2.0 * 0.6)));
  CHECK(g.at(1, 1) == 0.0);

  // Central-difference agreement through the loss itself.
  for (std::size_t r = 0; r < 2; ++r) {
    const std::size_t c = static_cast<std::size_t>(labels[r]);
    const double num = oracle::central_diff(
        [&] { return cross_entropy_loss(probs, labels); }, probs.at(r, c));
    CHECK(oracle::grad_close(g.at(r, c), num));
  }
}

TEST_CASE("label outside the probability row is rejected") {
  Mat probs(1, 2, 0.5);
  CHECK_THROWS_AS(cross_entropy_loss(probs, {2}), Error);
  CHECK_THROWS_AS(cross_entropy_loss(probs, {0, 1}), Error);  // length mismatch
}

TEST_CASE("softmax rows sum to one and keep order") {
  Mat logits(2, 3);
  logits.data = {1.0, 2.0, 3.0, -5.0, 0.0, 5.0};
  const Mat p = softmax_rows(logits);
  for (std::size_t r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += p.at(r, c);
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(p.at(r, 0) < p.at(r, 1));
    CHECK(p.at(r, 1) < p.at(r, 2));
  }
}

TEST_CASE("softmax is shift-invariant and stable under large logits") {
  Mat logits(1, 3);
  logits.data = {1000.0, 1001.0, 999.0};
  const Mat p = softmax_rows(logits);
  CHECK(std::isfinite(p.at(0, 0)));
  Mat shifted(1, 3);
  shifted.data = {0.0, 1.0, -1.0};
  const Mat q = softmax_rows(shifted);
  for (std::size_t c = 0; c < 3; ++c) CHECK(p.at(0, c) == Catch::Approx(q.at(0, c)));
}

TEST_CASE("fused softmax cross entropy equals the composed form") {
  std::mt19937 rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  Mat logits(5, 4);
  for (double& v : logits.data) v = g(rng);
  const std::vector<int> labels = {1, 0, 3, 2, 1};

  const SoftmaxXent fused = softmax_cross_entropy(logits, labels);
  CHECK(fused.loss == Catch::Approx(cross_entropy_loss(softmax_rows(logits), labels)));

  // Analytic logit gradient (p - y)/N against central differences.
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double num = oracle::central_diff(
          [&] { return softmax_cross_entropy(logits, labels).loss; }, logits.at(r, c));
      CHECK(oracle::grad_close(fused.grad_logits.at(r, c), num));
    }
  }
}

TEST_CASE("contrastive loss matches the literal double sum on random batches") {
  std::mt19937 rng(123);
  for (int rep = 0; rep < 25; ++rep) {
    const oracle::RandomBatch b = oracle::random_supcon_batch(rng);
    for (bool normalize : {true, false}) {
      const double fast = supcon_loss(b.emb, b.labels, 0.1, normalize);
      const double slow = oracle::brute_supcon(b.emb, b.labels, 0.1, normalize);
      CHECK(std::abs(fast - slow) <= 1e-6 * std::max(1.0, std::abs(slow)));
    }
  }
}

TEST_CASE("identical embeddings give exactly n log(n-1)") {
  for (std::size_t n : {3u, 8u, 12u}) {
    Mat emb(n, 5, 0.7);
    const std::vector<int> labels(n, 1);
    const double expect = static_cast<double>(n) * std::log(static_cast<double>(n - 1));
    const double got = supcon_loss(emb, labels, 0.1, true);
    CHECK(std::abs(got - expect) <= 1e-9 * expect);
  }
}

TEST_CASE("an anchor without any positive is an error") {
  Mat emb(3, 4, 0.0);
  emb.at(0, 0) = 1.0;
  emb.at(1, 1) = 1.0;
  emb.at(2, 2) = 1.0;
  CHECK_THROWS_MATCHES(supcon_loss(emb, {0, 0, 1}, 0.1, true), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrCode::no_positive;
                       }));
}

TEST_CASE("contrastive gradient agrees with central differences") {
  std::mt19937 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat emb(6, 4);
  for (double& v : emb.data) v = g(rng);
  const std::vector<int> labels = {0, 1, 0, 1, 2, 2};

  for (bool normalize : {true, false}) {
    const SupConResult res = supcon_loss_grad(emb, labels, 0.1, normalize, true);
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        const double num = oracle::central_diff(
            [&] { return supcon_loss(emb, labels, 0.1, normalize); }, emb.at(r, c));
        CHECK(oracle::grad_close(res.grad.at(r, c), num));
      }
    }
  }
}

TEST_CASE("temperature rescales the similarity landscape") {
  std::mt19937 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat emb(6, 3);
  for (double& v : emb.data) v = g(rng);
  const std::vector<int> labels = {0, 0, 1, 1, 2, 2};
  const double warm = supcon_loss(emb, labels, 1.0, true);
  const double cold = supcon_loss(emb, labels, 0.05, true);
  CHECK(warm != Catch::Approx(cold));
  CHECK_THROWS_AS(supcon_loss(emb, labels, 0.0, true), Error);
}
