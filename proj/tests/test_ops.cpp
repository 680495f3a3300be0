/* Copyright 2026 The SResNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <doctest.h>

#include <cmath>

#include "sresnet/error.hpp"
#include "sresnet/ops.hpp"
#include "support/oracles.hpp"

using namespace sresnet;
using namespace sresnet::testing;

namespace {

std::vector<double> vals(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Tensor running(std::size_t c, double v) { return Tensor(Shape{c}, v); }

}  // namespace

TEST_CASE("tensor construction checks sizes") {
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), DimensionError);
  Tensor t(Shape{2, 3}, 1.5);
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t[5] == 1.5);
}

TEST_CASE("conv2d small examples") {
  Tensor x(Shape{1, 1, 2, 2}, 1.0);
  Tensor w(Shape{1, 1, 1, 1}, 2.0);
  CHECK(vals(conv2d(x, w, 1, 0)) == std::vector<double>{2, 2, 2, 2});

  Tensor x9(Shape{1, 1, 3, 3}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor ones(Shape{1, 1, 3, 3}, 1.0);
  const Tensor y = conv2d(x9, ones, 1, 0);
  CHECK(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y[0] == 45.0);
}

TEST_CASE("conv2d matches the six-loop reference") {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor x = random_tensor({2, 3, 8, 8}, rng);
    const Tensor w = random_tensor({4, 3, 3, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    const Tensor y = conv2d(x, w, b, 2, 1);
    REQUIRE(y.shape() == Shape{2, 4, 4, 4});
    std::size_t oh = 0, ow = 0;
    const auto ref = conv2d_reference(x, w, vals(b), 2, 1, oh, ow);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(y[i] - ref[i]) < 1e-10);
  }
}

TEST_CASE("conv2d shape errors") {
  Tensor x(Shape{1, 3, 4, 4});
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{2, 2, 3, 3}), 1, 0), DimensionError);
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{2, 3, 7, 7}), 1, 0), DimensionError);
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{2, 3, 3, 3}), 0, 0), ConfigError);
}

TEST_CASE("batch_norm2d examples") {
  BatchNormOptions train_opts;
  SUBCASE("constant input is centered to zero") {
    Tensor x(Shape{2, 1, 2, 2}, 3.0);
    Tensor rm = running(1, 0.0), rv = running(1, 1.0);
    const Tensor y = batch_norm2d(x, Tensor(Shape{1}, 1.0), Tensor(Shape{1}, 0.0), rm, rv, train_opts);
    for (double v : y.data()) CHECK(v == 0.0);
  }
  SUBCASE("values {0, 2} map to {-1, +1}") {
    Tensor x(Shape{2, 1, 1, 1}, std::vector<double>{0.0, 2.0});
    Tensor rm = running(1, 0.0), rv = running(1, 1.0);
    BatchNormOptions o;
    o.eps = 1e-12;
    const Tensor y = batch_norm2d(x, Tensor(Shape{1}, 1.0), Tensor(Shape{1}, 0.0), rm, rv, o);
    CHECK(y[0] == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-5));
    // Running stats: (1 - 0.1) * old + 0.1 * batch, batch var biased (= 1).
    CHECK(rm[0] == doctest::Approx(0.1));
    CHECK(rv[0] == doctest::Approx(1.0));
  }
  SUBCASE("inference with identity stats adds beta") {
    Xoshiro256 rng(3);
    const Tensor x = random_tensor({2, 2, 3, 3}, rng);
    Tensor rm = running(2, 0.0), rv = running(2, 1.0);
    BatchNormOptions o;
    o.training = false;
    o.eps = 1e-300;
    const Tensor y = batch_norm2d(x, Tensor(Shape{2}, 1.0), Tensor(Shape{2}, 3.0), rm, rv, o);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i] + 3.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    Tensor rm = running(1, 0.0), rv = running(1, 1.0);
    BatchNormOptions bad;
    bad.eps = 0.0;
    CHECK_THROWS_AS(batch_norm2d(Tensor(Shape{2, 1, 1, 1}), Tensor(Shape{1}, 1.0), Tensor(Shape{1}), rm, rv, bad),
                    ConfigError);
    CHECK_THROWS_AS(
        batch_norm2d(Tensor(Shape{1, 1, 1, 1}), Tensor(Shape{1}, 1.0), Tensor(Shape{1}), rm, rv, train_opts),
        DegenerateBatchError);
  }
}

TEST_CASE("relu and sigmoid") {
  CHECK(vals(relu(Tensor(Shape{3}, std::vector<double>{-1, 0, 2}))) == std::vector<double>{0, 0, 2});
  CHECK(sigmoid(Tensor(Shape{1}, 0.0))[0] == 0.5);
  CHECK(sigmoid(Tensor(Shape{1}, -800.0))[0] >= 0.0);
  CHECK(std::isfinite(sigmoid(Tensor(Shape{1}, -800.0))[0]));

  Tensor x(Shape{1}, 0.0);
  const auto g = gradient_check([&] { return sum(sigmoid(x)); }, {x});
  CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-12));
  const double h = 1e-5;
  const double fd = (1.0 / (1.0 + std::exp(-h)) - 1.0 / (1.0 + std::exp(h))) / (2 * h);
  CHECK(std::abs(x.grad()[0] - fd) < 1e-8);
  CHECK(g.max_rel_error < 1e-8);
}

TEST_CASE("max_pool2d") {
  Tensor x(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  CHECK(vals(max_pool2d(x, 2, 2)) == std::vector<double>{4});

  SUBCASE("tie sends gradient to the first element") {
    Tensor t(Shape{1, 1, 2, 2}, 5.0);
    t.set_requires_grad(true);
    Tape tape;
    Tensor l;
    {
      auto r = tape.record();
      l = sum(max_pool2d(t, 2, 2));
    }
    backward(l);
    CHECK(vals(Tensor(Shape{4}, std::vector<double>(t.grad().begin(), t.grad().end()))) ==
          std::vector<double>{1, 0, 0, 0});
  }
  SUBCASE("brute-force window maxima") {
    Xoshiro256 rng(5);
    const Tensor r = random_tensor({1, 1, 6, 6}, rng);
    const Tensor y = max_pool2d(r, 2, 2);
    REQUIRE(y.shape() == Shape{1, 1, 3, 3});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double m = -1e300;
        for (std::size_t p = 0; p < 2; ++p)
          for (std::size_t q = 0; q < 2; ++q) m = std::max(m, r[(2 * i + p) * 6 + 2 * j + q]);
        CHECK(y[i * 3 + j] == m);
      }
  }
  CHECK_THROWS_AS(max_pool2d(Tensor(Shape{1, 1, 2, 2}), 3, 1), DimensionError);
}

TEST_CASE("global_avg_pool") {
  CHECK(vals(global_avg_pool(Tensor(Shape{1, 1, 2, 2}, std::vector<double>{1, 3, 5, 7}))) == std::vector<double>{4});
  CHECK(global_avg_pool(Tensor(Shape{1, 1, 3, 3}, 0.7))[0] == doctest::Approx(0.7).epsilon(1e-15));
  Xoshiro256 rng(8);
  const Tensor x = random_tensor({2, 8, 5, 5}, rng);
  const Tensor y = global_avg_pool(x);
  REQUIRE(y.shape() == Shape{2, 8});
  for (std::size_t nc = 0; nc < 16; ++nc) {
    double s = 0.0;
    for (std::size_t k = 0; k < 25; ++k) s += x[nc * 25 + k];
    CHECK(std::abs(y[nc] - s / 25.0) < 1e-12);
  }
}

TEST_CASE("linear") {
  Tensor eye(Shape{3, 3}, std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor in(Shape{2, 3}, std::vector<double>{1, -2, 3, 4, 5, -6});
  CHECK(vals(linear(in, eye, Tensor(Shape{3}, 0.0))) == vals(in));
  CHECK(vals(linear(Tensor(Shape{1, 2}, std::vector<double>{1, 2}), Tensor(Shape{1, 2}, std::vector<double>{3, 4}),
                    Tensor(Shape{1}, 5.0))) == std::vector<double>{16});

  Xoshiro256 rng(9);
  const Tensor a = random_tensor({4, 10}, rng);
  const Tensor w = random_tensor({7, 10}, rng);
  const Tensor y = linear(a, w, Tensor());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 10; ++k) s += a[i * 10 + k] * w[j * 10 + k];
      CHECK(std::abs(y[i * 7 + j] - s) < 1e-10);
    }
  CHECK_THROWS_AS(linear(a, random_tensor({7, 9}, rng), Tensor()), DimensionError);
}

TEST_CASE("backward semantics") {
  SUBCASE("x*x at 3 gives 6") {
    Tensor x(Shape{1}, 3.0);
    x.set_requires_grad(true);
    Tape tape;
    Tensor l;
    {
      auto r = tape.record();
      l = sum(mul(x, x));
    }
    backward(l);
    CHECK(x.grad()[0] == 6.0);
  }
  SUBCASE("relu(-x) at 2 gives 0") {
    Tensor x(Shape{1}, 2.0);
    x.set_requires_grad(true);
    Tape tape;
    Tensor l;
    {
      auto r = tape.record();
      l = sum(relu(scale(x, -1.0)));
    }
    backward(l);
    CHECK(x.grad()[0] == 0.0);
  }
  SUBCASE("x + x accumulates to exactly 2") {
    Tensor x(Shape{3}, 0.3);
    x.set_requires_grad(true);
    Tape tape;
    Tensor l;
    {
      auto r = tape.record();
      l = sum(add(x, x));
    }
    backward(l);
    for (double g : x.grad()) CHECK(g == 2.0);
  }
  SUBCASE("second backward reports a consumed tape") {
    Tensor x(Shape{1}, 1.0);
    x.set_requires_grad(true);
    Tape tape;
    Tensor l;
    {
      auto r = tape.record();
      l = sum(mul(x, x));
    }
    backward(l);
    CHECK(tape.consumed());
    CHECK_THROWS_AS(backward(l), ConsumedTapeError);
  }
  SUBCASE("non-scalar loss is a contract error") {
    Tensor x(Shape{2}, 1.0);
    x.set_requires_grad(true);
    Tape tape;
    Tensor y;
    {
      auto r = tape.record();
      y = mul(x, x);
    }
    CHECK_THROWS_AS(backward(y), ContractError);
  }
  SUBCASE("scaling the loss scales every gradient") {
    Xoshiro256 rng(4);
    Tensor w = random_tensor({3, 5}, rng);
    const Tensor in = random_tensor({2, 5}, rng);
    w.set_requires_grad(true);
    auto grads = [&](double a) {
      w.zero_grad();
      Tape tape;
      Tensor l;
      {
        auto r = tape.record();
        l = scale(sum(relu(linear(in, w, Tensor()))), a);
      }
      backward(l);
      return std::vector<double>(w.grad().begin(), w.grad().end());
    };
    const auto g1 = grads(1.0);
    const auto g4 = grads(4.0);
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g4[i] == 4.0 * g1[i]);
  }
  SUBCASE("nothing is recorded without an active recording") {
    Tensor x(Shape{1}, 1.0);
    x.set_requires_grad(true);
    Tape tape;
    const Tensor y = mul(x, x);
    CHECK(tape.size() == 0);
    {
      auto r = tape.record();
      NoGradGuard ng;
      (void)mul(x, x);
    }
    CHECK(tape.size() == 0);
  }
}

TEST_CASE("determinism: identical inputs give bit-identical outputs and gradients") {
  auto run = [] {
    Xoshiro256 rng(21);
    Tensor x = random_tensor({2, 3, 6, 6}, rng);
    Tensor w = random_tensor({4, 3, 3, 3}, rng);
    w.set_requires_grad(true);
    Tape tape;
    Tensor l;
    {
      auto r = tape.record();
      l = sum(relu(conv2d(x, w, 1, 1)));
    }
    backward(l);
    std::vector<double> out{l.item()};
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("gradient oracle per op (20 trials each)") {
  Xoshiro256 rng(2026);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    {
      Tensor x = random_tensor({2, 2, 5, 5}, rng), w = random_tensor({3, 2, 3, 3}, rng), b = random_tensor({3}, rng);
      const Tensor r = random_tensor({2, 3, 3, 3}, rng);
      const auto g = gradient_check([&] { return weighted_sum(conv2d(x, w, b, 2, 1), r); }, {x, w, b});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "conv2d " << g.worst);
    }
    {
      Tensor x = random_tensor({3, 2, 2, 2}, rng, -2, 2), gamma = random_tensor({2}, rng, 0.5, 1.5),
             beta = random_tensor({2}, rng);
      Tensor rm(Shape{2}, 0.0), rv(Shape{2}, 1.0);
      const Tensor r = random_tensor({3, 2, 2, 2}, rng);
      const auto g = gradient_check(
          [&] { return weighted_sum(batch_norm2d(x, gamma, beta, rm, rv, BatchNormOptions{}), r); }, {x, gamma, beta});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "batch_norm2d " << g.worst);
    }
    {
      Tensor x = random_away_from_zero({2, 7}, rng);
      const Tensor r = random_tensor({2, 7}, rng);
      const auto g = gradient_check([&] { return weighted_sum(relu(x), r); }, {x});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "relu " << g.worst);
    }
    {
      Tensor x = random_tensor({2, 7}, rng, -6, 6);
      const Tensor r = random_tensor({2, 7}, rng);
      const auto g = gradient_check([&] { return weighted_sum(sigmoid(x), r); }, {x});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "sigmoid " << g.worst);
    }
    {
      Tensor x = random_distinct({1, 2, 5, 5}, rng);
      const Tensor r = random_tensor({1, 2, 3, 3}, rng);
      const auto g = gradient_check([&] { return weighted_sum(max_pool2d(x, 3, 2, 1), r); }, {x});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "max_pool2d " << g.worst);
    }
    {
      Tensor x = random_tensor({2, 3, 4, 4}, rng);
      const Tensor r = random_tensor({2, 3}, rng);
      const auto g = gradient_check([&] { return weighted_sum(global_avg_pool(x), r); }, {x});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "global_avg_pool " << g.worst);
    }
    {
      Tensor x = random_tensor({3, 4}, rng), w = random_tensor({5, 4}, rng), b = random_tensor({5}, rng);
      const Tensor r = random_tensor({3, 5}, rng);
      const auto g = gradient_check([&] { return weighted_sum(linear(x, w, b), r); }, {x, w, b});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "linear " << g.worst);
    }
    {
      Tensor x = random_tensor({2, 3, 2, 2}, rng), w = random_tensor({2, 3}, rng, 0.1, 1.0);
      const Tensor r = random_tensor({2, 3, 2, 2}, rng);
      const auto g = gradient_check([&] { return weighted_sum(channel_scale(x, w), r); }, {x, w});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, "channel_scale " << g.worst);
    }
  }
}

TEST_CASE("composite conv -> bn -> relu -> gap -> linear gradient") {
  Xoshiro256 rng(77);
  Tensor x = random_tensor({2, 2, 5, 5}, rng);
  Tensor w = random_tensor({3, 2, 3, 3}, rng);
  Tensor gamma = random_tensor({3}, rng, 0.5, 1.5), beta = random_tensor({3}, rng);
  Tensor fw = random_tensor({4, 3}, rng), fb = random_tensor({4}, rng);
  Tensor rm(Shape{3}, 0.0), rv(Shape{3}, 1.0);
  const Tensor r = random_tensor({2, 4}, rng);
  const auto g = gradient_check(
      [&] {
        const Tensor h = relu(batch_norm2d(conv2d(x, w, 1, 1), gamma, beta, rm, rv, BatchNormOptions{}));
        return weighted_sum(linear(global_avg_pool(h), fw, fb), r);
      },
      {w, gamma, beta, fw, fb});
  CHECK_MESSAGE(g.max_rel_error < 1e-4, g.worst);
}
