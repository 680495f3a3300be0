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

// Independent reference implementations used by the tests. Nothing here
// calls into the library's numeric kernels: the loops are written out so
// that a bug in the library cannot hide in its own oracle.

#ifndef SRESNET_TESTS_ORACLES_HPP_
#define SRESNET_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sresnet/ops.hpp"
#include "sresnet/rng.hpp"
#include "sresnet/tensor.hpp"

namespace sresnet::testing {

inline Tensor random_tensor(const Shape& shape, Xoshiro256& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

/// Values bounded away from zero (|v| in [0.05, 1]), so kinks sit far from
/// every finite-difference probe.
inline Tensor random_away_from_zero(const Shape& shape, Xoshiro256& rng) {
  Tensor t(shape);
  for (double& v : t.data()) v = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.05, 1.0);
  return t;
}

/// Distinct values spaced 0.01 apart in random order: no ties, no
/// near-ties within a finite-difference step.
inline Tensor random_distinct(const Shape& shape, Xoshiro256& rng) {
  Tensor t(shape);
  std::vector<double> vals(t.numel());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.01 * static_cast<double>(i) - 0.005 * vals.size();
  shuffle(vals, rng);
  std::copy(vals.begin(), vals.end(), t.data().begin());
  return t;
}

/// Six-loop direct cross-correlation.
inline std::vector<double> conv2d_reference(const Tensor& x, const Tensor& w, const std::vector<double>& bias,
                                            std::size_t stride, std::size_t pad, std::size_t& oh, std::size_t& ow) {
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  oh = (h + 2 * pad - k) / stride + 1;
  ow = (wd + 2 * pad - k) / stride + 1;
  std::vector<double> out(n * cout * oh * ow, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < cin; ++c)
            for (std::size_t p = 0; p < k; ++p)
              for (std::size_t q = 0; q < k; ++q) {
                const long long yy = static_cast<long long>(i * stride + p) - static_cast<long long>(pad);
                const long long xx = static_cast<long long>(j * stride + q) - static_cast<long long>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<long long>(h) || xx >= static_cast<long long>(wd)) continue;
                acc += x[((b * cin + c) * h + static_cast<std::size_t>(yy)) * wd + static_cast<std::size_t>(xx)] *
                       w[((o * cin + c) * k + p) * k + q];
              }
          out[((b * cout + o) * oh + i) * ow + j] = acc;
        }
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps vanishing gradients from
/// turning rounding noise into a large relative error.
inline double rel_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

/// Central differences (step h) of `loss` with respect to every element of
/// every tensor in `inputs`, compared with the tape's gradients.
inline GradCheck gradient_check(const std::function<Tensor()>& loss, std::vector<Tensor> inputs, double h = 1e-5) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  {
    Tape tape;
    Tensor l;
    {
      auto rec = tape.record();
      l = loss();
    }
    backward(l);
  }
  GradCheck result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor& t = inputs[k];
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = loss().item();
      t[i] = saved - h;
      const double down = loss().item();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double e = rel_error(analytic[i], numeric);
      ++result.checked;
      if (e > result.max_rel_error) {
        result.max_rel_error = e;
        result.worst = "input " + std::to_string(k) + " element " + std::to_string(i) + ": autodiff " +
                       std::to_string(analytic[i]) + " vs numeric " + std::to_string(numeric);
      }
    }
  }
  return result;
}

/// sum(out * r) for a fixed random r: a scalar whose gradient exercises
/// every output element with a different weight.
inline Tensor weighted_sum(const Tensor& out, const Tensor& r) { return sum(mul(out, r)); }

/// -x[label] + log(sum(exp(x))) per row in long double, averaged.
inline long double cross_entropy_literal(const Tensor& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(static_cast<long double>(logits[i * k + j]));
    total += -static_cast<long double>(logits[i * k + static_cast<std::size_t>(labels[i])]) + std::log(s);
  }
  return total / static_cast<long double>(n);
}

/// One Adam update on a flat parameter vector, written from the update rule.
struct ReferenceAdam {
  double lr, b1, b2, eps;
  std::vector<double> m, v;
  long t = 0;

  void step(std::vector<double>& theta, const std::vector<double>& g) {
    if (m.empty()) m.assign(theta.size(), 0.0), v.assign(theta.size(), 0.0);
    ++t;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / (1.0 - std::pow(b1, static_cast<double>(t)));
      const double vhat = v[i] / (1.0 - std::pow(b2, static_cast<double>(t)));
      theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
};

}  // namespace sresnet::testing

#endif  // SRESNET_TESTS_ORACLES_HPP_
