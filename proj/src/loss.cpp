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

#include "sresnet/loss.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sresnet/error.hpp"

namespace sresnet {

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (!logits.defined() || logits.rank() != 2) {
    throw DimensionError("cross_entropy: logits must be [N,K], got " +
                         (logits.defined() ? shape_str(logits.shape()) : std::string("<undefined>")));
  }
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                         " rows");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw ContractError("cross_entropy: label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                          " outside [0, " + std::to_string(k) + ")");
    }
  }

  std::vector<double> softmax(n * k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data().data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    total += lse - row[labels[i]];
    for (std::size_t j = 0; j < k; ++j) softmax[i * k + j] = std::exp(row[j] - lse);
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(n));

  detail::record(out, {&logits},
                 [n, k, softmax = std::move(softmax), labels = std::vector<int>(labels.begin(), labels.end()),
                  li = logits.impl()](std::span<const double> gy) {
                   double* dl = detail::grad_sink(li);
                   const double g = gy[0] / static_cast<double>(n);
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < k; ++j) {
                       const double onehot = static_cast<int>(j) == labels[i] ? 1.0 : 0.0;
                       dl[i * k + j] += g * (softmax[i * k + j] - onehot);
                     }
                 });
  return out;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (logits[i * k + j] > logits[i * k + best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace sresnet
