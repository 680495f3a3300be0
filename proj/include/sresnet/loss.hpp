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

#ifndef SRESNET_LOSS_HPP_
#define SRESNET_LOSS_HPP_

#include <span>
#include <vector>

#include "sresnet/tensor.hpp"

namespace sresnet {

/// Mean over the batch of -x[label] + logsumexp(x), with logsumexp computed
/// around the row maximum. logits [N,K], labels in [0,K). Returns a [1]
/// tensor; differentiable in the logits (grad = softmax - onehot, over N).
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Index of the largest entry of each row; ties go to the lowest index.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace sresnet

#endif  // SRESNET_LOSS_HPP_
