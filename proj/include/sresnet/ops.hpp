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

#ifndef SRESNET_OPS_HPP_
#define SRESNET_OPS_HPP_

#include <cstddef>

#include "sresnet/tensor.hpp"

// Differentiable tensor operations. Every function here is pure in its
// inputs (batch_norm2d additionally updates running statistics in training
// mode) and is recorded on the active tape when an input requires a grad.
// Reductions run in a fixed row-major order so results are bit-reproducible.

namespace sresnet {

/// 2-D cross-correlation (no kernel flip). `bias` may be an undefined
/// tensor. input [N,Cin,H,W], weight [Cout,Cin,kH,kW] -> [N,Cout,H',W'].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding);
Tensor conv2d(const Tensor& input, const Tensor& weight, std::size_t stride, std::size_t padding);

struct BatchNormOptions {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Per-channel normalization of [N,C,H,W]. Training mode normalizes with
/// biased batch statistics and folds them into running_mean/running_var as
/// (1-momentum)*old + momentum*batch. Inference mode reads running stats.
Tensor batch_norm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                    Tensor& running_var, const BatchNormOptions& options);

Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);

/// Window maximum over [N,C,H,W], padding counts as -infinity. The gradient
/// goes to the first maximal element of each window in row-major order.
Tensor max_pool2d(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t padding = 0);

/// [N,C,H,W] -> [N,C] spatial mean.
Tensor global_avg_pool(const Tensor& input);

/// input [N,Din] * weight[Dout,Din]^T + bias[Dout]. `bias` may be undefined.
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// x[N,C,H,W] scaled by w[N,C] broadcast over H,W.
Tensor channel_scale(const Tensor& x, const Tensor& w);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
/// Sum of all elements as a [1] tensor.
Tensor sum(const Tensor& a);

}  // namespace sresnet

#endif  // SRESNET_OPS_HPP_
