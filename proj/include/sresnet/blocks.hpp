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

#ifndef SRESNET_BLOCKS_HPP_
#define SRESNET_BLOCKS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "sresnet/tensor.hpp"

namespace sresnet {

enum class TensorRole { Parameter, Buffer };

/// Callback used to enumerate named tensors of a layer tree. Names are
/// dotted paths such as "stage3.1.conv2.weight".
using TensorVisitor = std::function<void(const std::string& name, Tensor& tensor, TensorRole role)>;

/// Convolution parameters. Weights use Kaiming fan-in normal init drawn
/// from a stream seeded by `seed`.
struct Conv2d {
  Tensor weight;  // [Cout, Cin, k, k]
  Tensor bias;    // undefined: no bias
  std::size_t stride = 1;
  std::size_t padding = 0;

  static Conv2d make(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
                     std::uint64_t seed);
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }
  Tensor forward(const Tensor& x) const;
  void visit(const std::string& prefix, const TensorVisitor& fn);
};

struct BatchNorm2d {
  Tensor gamma, beta;
  Tensor running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNorm2d make(std::size_t channels);
  Tensor forward(const Tensor& x, bool training);
  void visit(const std::string& prefix, const TensorVisitor& fn);
};

/// Fully connected layer, uniform(+-1/sqrt(fan_in)) init.
struct Linear {
  Tensor weight;  // [Dout, Din]
  Tensor bias;    // [Dout] or undefined

  static Linear make(std::size_t in, std::size_t out, bool with_bias, std::uint64_t seed);
  Tensor forward(const Tensor& x) const;
  void visit(const std::string& prefix, const TensorVisitor& fn);
};

/// Post-activation basic block: relu(bn2(conv2(relu(bn1(conv1(x))))) + shortcut(x)).
/// The shortcut is a strided 1x1 conv + bn when stride or width changes,
/// identity otherwise.
struct ResidualBlock {
  struct Projection {
    Conv2d conv;
    BatchNorm2d bn;
  };

  Conv2d conv1, conv2;
  BatchNorm2d bn1, bn2;
  std::optional<Projection> shortcut;

  static ResidualBlock make(std::size_t in, std::size_t out, std::size_t stride, std::uint64_t seed,
                            const std::string& name);
  std::size_t in_channels() const { return conv1.in_channels(); }
  std::size_t out_channels() const { return conv2.out_channels(); }
  Tensor forward(const Tensor& x, bool training);
  void visit(const std::string& prefix, const TensorVisitor& fn);
};

/// Squeeze-and-excitation gate: w = sigmoid(fc2(relu(fc1(GAP(x))))), output
/// is x scaled per channel by w. The bottleneck width is max(1, C / r).
struct SEBlock {
  std::size_t channels = 0;
  std::size_t reduction = 16;
  Linear fc1, fc2;

  static SEBlock make(std::size_t channels, std::size_t reduction, bool with_bias, std::uint64_t seed,
                      const std::string& name);
  std::size_t hidden() const { return fc1.weight.dim(0); }
  /// Per-channel gate values [N, C], each in (0, 1).
  Tensor gate(const Tensor& x) const;
  Tensor forward(const Tensor& x) const;
  void visit(const std::string& prefix, const TensorVisitor& fn);
};

/// Stable per-layer seed: the same (base seed, layer name) always yields
/// the same initial weights, independent of which other layers exist.
std::uint64_t layer_seed(std::uint64_t base, const std::string& name);

}  // namespace sresnet

#endif  // SRESNET_BLOCKS_HPP_
