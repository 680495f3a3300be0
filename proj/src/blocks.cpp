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

#include "sresnet/blocks.hpp"

#include <algorithm>
#include <cmath>

#include "sresnet/error.hpp"
#include "sresnet/ops.hpp"
#include "sresnet/rng.hpp"

namespace sresnet {

std::uint64_t layer_seed(std::uint64_t base, const std::string& name) { return derive_seed(base, fnv1a(name)); }

Conv2d Conv2d::make(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
                    std::uint64_t seed) {
  Conv2d c;
  c.weight = Tensor(Shape{out, in, kernel, kernel});
  c.stride = stride;
  c.padding = padding;
  Xoshiro256 rng(seed);
  const double std_dev = std::sqrt(2.0 / static_cast<double>(in * kernel * kernel));
  for (double& v : c.weight.data()) v = rng.normal() * std_dev;
  c.weight.set_requires_grad();
  return c;
}

Tensor Conv2d::forward(const Tensor& x) const { return conv2d(x, weight, bias, stride, padding); }

void Conv2d::visit(const std::string& prefix, const TensorVisitor& fn) {
  fn(prefix + ".weight", weight, TensorRole::Parameter);
  if (bias.defined()) fn(prefix + ".bias", bias, TensorRole::Parameter);
}

BatchNorm2d BatchNorm2d::make(std::size_t channels) {
  BatchNorm2d bn;
  bn.gamma = Tensor(Shape{channels}, 1.0);
  bn.beta = Tensor(Shape{channels}, 0.0);
  bn.running_mean = Tensor(Shape{channels}, 0.0);
  bn.running_var = Tensor(Shape{channels}, 1.0);
  bn.gamma.set_requires_grad();
  bn.beta.set_requires_grad();
  return bn;
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
  return batch_norm2d(x, gamma, beta, running_mean, running_var, BatchNormOptions{training, momentum, eps});
}

void BatchNorm2d::visit(const std::string& prefix, const TensorVisitor& fn) {
  fn(prefix + ".gamma", gamma, TensorRole::Parameter);
  fn(prefix + ".beta", beta, TensorRole::Parameter);
  fn(prefix + ".running_mean", running_mean, TensorRole::Buffer);
  fn(prefix + ".running_var", running_var, TensorRole::Buffer);
}

Linear Linear::make(std::size_t in, std::size_t out, bool with_bias, std::uint64_t seed) {
  Linear l;
  Xoshiro256 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  l.weight = Tensor(Shape{out, in});
  for (double& v : l.weight.data()) v = rng.uniform(-bound, bound);
  l.weight.set_requires_grad();
  if (with_bias) {
    l.bias = Tensor(Shape{out});
    for (double& v : l.bias.data()) v = rng.uniform(-bound, bound);
    l.bias.set_requires_grad();
  }
  return l;
}

Tensor Linear::forward(const Tensor& x) const { return linear(x, weight, bias); }

void Linear::visit(const std::string& prefix, const TensorVisitor& fn) {
  fn(prefix + ".weight", weight, TensorRole::Parameter);
  if (bias.defined()) fn(prefix + ".bias", bias, TensorRole::Parameter);
}

ResidualBlock ResidualBlock::make(std::size_t in, std::size_t out, std::size_t stride, std::uint64_t seed,
                                  const std::string& name) {
  ResidualBlock b;
  b.conv1 = Conv2d::make(in, out, 3, stride, 1, layer_seed(seed, name + ".conv1"));
  b.bn1 = BatchNorm2d::make(out);
  b.conv2 = Conv2d::make(out, out, 3, 1, 1, layer_seed(seed, name + ".conv2"));
  b.bn2 = BatchNorm2d::make(out);
  if (stride != 1 || in != out) {
    b.shortcut = Projection{Conv2d::make(in, out, 1, stride, 0, layer_seed(seed, name + ".shortcut.conv")),
                            BatchNorm2d::make(out)};
  }
  return b;
}

Tensor ResidualBlock::forward(const Tensor& x, bool training) {
  if (x.rank() != 4 || x.dim(1) != in_channels()) {
    throw DimensionError("residual block expects " + std::to_string(in_channels()) + " input channels, got " +
                         shape_str(x.shape()));
  }
  Tensor f = relu(bn1.forward(conv1.forward(x), training));
  f = bn2.forward(conv2.forward(f), training);
  Tensor identity = shortcut ? shortcut->bn.forward(shortcut->conv.forward(x), training) : x;
  return relu(add(f, identity));
}

void ResidualBlock::visit(const std::string& prefix, const TensorVisitor& fn) {
  conv1.visit(prefix + ".conv1", fn);
  bn1.visit(prefix + ".bn1", fn);
  conv2.visit(prefix + ".conv2", fn);
  bn2.visit(prefix + ".bn2", fn);
  if (shortcut) {
    shortcut->conv.visit(prefix + ".shortcut.conv", fn);
    shortcut->bn.visit(prefix + ".shortcut.bn", fn);
  }
}

SEBlock SEBlock::make(std::size_t channels, std::size_t reduction, bool with_bias, std::uint64_t seed,
                      const std::string& name) {
  if (channels == 0) throw ConfigError("SE block needs at least one channel");
  if (reduction == 0) throw ConfigError("SE reduction ratio must be positive");
  SEBlock se;
  se.channels = channels;
  se.reduction = reduction;
  const std::size_t hidden = std::max<std::size_t>(1, channels / reduction);
  se.fc1 = Linear::make(channels, hidden, with_bias, layer_seed(seed, name + ".fc1"));
  se.fc2 = Linear::make(hidden, channels, with_bias, layer_seed(seed, name + ".fc2"));
  return se;
}

Tensor SEBlock::gate(const Tensor& x) const {
  if (x.rank() != 4 || x.dim(1) != channels) {
    throw DimensionError("SE block expects " + std::to_string(channels) + " channels, got " + shape_str(x.shape()));
  }
  Tensor squeezed = global_avg_pool(x);
  return sigmoid(fc2.forward(relu(fc1.forward(squeezed))));
}

Tensor SEBlock::forward(const Tensor& x) const { return channel_scale(x, gate(x)); }

void SEBlock::visit(const std::string& prefix, const TensorVisitor& fn) {
  fc1.visit(prefix + ".fc1", fn);
  fc2.visit(prefix + ".fc2", fn);
}

}  // namespace sresnet
