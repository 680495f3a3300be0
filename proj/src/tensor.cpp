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

#include "sresnet/tensor.hpp"

#include <atomic>
#include <sstream>
#include <utility>

#include "sresnet/error.hpp"

namespace sresnet {

namespace detail {

struct TapeNode {
  std::shared_ptr<TensorImpl> output;
  BackwardFn backward;
};

struct TapeState {
  std::vector<TapeNode> nodes;
  bool consumed = false;
};

namespace {
thread_local std::shared_ptr<TapeState> active_tape;
std::atomic<Precision> global_precision{Precision::Double};
}  // namespace

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!active_tape) return false;
  for (const Tensor* t : inputs) {
    if (t != nullptr && t->defined() && t->requires_grad()) return true;
  }
  return false;
}

void record(Tensor& out, std::initializer_list<const Tensor*> inputs, BackwardFn fn) {
  if (!should_record(inputs)) return;
  if (active_tape->consumed) throw ConsumedTapeError("cannot record onto a consumed tape");
  auto& impl = *out.impl();
  impl.requires_grad = true;
  impl.tape = active_tape;
  impl.node = active_tape->nodes.size();
  active_tape->nodes.push_back(TapeNode{out.impl(), std::move(fn)});
}

}  // namespace detail

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void set_precision(Precision p) { detail::global_precision.store(p); }
Precision precision() { return detail::global_precision.load(); }

Tensor::Tensor() = default;

Tensor::Tensor(Shape shape, double fill) : impl_(std::make_shared<detail::TensorImpl>()) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  impl_->data.assign(shape_numel(shape), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : impl_(std::make_shared<detail::TensorImpl>()) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " needs " + std::to_string(shape_numel(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

Tensor Tensor::scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::dim(std::size_t axis) const { return impl_->shape.at(axis); }
std::size_t Tensor::rank() const { return impl_->shape.size(); }
std::size_t Tensor::numel() const { return impl_->data.size(); }

std::span<double> Tensor::data() { return impl_->data; }
std::span<const double> Tensor::data() const { return impl_->data; }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on a tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

double& Tensor::operator[](std::size_t i) { return impl_->data[i]; }
double Tensor::operator[](std::size_t i) const { return impl_->data[i]; }

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() {
  impl_->ensure_grad();
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::clone() const { return Tensor(impl_->shape, impl_->data); }

void Tensor::assign(const Tensor& other) {
  if (other.shape() != shape()) {
    throw DimensionError("assign: shape " + shape_str(other.shape()) + " into " + shape_str(shape()));
  }
  impl_->data = other.impl_->data;
}

Tape::Tape() : state_(std::make_shared<detail::TapeState>()) {}
Tape::~Tape() = default;

Tape::Recording::Recording(Tape& tape) : previous_(std::exchange(detail::active_tape, tape.state_)) {}
Tape::Recording::~Recording() { detail::active_tape = std::move(previous_); }

std::size_t Tape::size() const { return state_->nodes.size(); }
bool Tape::consumed() const { return state_->consumed; }

NoGradGuard::NoGradGuard() : previous_(std::exchange(detail::active_tape, nullptr)) {}
NoGradGuard::~NoGradGuard() { detail::active_tape = std::move(previous_); }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  auto state = loss.impl()->tape.lock();
  if (!state) throw ContractError("backward: loss is not on a live tape");
  if (state->consumed) throw ConsumedTapeError("backward: tape already consumed");
  const std::size_t root = loss.impl()->node;
  if (root >= state->nodes.size() || state->nodes[root].output != loss.impl()) {
    throw ContractError("backward: loss is not recorded on its tape");
  }

  state->consumed = true;
  // Fresh gradient buffers for intermediate results; leaves keep accumulating.
  for (std::size_t i = 0; i <= root; ++i) state->nodes[i].output->grad.clear();
  loss.impl()->ensure_grad();
  loss.impl()->grad[0] += 1.0;

  for (std::size_t i = root + 1; i-- > 0;) {
    auto& node = state->nodes[i];
    if (node.output->grad.empty()) continue;
    node.backward(node.output->grad);
  }
  state->nodes.clear();
}

}  // namespace sresnet
