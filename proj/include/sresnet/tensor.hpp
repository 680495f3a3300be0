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

#ifndef SRESNET_TENSOR_HPP_
#define SRESNET_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sresnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Arithmetic precision of the matrix-product kernels behind conv2d and
/// linear. Storage is always double; Single rounds the GEMM operands to
/// float. Gradient checks must run with Double.
enum class Precision { Double, Single };

void set_precision(Precision p);
Precision precision();

namespace detail {
struct TensorImpl;
struct TapeState;
}  // namespace detail

/// Shared handle to a row-major n-dimensional array of doubles.
///
/// Copies alias the same storage (like a PyTorch tensor); use clone() for a
/// deep copy. A tensor produced by an operation while a Tape is recording and
/// at least one input requires a gradient is attached to that tape, and
/// backward() on a scalar result fills grad() for every reachable input.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const;
  std::size_t numel() const;

  std::span<double> data();
  std::span<const double> data() const;
  double item() const;
  double& operator[](std::size_t i);
  double operator[](std::size_t i) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Deep copy of values only: not on any tape, no grad.
  Tensor clone() const;
  /// Copies values of `other` into this tensor's storage (shapes must match).
  void assign(const Tensor& other);

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Ordered record of operations for reverse-mode differentiation.
///
/// A tape records only while a Recording guard from record() is alive on the
/// current thread. One tape, one writer. backward() replays it once and
/// consumes it.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  class Recording {
   public:
    explicit Recording(Tape& tape);
    ~Recording();
    Recording(const Recording&) = delete;
    Recording& operator=(const Recording&) = delete;

   private:
    std::shared_ptr<detail::TapeState> previous_;
  };

  [[nodiscard]] Recording record() { return Recording(*this); }

  std::size_t size() const;
  bool consumed() const;

 private:
  friend class Recording;
  std::shared_ptr<detail::TapeState> state_;
};

/// Suspends recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  std::shared_ptr<detail::TapeState> previous_;
};

/// Reverse pass from a scalar loss. Gradients accumulate into grad() of
/// every requires_grad tensor reachable from `loss`; the tape is consumed.
void backward(const Tensor& loss);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::weak_ptr<TapeState> tape;
  std::size_t node = 0;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

using BackwardFn = std::function<void(std::span<const double> grad_out)>;

/// True when an operation over `inputs` must be recorded.
bool should_record(std::initializer_list<const Tensor*> inputs);

/// Attaches `out` to the active tape with the given backward rule. The rule
/// receives d(loss)/d(out) and accumulates into its captured inputs, which
/// it must only touch through TensorImpl::ensure_grad()/grad.
void record(Tensor& out, std::initializer_list<const Tensor*> inputs, BackwardFn fn);

/// Gradient sink for an input: allocated on demand, or null when the input
/// does not participate in differentiation.
inline double* grad_sink(const std::shared_ptr<TensorImpl>& impl) {
  if (!impl->requires_grad) return nullptr;
  impl->ensure_grad();
  return impl->grad.data();
}

}  // namespace detail

}  // namespace sresnet

#endif  // SRESNET_TENSOR_HPP_
