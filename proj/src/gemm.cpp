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

#include "gemm.hpp"

#include <Eigen/Core>

#include "sresnet/tensor.hpp"

namespace sresnet::detail {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;

template <typename T, typename AType, typename BType>
void product(Trans ta, Trans tb, const AType& a, const BType& b, Eigen::Map<RowMat<T>>& c, bool accumulate) {
  if (!accumulate) c.setZero();
  if (ta == Trans::No && tb == Trans::No) {
    c.noalias() += a * b;
  } else if (ta == Trans::No) {
    c.noalias() += a * b.transpose();
  } else if (tb == Trans::No) {
    c.noalias() += a.transpose() * b;
  } else {
    c.noalias() += a.transpose() * b.transpose();
  }
}

}  // namespace

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c, bool accumulate) {
  const auto rows_a = static_cast<Eigen::Index>(ta == Trans::No ? m : k);
  const auto cols_a = static_cast<Eigen::Index>(ta == Trans::No ? k : m);
  const auto rows_b = static_cast<Eigen::Index>(tb == Trans::No ? k : n);
  const auto cols_b = static_cast<Eigen::Index>(tb == Trans::No ? n : k);
  const auto em = static_cast<Eigen::Index>(m);
  const auto en = static_cast<Eigen::Index>(n);

  if (precision() == Precision::Double) {
    ConstMap<double> am(a, rows_a, cols_a);
    ConstMap<double> bm(b, rows_b, cols_b);
    Eigen::Map<RowMat<double>> cm(c, em, en);
    product<double>(ta, tb, am, bm, cm, accumulate);
    return;
  }

  RowMat<float> af = ConstMap<double>(a, rows_a, cols_a).cast<float>();
  RowMat<float> bf = ConstMap<double>(b, rows_b, cols_b).cast<float>();
  RowMat<float> cf(em, en);
  Eigen::Map<RowMat<float>> cfm(cf.data(), em, en);
  product<float>(ta, tb, af, bf, cfm, false);
  Eigen::Map<RowMat<double>> cm(c, em, en);
  if (accumulate) {
    cm += cf.cast<double>();
  } else {
    cm = cf.cast<double>();
  }
}

}  // namespace sresnet::detail
