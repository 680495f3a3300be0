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

#ifndef SRESNET_SRC_GEMM_HPP_
#define SRESNET_SRC_GEMM_HPP_

#include <cstddef>

namespace sresnet::detail {

enum class Trans { No, Yes };

/// C[m,n] (+)= op(A)[m,k] * op(B)[k,n], all row-major and dense.
/// op(A) is A when Trans::No (A stored m x k) or A^T (A stored k x m).
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c, bool accumulate);

}  // namespace sresnet::detail

#endif  // SRESNET_SRC_GEMM_HPP_
