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

#ifndef SRESNET_SIMILARITY_HPP_
#define SRESNET_SIMILARITY_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sresnet {

using Vector = std::vector<double>;

/// Mean feature vector of one class and the number of vectors averaged.
struct Prototype {
  std::string class_name;
  Vector v;
  std::size_t n = 0;
};

/// Sums in input order, divides once by N. Permuting the input changes the
/// result only by rounding; the given order is bit-reproducible.
Prototype prototype(const std::vector<Vector>& features, const std::string& class_name);

/// Dot product over the product of norms, before clamping. Throws
/// UndefinedSimilarityError for a zero-norm argument.
double cosine_unclamped(std::span<const double> x, std::span<const double> y);
/// cosine_unclamped clamped to [-1, 1].
double cosine(std::span<const double> x, std::span<const double> y);
double euclidean(std::span<const double> x, std::span<const double> y);
double manhattan(std::span<const double> x, std::span<const double> y);

/// Copy scaled to unit L2 norm; zero vectors throw UndefinedSimilarityError.
Vector l2_normalized(std::span<const double> x);

struct SimilarityRow {
  std::string class_name;
  double euclidean = 0.0;
  double manhattan = 0.0;
  double cosine = 1.0;
};

struct SimilarityReport {
  std::string reference;
  std::vector<SimilarityRow> rows;  // reference first, then prototype order

  const SimilarityRow& row(const std::string& class_name) const;
};

struct ReportOptions {
  /// L2-normalize prototypes before measuring.
  bool normalize = false;
};

/// All three measures of every prototype against the reference prototype.
/// The reference row is (0, 0, 1) exactly. Unknown reference: LookupError
/// listing the available classes.
SimilarityReport reference_report(const std::vector<Prototype>& prototypes, const std::string& reference,
                                  const ReportOptions& options = {});

}  // namespace sresnet

#endif  // SRESNET_SIMILARITY_HPP_
