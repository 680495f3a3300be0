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

#include "sresnet/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "sresnet/error.hpp"

namespace sresnet {

namespace {

void check_dims(std::span<const double> x, std::span<const double> y, const char* op) {
  if (x.size() != y.size()) {
    throw DimensionError(std::string(op) + ": vector sizes differ (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
  }
}

}  // namespace

Prototype prototype(const std::vector<Vector>& features, const std::string& class_name) {
  if (features.empty()) throw ContractError("prototype: no feature vectors for class '" + class_name + "'");
  const std::size_t d = features.front().size();
  Vector sum(d, 0.0);
  for (const auto& f : features) {
    if (f.size() != d) {
      throw DimensionError("prototype: mixed feature dimensions (" + std::to_string(d) + " vs " +
                           std::to_string(f.size()) + ")");
    }
    for (std::size_t i = 0; i < d; ++i) sum[i] += f[i];
  }
  const double n = static_cast<double>(features.size());
  for (double& s : sum) s /= n;
  return Prototype{class_name, std::move(sum), features.size()};
}

double cosine_unclamped(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y, "cosine");
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (!(nx > 0.0) || !(ny > 0.0)) throw UndefinedSimilarityError("cosine: undefined for a zero-norm vector");
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

double cosine(std::span<const double> x, std::span<const double> y) {
  return std::clamp(cosine_unclamped(x, y), -1.0, 1.0);
}

double euclidean(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y, "euclidean");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double manhattan(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y, "manhattan");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s;
}

Vector l2_normalized(std::span<const double> x) {
  double n = 0.0;
  for (double v : x) n += v * v;
  if (!(n > 0.0)) throw UndefinedSimilarityError("cannot normalize a zero-norm vector");
  n = std::sqrt(n);
  Vector out(x.begin(), x.end());
  for (double& v : out) v /= n;
  return out;
}

const SimilarityRow& SimilarityReport::row(const std::string& class_name) const {
  for (const auto& r : rows)
    if (r.class_name == class_name) return r;
  throw LookupError("no report row for class '" + class_name + "'");
}

SimilarityReport reference_report(const std::vector<Prototype>& prototypes, const std::string& reference,
                                  const ReportOptions& options) {
  const auto ref = std::find_if(prototypes.begin(), prototypes.end(),
                                [&](const Prototype& p) { return p.class_name == reference; });
  if (ref == prototypes.end()) {
    std::string names;
    for (const auto& p : prototypes) names += (names.empty() ? "" : ", ") + p.class_name;
    throw LookupError("reference class '" + reference + "' not found (available: " + names + ")");
  }
  auto prepare = [&](const Prototype& p) { return options.normalize ? l2_normalized(p.v) : p.v; };
  const Vector r = prepare(*ref);

  SimilarityReport report;
  report.reference = reference;
  report.rows.push_back(SimilarityRow{reference, 0.0, 0.0, 1.0});
  for (const auto& p : prototypes) {
    if (&p == &*ref) continue;
    const Vector v = prepare(p);
    report.rows.push_back(SimilarityRow{p.class_name, euclidean(v, r), manhattan(v, r), cosine(v, r)});
  }
  return report;
}

}  // namespace sresnet
