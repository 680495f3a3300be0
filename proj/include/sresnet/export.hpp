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

#ifndef SRESNET_EXPORT_HPP_
#define SRESNET_EXPORT_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sresnet/similarity.hpp"

namespace sresnet {

enum class Metric { Euclidean, Manhattan, Cosine };

std::string_view to_string(Metric m);
/// ConfigError naming the valid metrics.
Metric parse_metric(std::string_view name);
double metric_value(const SimilarityRow& row, Metric m);

/// "class,euclidean,manhattan,cosine", one row per report row, 4 decimals.
std::string export_csv(const SimilarityReport& report);
/// Inverse of export_csv; the first data row is taken as the reference.
SimilarityReport parse_report_csv(std::string_view text);

/// Value as written to CSV/SVG: rounded to 4 decimals, "-0.0000" folded
/// to 0.
double round4(double v);

struct Region {
  std::string id;
  std::string name;
  std::string class_name;
  std::vector<std::pair<double, double>> polygon;
};

/// JSON: {"regions": [{"id", "name", "class", "polygon": [[x, y], ...]}]}.
/// Ids are unique; polygons have at least three finite vertices.
struct RegionMap {
  std::vector<Region> regions;

  void validate() const;
  static RegionMap from_json_text(std::string_view text);
  static RegionMap load(const std::filesystem::path& path);
};

using Rgb8 = std::array<int, 3>;

struct ColorScale {
  Metric metric = Metric::Cosine;
  double min = -1.0;
  double max = 1.0;
  Rgb8 low{247, 251, 255};
  Rgb8 high{8, 48, 107};

  void validate() const;
  /// Linear per channel, rounded to the nearest integer; min -> low and
  /// max -> high exactly. Values outside the domain are clamped.
  Rgb8 color(double value) const;
  /// Cosine: [-1, 1]. Distances: [0, largest value in the report], or
  /// [0, 1] when every distance is zero.
  static ColorScale default_for(Metric m, const SimilarityReport& report);
};

/// Standalone SVG 1.1: one polygon per region (matched ones filled by
/// metric value, unmatched ones gray-hatched), a gradient legend with five
/// ticks, and a comment per clamped value. Byte-identical for equal inputs.
/// Throws ExportError when no region matches a report row.
std::string render_choropleth(const SimilarityReport& report, const RegionMap& map, Metric metric,
                              const ColorScale& scale);

}  // namespace sresnet

#endif  // SRESNET_EXPORT_HPP_
