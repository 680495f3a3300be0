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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include "sresnet/error.hpp"
#include "sresnet/export.hpp"
#include "sresnet/rng.hpp"
#include "sresnet/similarity.hpp"

using namespace sresnet;

namespace {

Vector random_vector(Xoshiro256& rng, std::size_t d) {
  Vector v(d);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

std::vector<Prototype> random_prototypes(Xoshiro256& rng, std::size_t k, std::size_t d) {
  std::vector<Prototype> out;
  for (std::size_t i = 0; i < k; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "pattern_%02zu", i);
    out.push_back({name, random_vector(rng, d), 1});
  }
  return out;
}

RegionMap toy_map() { return RegionMap::load(SRESNET_TEST_DATA_DIR "/toy_regions.json"); }

struct Fill {
  std::string class_name;
  double value;
  Rgb8 rgb;
};

std::map<std::string, Fill> polygon_fills(const std::string& svg) {
  static const std::regex re(
      R"re(<polygon id="region-([^"]+)" data-class="([^"]+)" data-value="([^"]+)" fill="rgb\((\d+),(\d+),(\d+)\)")re");
  std::map<std::string, Fill> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out[m[1]] = {m[2], std::stod(m[3]), {std::stoi(m[4]), std::stoi(m[5]), std::stoi(m[6])}};
  }
  return out;
}

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("prototype is the class mean") {
  const Prototype p = prototype({{1.0, 2.0}, {3.0, 4.0}}, "a");
  CHECK(p.v == Vector{2.0, 3.0});
  CHECK(p.n == 2);
  CHECK(p.class_name == "a");
  CHECK(prototype({{5.0, -1.0}}, "b").v == Vector{5.0, -1.0});
  CHECK_THROWS(prototype({}, "empty"));
  CHECK_THROWS_AS(prototype({{1.0}, {1.0, 2.0}}, "ragged"), DimensionError);

  Xoshiro256 rng(1);
  std::vector<Vector> feats;
  for (int i = 0; i < 50; ++i) feats.push_back(random_vector(rng, 16));
  const Prototype q = prototype(feats, "r");
  for (std::size_t j = 0; j < 16; ++j) {
    long double s = 0.0L;
    for (const Vector& f : feats) s += f[j];
    CHECK(std::abs(q.v[j] - static_cast<double>(s / 50.0L)) < 1e-9);
  }
  std::vector<Vector> permuted = feats;
  shuffle(permuted, rng);
  const Prototype q2 = prototype(permuted, "r");
  for (std::size_t j = 0; j < 16; ++j) CHECK(std::abs(q.v[j] - q2.v[j]) < 1e-12);
}

TEST_CASE("cosine examples") {
  const Vector a{1.0, 0.0}, b{0.0, 1.0}, c{-2.0, 0.0}, z{0.0, 0.0};
  CHECK(cosine(a, a) == 1.0);
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, c) == -1.0);
  CHECK_THROWS_AS(cosine(a, z), UndefinedSimilarityError);
  CHECK_THROWS_AS(cosine(z, a), UndefinedSimilarityError);
  CHECK_THROWS_AS(cosine(a, Vector{1.0}), DimensionError);
  CHECK_THROWS_AS(l2_normalized(z), UndefinedSimilarityError);
}

TEST_CASE("distance examples") {
  const Vector o{0.0, 0.0}, p{3.0, 4.0};
  CHECK(euclidean(o, p) == 5.0);
  CHECK(manhattan(o, p) == 7.0);
  CHECK_THROWS_AS(euclidean(o, Vector{1.0}), DimensionError);
  CHECK_THROWS_AS(manhattan(o, Vector{1.0}), DimensionError);
}

TEST_CASE("metric properties on random vectors") {
  Xoshiro256 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = random_vector(rng, 32), y = random_vector(rng, 32), z = random_vector(rng, 32);
    for (auto* d : {&euclidean, &manhattan}) {
      CHECK((*d)(x, x) == 0.0);
      CHECK((*d)(x, y) == (*d)(y, x));
      CHECK((*d)(x, y) >= 0.0);
      CHECK((*d)(x, z) <= (*d)(x, y) + (*d)(y, z) + 1e-12);
    }
    CHECK(euclidean(x, y) <= manhattan(x, y) + 1e-12);
    CHECK(cosine(x, y) == cosine(y, x));
    CHECK(std::abs(cosine(x, x) - 1.0) < 1e-12);
    const double c = cosine(x, y);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    Vector scaled = y;
    for (double& v : scaled) v *= 3.5;
    CHECK(std::abs(cosine(x, scaled) - c) < 1e-12);
    // Unit vectors: |x - y|^2 = 2 - 2 cos.
    const Vector ux = l2_normalized(x), uy = l2_normalized(y);
    CHECK(std::abs(euclidean(ux, uy) * euclidean(ux, uy) - (2.0 - 2.0 * cosine(ux, uy))) < 1e-12);
  }
}

TEST_CASE("reference report") {
  Xoshiro256 rng(3);
  const auto protos = random_prototypes(rng, 5, 24);
  const SimilarityReport r = reference_report(protos, "pattern_02");
  REQUIRE(r.rows.size() == 5);
  CHECK(r.reference == "pattern_02");
  CHECK(r.rows[0].class_name == "pattern_02");
  CHECK(r.rows[0].euclidean == 0.0);
  CHECK(r.rows[0].manhattan == 0.0);
  CHECK(r.rows[0].cosine == 1.0);
  for (const Prototype& p : protos) {
    const SimilarityRow& row = r.row(p.class_name);
    if (p.class_name == "pattern_02") continue;
    // Per-pair oracle written out directly.
    long double e = 0.0L, m = 0.0L, dot = 0.0L, nx = 0.0L, ny = 0.0L;
    for (std::size_t j = 0; j < 24; ++j) {
      const long double a = p.v[j], b = protos[2].v[j];
      e += (a - b) * (a - b);
      m += std::abs(a - b);
      dot += a * b;
      nx += a * a;
      ny += b * b;
    }
    CHECK(std::abs(row.euclidean - static_cast<double>(std::sqrt(e))) < 1e-12);
    CHECK(std::abs(row.manhattan - static_cast<double>(m)) < 1e-12);
    CHECK(std::abs(row.cosine - static_cast<double>(dot / (std::sqrt(nx) * std::sqrt(ny)))) < 1e-12);
  }
  CHECK_THROWS_AS(reference_report(protos, "pattern_99"), LookupError);
  CHECK_THROWS_AS(r.row("nope"), LookupError);
}

TEST_CASE("identical prototypes give reference-like rows") {
  std::vector<Prototype> protos{{"a", {1.0, 2.0, 3.0}, 1}, {"b", {1.0, 2.0, 3.0}, 1}, {"c", {-1.0, 0.0, 2.0}, 1}};
  const SimilarityReport r = reference_report(protos, "a");
  CHECK(r.row("b").euclidean == 0.0);
  CHECK(r.row("b").manhattan == 0.0);
  CHECK(std::abs(r.row("b").cosine - 1.0) < 1e-15);

  const SimilarityReport n = reference_report(protos, "a", {true});
  const Vector ua = l2_normalized(protos[0].v), uc = l2_normalized(protos[2].v);
  CHECK(std::abs(n.row("c").euclidean - euclidean(ua, uc)) < 1e-15);
  CHECK(std::abs(n.row("c").cosine - r.row("c").cosine) < 1e-12);
}

TEST_CASE("report csv") {
  SUBCASE("reference only") {
    const SimilarityReport r = reference_report({{"solo", {1.0, 1.0}, 1}}, "solo");
    CHECK(export_csv(r) == "class,euclidean,manhattan,cosine\nsolo,0.0000,0.0000,1.0000\n");
  }
  SUBCASE("round trip") {
    Xoshiro256 rng(4);
    const SimilarityReport r = reference_report(random_prototypes(rng, 6, 10), "pattern_00");
    const SimilarityReport back = parse_report_csv(export_csv(r));
    CHECK(back.reference == "pattern_00");
    REQUIRE(back.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      CHECK(back.rows[i].class_name == r.rows[i].class_name);
      CHECK(std::abs(back.rows[i].euclidean - r.rows[i].euclidean) <= 5e-5);
      CHECK(std::abs(back.rows[i].manhattan - r.rows[i].manhattan) <= 5e-5);
      CHECK(std::abs(back.rows[i].cosine - r.rows[i].cosine) <= 5e-5);
    }
  }
  SUBCASE("negative zero is folded") {
    CHECK(round4(-0.00001) == 0.0);
    CHECK_FALSE(std::signbit(round4(-0.00001)));
    CHECK(round4(0.12345678) == 0.1235);
  }
  SUBCASE("metric names") {
    CHECK(parse_metric("cosine") == Metric::Cosine);
    CHECK(to_string(Metric::Manhattan) == "manhattan");
    CHECK_THROWS_AS(parse_metric("chebyshev"), ConfigError);
  }
}

TEST_CASE("color scale") {
  const ColorScale s;
  CHECK(s.color(-1.0) == s.low);
  CHECK(s.color(1.0) == s.high);
  CHECK(s.color(-5.0) == s.low);
  CHECK(s.color(5.0) == s.high);
  const Rgb8 mid = s.color(0.0);
  for (int c = 0; c < 3; ++c) CHECK(mid[c] == std::lround((s.low[c] + s.high[c]) / 2.0));
  ColorScale bad;
  bad.min = bad.max = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  SimilarityReport zero{"a", {{"a", 0.0, 0.0, 1.0}, {"b", 0.0, 0.0, 1.0}}};
  const ColorScale d = ColorScale::default_for(Metric::Euclidean, zero);
  CHECK(d.min == 0.0);
  CHECK(d.max == 1.0);
  zero.rows[1].manhattan = 3.0;
  CHECK(ColorScale::default_for(Metric::Manhattan, zero).max == 3.0);
  CHECK(ColorScale::default_for(Metric::Cosine, zero).min == -1.0);
}

TEST_CASE("choropleth svg") {
  Xoshiro256 rng(5);
  const auto protos = random_prototypes(rng, 8, 12);  // regions for pattern_08/09 stay unmatched
  const SimilarityReport report = reference_report(protos, "pattern_00");
  const RegionMap map = toy_map();

  for (Metric m : {Metric::Euclidean, Metric::Manhattan, Metric::Cosine}) {
    CAPTURE(to_string(m));
    const ColorScale scale = ColorScale::default_for(m, report);
    const std::string svg = render_choropleth(report, map, m, scale);
    CHECK(svg == render_choropleth(report, map, m, scale));
    CHECK(svg.rfind("<?xml", 0) == 0);

    // Colors follow from the values in the exported CSV.
    const SimilarityReport from_csv = parse_report_csv(export_csv(report));
    const auto fills = polygon_fills(svg);
    CHECK(fills.size() == 8);
    for (const auto& [id, f] : fills) {
      const double v = metric_value(from_csv.row(f.class_name), m);
      CHECK(f.value == v);
      const double t = std::clamp((v - scale.min) / (scale.max - scale.min), 0.0, 1.0);
      for (int c = 0; c < 3; ++c) CHECK(f.rgb[c] == std::lround(scale.low[c] + (scale.high[c] - scale.low[c]) * t));
    }

    for (const Region& r : map.regions) CHECK(occurrences(svg, "id=\"region-" + r.id + "\"") == 1);
    CHECK(occurrences(svg, "data-unmatched=\"true\"") == 2);
    CHECK(occurrences(svg, "url(#unmatched-hatch)") >= 2);

    static const std::regex tick(R"re(class="tick-label" data-value="([^"]+)")re");
    std::vector<double> ticks;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tick); it != std::sregex_iterator(); ++it)
      ticks.push_back(std::stod((*it)[1]));
    REQUIRE(ticks.size() == 5);
    CHECK(std::is_sorted(ticks.begin(), ticks.end()));
    CHECK(ticks.front() == round4(scale.min));
    CHECK(ticks.back() == round4(scale.max));
  }
}

TEST_CASE("choropleth endpoints and clamping") {
  const SimilarityReport report{"pattern_00", {{"pattern_00", 0.0, 0.0, 1.0}, {"pattern_01", 2.0, 3.0, -1.0}}};
  const RegionMap map = toy_map();
  const std::string svg = render_choropleth(report, map, Metric::Cosine, ColorScale{});
  const auto fills = polygon_fills(svg);
  CHECK(fills.at("R00").rgb == Rgb8{8, 48, 107});
  CHECK(fills.at("R01").rgb == Rgb8{247, 251, 255});
  CHECK(svg.find("<!-- warning") == std::string::npos);

  ColorScale narrow;
  narrow.metric = Metric::Euclidean;
  narrow.min = 0.0;
  narrow.max = 1.0;
  const std::string clamped = render_choropleth(report, map, Metric::Euclidean, narrow);
  CHECK(occurrences(clamped, "<!-- warning: region R01") == 1);
  CHECK(polygon_fills(clamped).at("R01").rgb == narrow.high);
}

TEST_CASE("choropleth errors") {
  const SimilarityReport report{"x", {{"x", 0.0, 0.0, 1.0}}};
  CHECK_THROWS_AS(render_choropleth(report, toy_map(), Metric::Cosine, ColorScale{}), ExportError);
}

TEST_CASE("region map validation") {
  CHECK(toy_map().regions.size() == 10);
  const auto bad = [](const std::string& text) { CHECK_THROWS_AS(RegionMap::from_json_text(text), ExportError); };
  bad("not json");
  bad(R"({"regions": []})");
  bad(R"({"regions": [{"id": "a", "name": "A", "class": "c", "polygon": [[0,0],[1,0]]}]})");
  bad(R"({"regions": [{"id": "a", "name": "A", "class": "c", "polygon": [[0,0],[1,0],[1,1]]},
                      {"id": "a", "name": "B", "class": "d", "polygon": [[0,0],[1,0],[1,1]]}]})");
  bad(R"({"regions": [{"id": "a", "name": "A", "class": "c", "polygon": [[0,0],[1],[1,1]]}]})");
  CHECK_THROWS_AS(RegionMap::load("/nonexistent/regions.json"), ExportError);
}
