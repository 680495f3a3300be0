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

#include "sresnet/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sresnet/error.hpp"

namespace sresnet {

namespace {

constexpr double kCanvasW = 640.0;
constexpr double kCanvasH = 400.0;
constexpr double kMargin = 20.0;
constexpr double kMapRight = 460.0;  // legend lives to the right

std::string fmt4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", round4(v));
  return buf;
}

std::string fmt3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("report CSV: unterminated quote");
  return fields;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" is not allowed inside XML comments.
std::string comment_safe(std::string s) {
  for (std::size_t p; (p = s.find("--")) != std::string::npos;) s.replace(p, 2, "- -");
  return s;
}

std::string rgb(const Rgb8& c) {
  return "rgb(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Euclidean: return "euclidean";
    case Metric::Manhattan: return "manhattan";
    case Metric::Cosine: return "cosine";
  }
  return "cosine";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "manhattan") return Metric::Manhattan;
  if (name == "cosine") return Metric::Cosine;
  throw ConfigError("unknown metric '" + std::string(name) + "' (valid: euclidean, manhattan, cosine)");
}

double metric_value(const SimilarityRow& row, Metric m) {
  switch (m) {
    case Metric::Euclidean: return row.euclidean;
    case Metric::Manhattan: return row.manhattan;
    case Metric::Cosine: return row.cosine;
  }
  return row.cosine;
}

double round4(double v) {
  const double r = std::round(v * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;
}

std::string export_csv(const SimilarityReport& report) {
  std::string out = "class,euclidean,manhattan,cosine\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.class_name) + "," + fmt4(r.euclidean) + "," + fmt4(r.manhattan) + "," + fmt4(r.cosine) + "\n";
  }
  return out;
}

SimilarityReport parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "class,euclidean,manhattan,cosine") {
    throw DataError("report CSV: expected header 'class,euclidean,manhattan,cosine'");
  }
  SimilarityReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DataError("report CSV: expected 4 fields in '" + line + "'");
    try {
      report.rows.push_back(SimilarityRow{f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
    } catch (const std::logic_error&) {
      throw DataError("report CSV: bad number in '" + line + "'");
    }
  }
  if (report.rows.empty()) throw DataError("report CSV: no rows");
  report.reference = report.rows.front().class_name;
  return report;
}

void RegionMap::validate() const {
  if (regions.empty()) throw ExportError("region map: no regions");
  std::set<std::string> ids;
  for (const auto& r : regions) {
    if (r.id.empty()) throw ExportError("region map: empty region id");
    if (!ids.insert(r.id).second) throw ExportError("region map: duplicate region id '" + r.id + "'");
    if (r.polygon.size() < 3) throw ExportError("region map: region '" + r.id + "' has fewer than 3 vertices");
    for (const auto& [x, y] : r.polygon) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw ExportError("region map: non-finite vertex in '" + r.id + "'");
    }
  }
}

RegionMap RegionMap::from_json_text(std::string_view text) {
  RegionMap map;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& r : j.at("regions")) {
      Region region;
      region.id = r.at("id").get<std::string>();
      region.name = r.value("name", region.id);
      region.class_name = r.at("class").get<std::string>();
      for (const auto& v : r.at("polygon")) {
        if (!v.is_array() || v.size() != 2) throw ExportError("region map: vertex must be [x, y] in '" + region.id + "'");
        region.polygon.emplace_back(v[0].get<double>(), v[1].get<double>());
      }
      map.regions.push_back(std::move(region));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ExportError(std::string("region map: ") + e.what());
  }
  map.validate();
  return map;
}

RegionMap RegionMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ExportError("cannot read region map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ColorScale::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw ConfigError("color scale: domain needs finite min < max");
  }
  for (const auto* c : {&low, &high})
    for (int v : *c)
      if (v < 0 || v > 255) throw ConfigError("color scale: channels must lie in 0..255");
}

Rgb8 ColorScale::color(double value) const {
  const double t = (std::clamp(value, min, max) - min) / (max - min);
  Rgb8 out{};
  for (std::size_t c = 0; c < 3; ++c) {
    out[c] = static_cast<int>(std::lround(low[c] + t * (high[c] - low[c])));
  }
  return out;
}

ColorScale ColorScale::default_for(Metric m, const SimilarityReport& report) {
  ColorScale s;
  s.metric = m;
  if (m == Metric::Cosine) return s;
  double hi = 0.0;
  for (const auto& r : report.rows) hi = std::max(hi, round4(metric_value(r, m)));
  s.min = 0.0;
  s.max = hi > 0.0 ? hi : 1.0;
  return s;
}

std::string render_choropleth(const SimilarityReport& report, const RegionMap& map, Metric metric,
                              const ColorScale& scale) {
  map.validate();
  scale.validate();

  // Region values; unmatched regions have none.
  std::vector<const SimilarityRow*> match(map.regions.size(), nullptr);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < map.regions.size(); ++i) {
    for (const auto& row : report.rows) {
      if (row.class_name == map.regions[i].class_name) {
        match[i] = &row;
        ++matched;
        break;
      }
    }
  }
  if (matched == 0) throw ExportError("choropleth: no region's class appears in the report");

  double minx = std::numeric_limits<double>::infinity(), miny = minx;
  double maxx = -minx, maxy = -minx;
  for (const auto& r : map.regions)
    for (const auto& [x, y] : r.polygon) {
      minx = std::min(minx, x);
      maxx = std::max(maxx, x);
      miny = std::min(miny, y);
      maxy = std::max(maxy, y);
    }
  const double w = std::max(maxx - minx, 1e-12), h = std::max(maxy - miny, 1e-12);
  const double s = std::min((kMapRight - kMargin) / w, (kCanvasH - 2 * kMargin) / h);
  // Planar y grows upwards; SVG y grows downwards.
  auto px = [&](double x) { return kMargin + (x - minx) * s; };
  auto py = [&](double y) { return kMargin + (maxy - y) * s; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kCanvasW << "\" height=\""
      << kCanvasH << "\" viewBox=\"0 0 " << kCanvasW << " " << kCanvasH << "\">\n"
      << "<title>" << xml_escape(std::string(to_string(metric))) << " vs " << xml_escape(report.reference)
      << "</title>\n";

  for (std::size_t i = 0; i < map.regions.size(); ++i) {
    if (!match[i]) continue;
    const double v = round4(metric_value(*match[i], metric));
    if (v < scale.min || v > scale.max) {
      svg << "<!-- warning: region " << comment_safe(map.regions[i].id) << " value " << fmt4(v)
          << " outside [" << fmt4(scale.min) << ", " << fmt4(scale.max) << "], clamped -->\n";
    }
  }

  svg << "<defs>\n"
      << "<pattern id=\"unmatched-hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\" "
         "patternTransform=\"rotate(45)\">"
      << "<rect width=\"8\" height=\"8\" fill=\"rgb(221,221,221)\"/>"
      << "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"rgb(136,136,136)\" stroke-width=\"3\"/></pattern>\n"
      << "<linearGradient id=\"legend-gradient\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
      << "<stop offset=\"0\" stop-color=\"" << rgb(scale.low) << "\"/>"
      << "<stop offset=\"1\" stop-color=\"" << rgb(scale.high) << "\"/></linearGradient>\n"
      << "</defs>\n";

  svg << "<g id=\"regions\" stroke=\"rgb(51,51,51)\" stroke-width=\"1\">\n";
  for (std::size_t i = 0; i < map.regions.size(); ++i) {
    const Region& r = map.regions[i];
    std::string points;
    for (const auto& [x, y] : r.polygon) {
      if (!points.empty()) points += ' ';
      points += fmt3(px(x)) + "," + fmt3(py(y));
    }
    svg << "<polygon id=\"region-" << xml_escape(r.id) << "\" data-class=\"" << xml_escape(r.class_name) << "\"";
    if (match[i]) {
      const double v = round4(metric_value(*match[i], metric));
      svg << " data-value=\"" << fmt4(v) << "\" fill=\"" << rgb(scale.color(v)) << "\"";
    } else {
      svg << " data-unmatched=\"true\" fill=\"url(#unmatched-hatch)\"";
    }
    svg << " points=\"" << points << "\"><title>" << xml_escape(r.name) << "</title></polygon>\n";
  }
  svg << "</g>\n";

  // Legend: vertical bar, low at the bottom, five evenly spaced ticks.
  const double bar_x = 500.0, bar_y = 60.0, bar_w = 20.0, bar_h = 280.0;
  svg << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<text x=\"" << fmt3(bar_x) << "\" y=\"" << fmt3(bar_y - 16.0) << "\">"
      << xml_escape(std::string(to_string(metric))) << "</text>\n"
      << "<rect x=\"" << fmt3(bar_x) << "\" y=\"" << fmt3(bar_y) << "\" width=\"" << fmt3(bar_w) << "\" height=\""
      << fmt3(bar_h) << "\" fill=\"url(#legend-gradient)\" stroke=\"rgb(51,51,51)\"/>\n";
  for (int t = 0; t < 5; ++t) {
    const double value = scale.min + (scale.max - scale.min) * t / 4.0;
    const double y = bar_y + bar_h - bar_h * t / 4.0;
    svg << "<line class=\"tick\" x1=\"" << fmt3(bar_x + bar_w) << "\" y1=\"" << fmt3(y) << "\" x2=\""
        << fmt3(bar_x + bar_w + 5.0) << "\" y2=\"" << fmt3(y) << "\" stroke=\"rgb(51,51,51)\"/>"
        << "<text class=\"tick-label\" data-value=\"" << fmt4(value) << "\" x=\"" << fmt3(bar_x + bar_w + 8.0)
        << "\" y=\"" << fmt3(y + 4.0) << "\">" << fmt4(value) << "</text>\n";
  }
  svg << "<rect x=\"" << fmt3(bar_x) << "\" y=\"" << fmt3(bar_y + bar_h + 20.0)
      << "\" width=\"12\" height=\"12\" fill=\"url(#unmatched-hatch)\" stroke=\"rgb(51,51,51)\"/>"
      << "<text x=\"" << fmt3(bar_x + 18.0) << "\" y=\"" << fmt3(bar_y + bar_h + 30.0) << "\">no data</text>\n"
      << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace sresnet
