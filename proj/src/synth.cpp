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

#include "sresnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <tuple>

#include "sresnet/error.hpp"
#include "sresnet/rng.hpp"

namespace sresnet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Background, foreground, accent.
constexpr std::array<std::array<Rgb, 3>, 10> kPalettes{{
    {{{0.85, 0.78, 0.62}, {0.55, 0.10, 0.12}, {0.10, 0.20, 0.45}}},
    {{{0.10, 0.12, 0.30}, {0.90, 0.75, 0.20}, {0.80, 0.20, 0.25}}},
    {{{0.95, 0.95, 0.90}, {0.15, 0.35, 0.20}, {0.70, 0.45, 0.10}}},
    {{{0.30, 0.08, 0.10}, {0.95, 0.55, 0.35}, {0.95, 0.90, 0.70}}},
    {{{0.05, 0.05, 0.05}, {0.20, 0.60, 0.80}, {0.90, 0.30, 0.60}}},
    {{{0.70, 0.85, 0.75}, {0.40, 0.15, 0.45}, {0.95, 0.80, 0.10}}},
    {{{0.98, 0.85, 0.25}, {0.10, 0.10, 0.50}, {0.60, 0.05, 0.05}}},
    {{{0.45, 0.30, 0.20}, {0.95, 0.95, 0.85}, {0.25, 0.55, 0.30}}},
    {{{0.20, 0.40, 0.25}, {0.85, 0.20, 0.15}, {0.95, 0.95, 0.95}}},
    {{{0.60, 0.65, 0.80}, {0.05, 0.25, 0.10}, {0.90, 0.60, 0.20}}},
}};

double frac(double x) { return x - std::floor(x); }

}  // namespace

std::string_view to_string(MotifFamily f) {
  switch (f) {
    case MotifFamily::Stripes: return "stripes";
    case MotifFamily::Checks: return "checks";
    case MotifFamily::Dots: return "dots";
    case MotifFamily::Zigzag: return "zigzag";
  }
  return "stripes";
}

std::vector<Motif> default_motifs(std::size_t num_classes) {
  std::vector<Motif> out;
  for (std::size_t k = 0; k < num_classes; ++k) {
    Motif m;
    m.family = static_cast<MotifFamily>(k % 4);
    m.frequency = 3.0 + 2.0 * static_cast<double>(k / 4);
    m.orientation_deg = 30.0 * static_cast<double>(k % 3);
    m.palette = kPalettes[k % kPalettes.size()];
    out.push_back(m);
  }
  return out;
}

double motif_contrast(const std::vector<Motif>& motifs) {
  double contrast = 1.0;
  for (const auto& m : motifs) {
    double best = 0.0;
    for (std::size_t c = 0; c < 3; ++c) best = std::max(best, std::abs(m.palette[1][c] - m.palette[0][c]));
    contrast = std::min(contrast, best);
  }
  return contrast;
}

std::vector<Motif> SynthSpec::resolved_motifs() const {
  return motifs.empty() ? default_motifs(num_classes) : motifs;
}

void SynthSpec::validate() const {
  if (num_classes == 0 || per_class == 0 || height == 0 || width == 0) {
    throw ConfigError("synth: classes, per-class and size must be positive");
  }
  const auto ms = resolved_motifs();
  if (ms.size() != num_classes) {
    throw ConfigError("synth: " + std::to_string(ms.size()) + " motifs for " + std::to_string(num_classes) + " classes");
  }
  std::set<std::tuple<int, double, double>> seen;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    if (!(ms[k].frequency > 0.0)) throw ConfigError("synth: motif frequency must be positive");
    if (!seen.emplace(static_cast<int>(ms[k].family), ms[k].frequency, ms[k].orientation_deg).second) {
      throw ConfigError("synth: class " + std::to_string(k) + " repeats another class's (family, frequency, orientation)");
    }
  }
  if (!(noise >= 0.0) || noise >= motif_contrast(ms)) {
    throw ConfigError("synth: noise amplitude must be >= 0 and below the motif contrast " +
                      std::to_string(motif_contrast(ms)));
  }
  if (!(orientation_jitter >= 0.0)) throw ConfigError("synth: orientation jitter must be >= 0");
}

SynthSpec SynthSpec::parse(const std::vector<std::string>& tokens, std::uint64_t default_seed) {
  SynthSpec spec;
  spec.seed = default_seed;
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("synth: expected key=value, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    try {
      if (key == "classes") spec.num_classes = std::stoul(value);
      else if (key == "per-class") spec.per_class = std::stoul(value);
      else if (key == "size") spec.height = spec.width = std::stoul(value);
      else if (key == "noise") spec.noise = std::stod(value);
      else if (key == "jitter") spec.orientation_jitter = std::stod(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else throw ConfigError("synth: unknown key '" + key + "' (valid: classes, per-class, size, noise, jitter, seed)");
    } catch (const std::logic_error&) {
      throw ConfigError("synth: bad value for '" + key + "': " + value);
    }
  }
  spec.validate();
  return spec;
}

std::string SynthSpec::to_string() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "classes=%zu per-class=%zu size=%zu noise=%.15g jitter=%.15g seed=%llu",
                num_classes, per_class, height, noise, orientation_jitter, static_cast<unsigned long long>(seed));
  return buf;
}

Tensor render_motif(const Motif& motif, const MotifDraw& draw, std::size_t height, std::size_t width) {
  Tensor img(Shape{3, height, width});
  const double theta = (motif.orientation_deg + draw.orientation_jitter_deg) * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double f = motif.frequency;
  const std::size_t plane = height * width;
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double nx = (static_cast<double>(x) + 0.5) / static_cast<double>(width);
      const double ny = (static_cast<double>(y) + 0.5) / static_cast<double>(height);
      const double u = nx * ct + ny * st;
      const double v = -nx * st + ny * ct;
      double m = 0.0;
      switch (motif.family) {
        case MotifFamily::Stripes:
          m = 0.5 + 0.5 * std::sin(kTwoPi * f * u + draw.phase_u);
          break;
        case MotifFamily::Checks:
          m = std::sin(kTwoPi * f * u + draw.phase_u) * std::sin(kTwoPi * f * v + draw.phase_v) > 0.0 ? 1.0 : 0.0;
          break;
        case MotifFamily::Dots: {
          const double du = frac(f * u + draw.phase_u / kTwoPi) - 0.5;
          const double dv = frac(f * v + draw.phase_v / kTwoPi) - 0.5;
          m = std::exp(-(du * du + dv * dv) / (2.0 * 0.15 * 0.15));
          break;
        }
        case MotifFamily::Zigzag: {
          const double tri = 2.0 * std::abs(frac(f * v + draw.phase_v / kTwoPi) - 0.5);
          m = 0.5 + 0.5 * std::sin(kTwoPi * f * (u + 0.6 * tri / f) + draw.phase_u);
          break;
        }
      }
      const double accent = 0.35 * 4.0 * m * (1.0 - m);
      for (std::size_t c = 0; c < 3; ++c) {
        const double base = motif.palette[0][c] + (motif.palette[1][c] - motif.palette[0][c]) * m;
        img[c * plane + y * width + x] = base * (1.0 - accent) + motif.palette[2][c] * accent;
      }
    }
  return img;
}

LabeledDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  const auto motifs = spec.resolved_motifs();
  LabeledDataset ds;
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "pattern_%02zu", k);
    ds.class_names.emplace_back(name);
  }
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      Xoshiro256 rng(derive_seed(spec.seed, k, i));
      MotifDraw draw;
      draw.phase_u = rng.uniform(0.0, kTwoPi);
      draw.phase_v = rng.uniform(0.0, kTwoPi);
      draw.orientation_jitter_deg = rng.uniform(-spec.orientation_jitter, spec.orientation_jitter);
      Tensor img = render_motif(motifs[k], draw, spec.height, spec.width);
      if (spec.noise > 0.0) {
        for (double& v : img.data()) v = std::clamp(v + rng.uniform(-spec.noise, spec.noise), 0.0, 1.0);
      }
      ds.items.push_back(Sample{std::move(img), static_cast<int>(k),
                                "synth:seed=" + std::to_string(spec.seed) + ":class=" + std::to_string(k) +
                                    ":index=" + std::to_string(i)});
    }
  }
  return ds;
}

}  // namespace sresnet
