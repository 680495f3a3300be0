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

#ifndef SRESNET_SYNTH_HPP_
#define SRESNET_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sresnet/dataset.hpp"

namespace sresnet {

enum class MotifFamily { Stripes, Checks, Dots, Zigzag };

std::string_view to_string(MotifFamily f);

using Rgb = std::array<double, 3>;

/// Procedural textile-like motif for one class.
struct Motif {
  MotifFamily family = MotifFamily::Stripes;
  double frequency = 3.0;        // repeats across the image
  double orientation_deg = 0.0;
  std::array<Rgb, 3> palette{};  // background, foreground, accent
};

/// Per-image random draws; with zero noise, equal draws give equal images.
struct MotifDraw {
  double phase_u = 0.0;
  double phase_v = 0.0;
  double orientation_jitter_deg = 0.0;
};

struct SynthSpec {
  std::size_t num_classes = 4;
  std::size_t per_class = 50;
  std::size_t height = 32;
  std::size_t width = 32;
  /// One motif per class; empty means default_motifs(num_classes).
  std::vector<Motif> motifs;
  double noise = 0.05;             // uniform pixel noise in [-noise, noise]
  double orientation_jitter = 5.0;  // degrees, per image
  std::uint64_t seed = 7;

  std::vector<Motif> resolved_motifs() const;
  /// Throws ConfigError: duplicate (family, frequency, orientation),
  /// noise not below the weakest motif contrast, zero sizes.
  void validate() const;
  /// "classes=4 per-class=50 size=32 noise=0.05 seed=7"; unknown keys throw.
  static SynthSpec parse(const std::vector<std::string>& tokens, std::uint64_t default_seed);
  std::string to_string() const;
};

/// Deterministic motif table: families cycle, frequency steps every four
/// classes, palettes come from a fixed list.
std::vector<Motif> default_motifs(std::size_t num_classes);

/// Weakest motif contrast: each motif's largest per-channel
/// |foreground - background|, minimized over motifs.
double motif_contrast(const std::vector<Motif>& motifs);

Tensor render_motif(const Motif& motif, const MotifDraw& draw, std::size_t height, std::size_t width);

/// Class names are "pattern_00", "pattern_01", ...
LabeledDataset synth_generate(const SynthSpec& spec);

}  // namespace sresnet

#endif  // SRESNET_SYNTH_HPP_
