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

#ifndef SRESNET_AUGMENT_HPP_
#define SRESNET_AUGMENT_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "sresnet/tensor.hpp"

namespace sresnet {

struct AugmentSpec {
  bool resize = false;
  bool rotate = false;
  bool zoom = false;
  bool translate = false;
  bool flip = false;

  std::size_t resize_height = 32;
  std::size_t resize_width = 32;
  double max_rotation_deg = 30.0;  // uniform in [-max, max]
  double zoom_min = 0.8;
  double zoom_max = 1.2;
  double max_translate_frac = 0.1;  // of H and W
  double flip_probability = 0.5;
  std::uint64_t seed = 0;

  bool any() const { return resize || rotate || zoom || translate || flip; }
  /// Throws ConfigError on degenerate or out-of-range settings.
  void validate() const;

  /// Comma-separated list of ops ("rotate,flip"), "none" or "all".
  static AugmentSpec from_ops(std::string_view ops);
  std::string ops_string() const;
};

/// Applies a randomly drawn transform chain in the fixed order resize ->
/// rotate -> zoom -> translate -> flip. The draws depend only on
/// (spec.seed, draw_seed): all five parameters are always drawn, so toggling
/// one op does not change the others. Output is clamped to [0,1].
Tensor augment(const Tensor& image, const AugmentSpec& spec, std::uint64_t draw_seed);

}  // namespace sresnet

#endif  // SRESNET_AUGMENT_HPP_
