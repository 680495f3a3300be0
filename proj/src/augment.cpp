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

#include "sresnet/augment.hpp"

#include <algorithm>
#include <sstream>

#include "sresnet/error.hpp"
#include "sresnet/image.hpp"
#include "sresnet/rng.hpp"

namespace sresnet {

void AugmentSpec::validate() const {
  if (resize && (resize_height == 0 || resize_width == 0)) throw ConfigError("augment: resize target must be positive");
  if (rotate && !(max_rotation_deg > 0.0 && max_rotation_deg <= 180.0)) {
    throw ConfigError("augment: rotation range must lie in (0, 180] degrees");
  }
  if (zoom && !(zoom_min > 0.0 && zoom_min < zoom_max)) throw ConfigError("augment: zoom range needs 0 < min < max");
  if (translate && !(max_translate_frac > 0.0 && max_translate_frac < 1.0)) {
    throw ConfigError("augment: translation fraction must lie in (0, 1)");
  }
  if (flip && !(flip_probability > 0.0 && flip_probability <= 1.0)) {
    throw ConfigError("augment: flip probability must lie in (0, 1]");
  }
}

AugmentSpec AugmentSpec::from_ops(std::string_view ops) {
  AugmentSpec spec;
  if (ops.empty() || ops == "none") return spec;
  if (ops == "all") {
    spec.resize = spec.rotate = spec.zoom = spec.translate = spec.flip = true;
    return spec;
  }
  std::string token;
  std::istringstream in{std::string(ops)};
  while (std::getline(in, token, ',')) {
    if (token == "resize") spec.resize = true;
    else if (token == "rotate") spec.rotate = true;
    else if (token == "zoom") spec.zoom = true;
    else if (token == "translate") spec.translate = true;
    else if (token == "flip") spec.flip = true;
    else throw ConfigError("unknown augmentation '" + token + "' (valid: resize, rotate, zoom, translate, flip, none, all)");
  }
  return spec;
}

std::string AugmentSpec::ops_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(resize, "resize");
  add(rotate, "rotate");
  add(zoom, "zoom");
  add(translate, "translate");
  add(flip, "flip");
  return out.empty() ? "none" : out;
}

Tensor augment(const Tensor& image, const AugmentSpec& spec, std::uint64_t draw_seed) {
  Xoshiro256 rng(derive_seed(spec.seed, draw_seed));
  const double angle = rng.uniform(-spec.max_rotation_deg, spec.max_rotation_deg);
  const double factor = rng.uniform(spec.zoom_min, spec.zoom_max);
  const double tx = rng.uniform(-spec.max_translate_frac, spec.max_translate_frac);
  const double ty = rng.uniform(-spec.max_translate_frac, spec.max_translate_frac);
  const bool mirror = rng.bernoulli(spec.flip_probability);

  if (!spec.any()) return image.clone();
  Tensor out = image;
  if (spec.resize) out = resize_bilinear(out, spec.resize_height, spec.resize_width);
  if (spec.rotate) out = rotate(out, angle);
  if (spec.zoom) out = zoom(out, factor);
  if (spec.translate) {
    out = translate(out, tx * static_cast<double>(out.dim(2)), ty * static_cast<double>(out.dim(1)));
  }
  if (spec.flip && mirror) out = flip_horizontal(out);
  if (out.same_storage(image)) out = image.clone();
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace sresnet
