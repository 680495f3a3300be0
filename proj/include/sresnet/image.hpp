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

#ifndef SRESNET_IMAGE_HPP_
#define SRESNET_IMAGE_HPP_

#include <filesystem>
#include <string_view>

#include "sresnet/tensor.hpp"

// Images are [3,H,W] tensors with values in [0,1].

namespace sresnet {

/// Decodes a binary PPM (P6). maxval up to 65535 (two bytes, big-endian,
/// above 255); samples are divided by maxval. Throws DataError.
Tensor decode_ppm(std::string_view bytes);
Tensor read_ppm(const std::filesystem::path& path);

/// Writes an 8-bit P6 file, rounding clamp(v,0,1)*255.
void write_ppm(const std::filesystem::path& path, const Tensor& image);

/// Bilinear resampling with pixel-center alignment and edge replication.
Tensor resize_bilinear(const Tensor& image, std::size_t height, std::size_t width);

/// Rotation about the image center, counter-clockwise in degrees.
Tensor rotate(const Tensor& image, double degrees);
/// Scales content about the center; factor > 1 magnifies.
Tensor zoom(const Tensor& image, double factor);
/// Shifts content by (dx, dy) pixels; positive moves right/down.
Tensor translate(const Tensor& image, double dx, double dy);
/// Mirrors columns. Exact (no resampling).
Tensor flip_horizontal(const Tensor& image);

}  // namespace sresnet

#endif  // SRESNET_IMAGE_HPP_
