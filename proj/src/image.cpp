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

#include "sresnet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "sresnet/error.hpp"

namespace sresnet {

namespace {

void require_image(const Tensor& image, const char* op) {
  if (!image.defined() || image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError(std::string(op) + ": expected a [3,H,W] image, got " +
                         (image.defined() ? shape_str(image.shape()) : std::string("<undefined>")));
  }
}

class PpmReader {
 public:
  explicit PpmReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t next_number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > 1'000'000) throw DataError("ppm: header number too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw DataError("ppm: malformed header");
    return value;
  }

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '6') throw DataError("ppm: not a P6 file");
    pos_ = 2;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("ppm: missing whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

// Inverse-mapped bilinear sample with edge replication.
double sample(const double* plane, std::size_t h, std::size_t w, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, h - 1);
  const std::size_t x1 = std::min(x0 + 1, w - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  const double top = plane[y0 * w + x0] * (1.0 - fx) + plane[y0 * w + x1] * fx;
  const double bottom = plane[y1 * w + x0] * (1.0 - fx) + plane[y1 * w + x1] * fx;
  return top * (1.0 - fy) + bottom * fy;
}

// out(y, x) = in(map(y, x)) for a same-size output.
template <typename Map>
Tensor warp(const Tensor& image, Map&& map) {
  const std::size_t h = image.dim(1), w = image.dim(2);
  Tensor out(image.shape());
  for (std::size_t c = 0; c < 3; ++c) {
    const double* src = image.data().data() + c * h * w;
    double* dst = out.data().data() + c * h * w;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const auto [sy, sx] = map(static_cast<double>(y), static_cast<double>(x));
        dst[y * w + x] = sample(src, h, w, sy, sx);
      }
  }
  return out;
}

}  // namespace

Tensor decode_ppm(std::string_view bytes) {
  PpmReader reader(bytes);
  reader.expect_magic();
  const std::size_t width = reader.next_number();
  const std::size_t height = reader.next_number();
  const std::size_t maxval = reader.next_number();
  if (width == 0 || height == 0) throw DataError("ppm: zero image dimension");
  if (maxval == 0 || maxval > 65535) throw DataError("ppm: maxval must lie in [1, 65535]");
  const std::size_t start = reader.raster_start();
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t need = width * height * 3 * sample_bytes;
  if (bytes.size() < start + need) {
    throw DataError("ppm: raster truncated (" + std::to_string(bytes.size() - start) + " of " +
                    std::to_string(need) + " bytes)");
  }
  Tensor img(Shape{3, height, width});
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  const double scale = static_cast<double>(maxval);
  for (std::size_t p = 0; p < width * height; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t i = (p * 3 + c) * sample_bytes;
      std::size_t v = raster[i];
      if (sample_bytes == 2) v = (v << 8) | raster[i + 1];
      if (v > maxval) throw DataError("ppm: sample exceeds maxval");
      img[c * width * height + p] = static_cast<double>(v) / scale;
    }
  }
  return img;
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes(std::istreambuf_iterator<char>(in), {});
  try {
    return decode_ppm(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  require_image(image, "write_ppm");
  const std::size_t h = image.dim(1), w = image.dim(2);
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (std::size_t p = 0; p < h * w; ++p)
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = std::clamp(image[c * h * w + p], 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Tensor resize_bilinear(const Tensor& image, std::size_t height, std::size_t width) {
  require_image(image, "resize");
  if (height == 0 || width == 0) throw ConfigError("resize: target size must be positive");
  const std::size_t h = image.dim(1), w = image.dim(2);
  if (h == height && w == width) return image.clone();
  Tensor out(Shape{3, height, width});
  const double sy = static_cast<double>(h) / static_cast<double>(height);
  const double sx = static_cast<double>(w) / static_cast<double>(width);
  for (std::size_t c = 0; c < 3; ++c) {
    const double* src = image.data().data() + c * h * w;
    double* dst = out.data().data() + c * height * width;
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        dst[y * width + x] = sample(src, h, w, (static_cast<double>(y) + 0.5) * sy - 0.5,
                                    (static_cast<double>(x) + 0.5) * sx - 0.5);
      }
  }
  return out;
}

Tensor rotate(const Tensor& image, double degrees) {
  require_image(image, "rotate");
  const double cy = (static_cast<double>(image.dim(1)) - 1.0) / 2.0;
  const double cx = (static_cast<double>(image.dim(2)) - 1.0) / 2.0;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  // Counter-clockwise on screen (y down): inverse map rotates the other way.
  return warp(image, [=](double y, double x) {
    const double dx = x - cx, dy = y - cy;
    return std::pair{cy + s * dx + c * dy, cx + c * dx - s * dy};
  });
}

Tensor zoom(const Tensor& image, double factor) {
  require_image(image, "zoom");
  if (!(factor > 0.0)) throw ConfigError("zoom: factor must be positive");
  const double cy = (static_cast<double>(image.dim(1)) - 1.0) / 2.0;
  const double cx = (static_cast<double>(image.dim(2)) - 1.0) / 2.0;
  return warp(image, [=](double y, double x) { return std::pair{cy + (y - cy) / factor, cx + (x - cx) / factor}; });
}

Tensor translate(const Tensor& image, double dx, double dy) {
  require_image(image, "translate");
  return warp(image, [=](double y, double x) { return std::pair{y - dy, x - dx}; });
}

Tensor flip_horizontal(const Tensor& image) {
  require_image(image, "flip");
  const std::size_t h = image.dim(1), w = image.dim(2);
  Tensor out(image.shape());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out[(c * h + y) * w + x] = image[(c * h + y) * w + (w - 1 - x)];
  return out;
}

}  // namespace sresnet
