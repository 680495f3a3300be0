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

#ifndef SRESNET_DATASET_HPP_
#define SRESNET_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sresnet/tensor.hpp"

namespace sresnet {

struct Sample {
  Tensor image;        // [3,H,W]
  int label = 0;
  std::string source;  // file path or synthetic provenance
};

struct LabeledDataset {
  std::vector<Sample> items;
  std::vector<std::string> class_names;
  /// Files that could not be decoded during load_folder.
  std::vector<std::string> load_errors;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  std::size_t count(int label) const;
  /// Throws DataError when labels or image shapes are inconsistent.
  void validate() const;
  LabeledDataset with_items(std::vector<Sample> subset) const;
};

/// Reads root/<class>/<file>.ppm. Class names are the sorted subdirectory
/// names; files are read in sorted order. Undecodable files are recorded in
/// load_errors; a class without any readable image is a DataError.
LabeledDataset load_folder(const std::filesystem::path& root);

/// Writes a dataset as root/<class>/<NNNN>.ppm (8-bit).
void save_folder(const LabeledDataset& ds, const std::filesystem::path& root);

/// Stratified split: per class floor(fraction * n_c) items go to train (the
/// first ones of a seeded per-class shuffle), the rest to test. Both halves
/// keep the dataset's original item order.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed);

/// Bilinear resize of every image whose size differs from (height, width).
LabeledDataset resize_all(const LabeledDataset& ds, std::size_t height, std::size_t width);

struct ChannelStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std{1.0, 1.0, 1.0};
  /// Hash of the split the statistics were computed from ("" if unknown).
  std::string source_hash;

  void validate() const;
  nlohmann::json to_json() const;
  static ChannelStats from_json(const nlohmann::json& j);
};

/// Per-channel mean and population standard deviation over all pixels.
ChannelStats compute_channel_stats(const LabeledDataset& ds);

/// (x - mean) / std per channel, in place on a copy of each image.
Tensor standardize_image(const Tensor& image, const ChannelStats& stats);
LabeledDataset standardize(const LabeledDataset& ds, const ChannelStats& stats);

/// FNV-1a over (source, label) of every item, as 16 hex digits.
std::string split_hash(const LabeledDataset& ds);

/// Stacks the selected images into [N,3,H,W] and returns their labels.
std::pair<Tensor, std::vector<int>> make_batch(const LabeledDataset& ds, std::span<const std::size_t> indices);

}  // namespace sresnet

#endif  // SRESNET_DATASET_HPP_
