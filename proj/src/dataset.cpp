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

#include "sresnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sresnet/error.hpp"
#include "sresnet/image.hpp"
#include "sresnet/rng.hpp"

namespace sresnet {

namespace fs = std::filesystem;

std::size_t LabeledDataset::count(int label) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [label](const Sample& s) { return s.label == label; }));
}

void LabeledDataset::validate() const {
  for (const auto& s : items) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= class_names.size()) {
      throw DataError("label " + std::to_string(s.label) + " of " + s.source + " outside [0, " +
                      std::to_string(class_names.size()) + ")");
    }
    if (!s.image.defined() || s.image.rank() != 3 || s.image.dim(0) != 3) {
      throw DataError(s.source + ": image is not [3,H,W]");
    }
    if (s.image.shape() != items.front().image.shape()) {
      throw DataError(s.source + ": image size " + shape_str(s.image.shape()) + " differs from " +
                      shape_str(items.front().image.shape()));
    }
  }
}

LabeledDataset LabeledDataset::with_items(std::vector<Sample> subset) const {
  LabeledDataset out;
  out.items = std::move(subset);
  out.class_names = class_names;
  return out;
}

LabeledDataset load_folder(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("data root " + root.string() + " is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw DataError("data root " + root.string() + " has no class subdirectories");

  LabeledDataset ds;
  for (std::size_t label = 0; label < class_dirs.size(); ++label) {
    const std::string name = class_dirs[label].filename().string();
    ds.class_names.push_back(name);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[label])) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::size_t loaded = 0;
    for (const auto& file : files) {
      try {
        ds.items.push_back(Sample{read_ppm(file), static_cast<int>(label), file.string()});
        ++loaded;
      } catch (const DataError& e) {
        ds.load_errors.push_back(e.what());
      }
    }
    if (loaded == 0) throw DataError("class '" + name + "' has no readable images");
  }
  return ds;
}

void save_folder(const LabeledDataset& ds, const fs::path& root) {
  std::vector<std::size_t> next(ds.class_names.size(), 0);
  for (const auto& name : ds.class_names) fs::create_directories(root / name);
  for (const auto& s : ds.items) {
    char file[32];
    std::snprintf(file, sizeof(file), "%04zu.ppm", next[static_cast<std::size_t>(s.label)]++);
    write_ppm(root / ds.class_names[static_cast<std::size_t>(s.label)] / file, s.image);
  }
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train fraction must lie strictly between 0 and 1");
  }
  std::vector<bool> to_train(ds.size(), false);
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.items[i].label == static_cast<int>(c)) members.push_back(i);
    }
    if (members.size() < 2) {
      throw StratificationError("class '" + ds.class_names[c] + "' has " + std::to_string(members.size()) +
                                " item(s); stratified split needs at least 2");
    }
    Xoshiro256 rng(derive_seed(seed, c));
    shuffle(members, rng);
    // The small epsilon keeps products such as 0.7 * 110 from flooring to 76.
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(members.size()) + 1e-9));
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }
  std::vector<Sample> train, test;
  for (std::size_t i = 0; i < ds.size(); ++i) (to_train[i] ? train : test).push_back(ds.items[i]);
  return {ds.with_items(std::move(train)), ds.with_items(std::move(test))};
}

LabeledDataset resize_all(const LabeledDataset& ds, std::size_t height, std::size_t width) {
  LabeledDataset out = ds;
  for (auto& s : out.items) {
    if (s.image.dim(1) != height || s.image.dim(2) != width) s.image = resize_bilinear(s.image, height, width);
  }
  return out;
}

void ChannelStats::validate() const {
  for (double s : std) {
    if (!(s > 0.0)) throw ConfigError("standardization std must be > 0 for every channel");
  }
}

nlohmann::json ChannelStats::to_json() const {
  return {{"mean", mean}, {"std", std}, {"source_split_hash", source_hash}};
}

ChannelStats ChannelStats::from_json(const nlohmann::json& j) {
  try {
    ChannelStats s;
    s.mean = j.at("mean").get<std::array<double, 3>>();
    s.std = j.at("std").get<std::array<double, 3>>();
    s.source_hash = j.value("source_split_hash", std::string());
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("standardization stats: ") + e.what());
  }
}

ChannelStats compute_channel_stats(const LabeledDataset& ds) {
  if (ds.empty()) throw DataError("cannot compute channel statistics of an empty dataset");
  ChannelStats st;
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : ds.items) {
      const std::size_t plane = s.image.dim(1) * s.image.dim(2);
      for (std::size_t q = 0; q < plane; ++q) sum += s.image[c * plane + q];
      n += plane;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& s : ds.items) {
      const std::size_t plane = s.image.dim(1) * s.image.dim(2);
      for (std::size_t q = 0; q < plane; ++q) {
        const double d = s.image[c * plane + q] - mean;
        ss += d * d;
      }
    }
    st.mean[c] = mean;
    st.std[c] = std::sqrt(ss / static_cast<double>(n));
  }
  st.source_hash = split_hash(ds);
  return st;
}

Tensor standardize_image(const Tensor& image, const ChannelStats& stats) {
  Tensor out = image.clone();
  const std::size_t plane = image.dim(1) * image.dim(2);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t q = 0; q < plane; ++q) out[c * plane + q] = (image[c * plane + q] - stats.mean[c]) / stats.std[c];
  return out;
}

LabeledDataset standardize(const LabeledDataset& ds, const ChannelStats& stats) {
  stats.validate();
  LabeledDataset out = ds;
  for (auto& s : out.items) s.image = standardize_image(s.image, stats);
  return out;
}

std::string split_hash(const LabeledDataset& ds) {
  std::uint64_t h = fnv1a("");
  for (const auto& s : ds.items) {
    h = fnv1a(s.source, h);
    h = fnv1a("\t" + std::to_string(s.label) + "\n", h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<Tensor, std::vector<int>> make_batch(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("make_batch: empty index list");
  const Shape& img = ds.items.at(indices[0]).image.shape();
  const std::size_t per = shape_numel(img);
  Tensor batch(Shape{indices.size(), img[0], img[1], img[2]});
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Sample& s = ds.items.at(indices[b]);
    if (s.image.shape() != img) throw DataError("make_batch: mixed image sizes (" + s.source + ")");
    std::copy(s.image.data().begin(), s.image.data().end(), batch.data().begin() + static_cast<std::ptrdiff_t>(b * per));
    labels.push_back(s.label);
  }
  return {std::move(batch), std::move(labels)};
}

}  // namespace sresnet
