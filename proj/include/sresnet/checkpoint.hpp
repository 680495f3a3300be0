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

#ifndef SRESNET_CHECKPOINT_HPP_
#define SRESNET_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <json.hpp>

#include "sresnet/model.hpp"

namespace sresnet {

// On-disk layout (all integers little-endian), see docs/checkpoint-format.md:
//
//   offset 0   8 bytes   magic "SRNCKPT\n"
//   offset 8   u32       format version (kCheckpointVersion)
//   offset 12  u32       reserved, 0
//   offset 16  u64       header length L in bytes
//   offset 24  L bytes   UTF-8 JSON header
//   offset 24+L          payload: raw f64 tensors at the header's offsets

inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json to_json(const ModelConfig& config);
/// Throws ConfigError on missing or invalid fields.
ModelConfig model_config_from_json(const nlohmann::json& j);

struct CheckpointHeader {
  std::uint32_t version = 0;
  ModelConfig config;
  /// Free-form metadata stored alongside the weights (e.g. standardization
  /// statistics, class names).
  nlohmann::json extra;
};

void save_checkpoint(Model& model, const std::filesystem::path& path, const nlohmann::json& extra = {});

/// Reads and validates only the header.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

struct LoadOptions {
  /// Transfer-learning load: every tensor except the classifier ("fc.*")
  /// must match; the classifier is left as initialized.
  bool skip_classifier = false;
};

/// Copies stored tensors into `model`. The whole file is validated (magic,
/// version, sizes, names, shapes) before any tensor is written, so a
/// failing load leaves the model untouched.
void load_checkpoint_into(Model& model, const std::filesystem::path& path, const LoadOptions& options = {});

/// Builds a model for `config` and loads the checkpoint into it.
Model load_checkpoint(const std::filesystem::path& path, const ModelConfig& config);

}  // namespace sresnet

#endif  // SRESNET_CHECKPOINT_HPP_
