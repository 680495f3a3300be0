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

#ifndef SRESNET_MODEL_HPP_
#define SRESNET_MODEL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sresnet/blocks.hpp"
#include "sresnet/tensor.hpp"

namespace sresnet {

/// Where the single squeeze-and-excitation gate sits. Stage names follow
/// ResNet: conv1 is the stem, conv2_x..conv5_x are the residual stages.
///   S1: after the stem, before conv2_x
///   S2: between conv2_x and conv3_x
///   S3: between conv3_x and conv4_x   (SResNet-18)
///   S4: between conv4_x and conv5_x
enum class SeScheme { None, S1, S2, S3, S4 };

enum class ModelScale { Full, Tiny };

std::string_view to_string(SeScheme s);
/// Parses "none", "s1".."s4"; throws ConfigError naming the valid choices.
SeScheme parse_scheme(std::string_view text);
std::string_view to_string(ModelScale s);
ModelScale parse_scale(std::string_view text);

struct ModelConfig {
  std::size_t num_classes = 10;
  SeScheme se_scheme = SeScheme::S3;
  std::size_t stem_channels = 64;
  std::array<std::size_t, 4> blocks_per_stage{2, 2, 2, 2};
  std::size_t se_reduction = 16;
  bool se_bias = true;
  std::size_t input_height = 224;
  std::size_t input_width = 224;
  ModelScale scale = ModelScale::Full;

  /// ResNet-18 at desk scale: quarter widths, 32x32 input, no stem pooling,
  /// SE reduction 4.
  static ModelConfig tiny(std::size_t num_classes, SeScheme scheme);
  static ModelConfig full(std::size_t num_classes, SeScheme scheme);

  /// Stem output width after applying the scale divisor.
  std::size_t stem_width() const;
  /// Output widths of conv2_x..conv5_x.
  std::array<std::size_t, 4> stage_widths() const;
  std::size_t feature_dim() const { return stage_widths()[3]; }
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

enum class Mode { Training, Inference };

struct ForwardTrace {
  Tensor features;  // [N, D] after global average pooling
  Tensor logits;    // [N, num_classes]
};

/// ResNet-18 family classifier with an optional SE gate at a stage boundary.
class Model {
 public:
  /// Kaiming fan-in initialization; every layer draws from its own stream
  /// keyed by (seed, layer name), so layers shared between configurations
  /// start identical.
  static Model build(const ModelConfig& config, std::uint64_t seed);

  // Tensors are shared handles; copying a model would alias its weights.
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  /// Logits. Records onto the active tape only in training mode.
  Tensor forward(const Tensor& batch);
  /// Penultimate (post-GAP) activations. Inference mode only.
  Tensor extract_features(const Tensor& batch);
  /// Both outputs of a single pass.
  ForwardTrace forward_traced(const Tensor& batch);

  /// Visits every parameter and running statistic in a fixed order.
  void visit(const TensorVisitor& fn);
  std::vector<std::pair<std::string, Tensor>> named_tensors(bool include_buffers = true);
  std::vector<Tensor> parameters();
  std::size_t parameter_count();

  bool has_se() const { return se_.has_value(); }
  SEBlock* se_block() { return se_ ? &*se_ : nullptr; }
  Linear& classifier() { return fc_; }
  std::size_t se_block_count() const { return se_ ? 1 : 0; }

  /// Re-draws the classifier weights from the given seed.
  void reset_classifier(std::uint64_t seed);

 private:
  explicit Model(ModelConfig config) : config_(std::move(config)) {}
  Tensor features(const Tensor& batch, bool training);
  void check_input(const Tensor& batch) const;

  ModelConfig config_;
  Mode mode_ = Mode::Training;
  Conv2d stem_conv_;
  BatchNorm2d stem_bn_;
  std::array<std::vector<ResidualBlock>, 4> stages_;
  std::optional<SEBlock> se_;
  Linear fc_;
};

/// Name of the stage a scheme's gate follows ("conv1", "conv2_x", ...).
std::string_view se_anchor_stage(SeScheme s);

}  // namespace sresnet

#endif  // SRESNET_MODEL_HPP_
