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

#include "sresnet/model.hpp"

#include "sresnet/error.hpp"
#include "sresnet/ops.hpp"

namespace sresnet {

namespace {

constexpr std::array<const char*, 4> kStageNames{"conv2_x", "conv3_x", "conv4_x", "conv5_x"};

// Index of the stage after which the gate sits; -1 means after the stem.
int se_anchor(SeScheme s) {
  switch (s) {
    case SeScheme::S1: return -1;
    case SeScheme::S2: return 0;
    case SeScheme::S3: return 1;
    case SeScheme::S4: return 2;
    case SeScheme::None: break;
  }
  return -2;
}

}  // namespace

std::string_view to_string(SeScheme s) {
  switch (s) {
    case SeScheme::None: return "none";
    case SeScheme::S1: return "s1";
    case SeScheme::S2: return "s2";
    case SeScheme::S3: return "s3";
    case SeScheme::S4: return "s4";
  }
  return "none";
}

SeScheme parse_scheme(std::string_view text) {
  for (SeScheme s : {SeScheme::None, SeScheme::S1, SeScheme::S2, SeScheme::S3, SeScheme::S4}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("unknown SE scheme '" + std::string(text) + "' (valid: none, s1, s2, s3, s4)");
}

std::string_view to_string(ModelScale s) { return s == ModelScale::Tiny ? "tiny" : "full"; }

ModelScale parse_scale(std::string_view text) {
  if (text == "tiny") return ModelScale::Tiny;
  if (text == "full") return ModelScale::Full;
  throw ConfigError("unknown model scale '" + std::string(text) + "' (valid: full, tiny)");
}

std::string_view se_anchor_stage(SeScheme s) {
  const int a = se_anchor(s);
  if (a == -2) return "";
  if (a == -1) return "conv1";
  return kStageNames[static_cast<std::size_t>(a)];
}

ModelConfig ModelConfig::tiny(std::size_t num_classes, SeScheme scheme) {
  ModelConfig c;
  c.num_classes = num_classes;
  c.se_scheme = scheme;
  c.scale = ModelScale::Tiny;
  c.input_height = 32;
  c.input_width = 32;
  c.se_reduction = 4;
  return c;
}

ModelConfig ModelConfig::full(std::size_t num_classes, SeScheme scheme) {
  ModelConfig c;
  c.num_classes = num_classes;
  c.se_scheme = scheme;
  return c;
}

std::size_t ModelConfig::stem_width() const {
  return scale == ModelScale::Tiny ? stem_channels / 4 : stem_channels;
}

std::array<std::size_t, 4> ModelConfig::stage_widths() const {
  const std::size_t w = stem_width();
  return {w, 2 * w, 4 * w, 8 * w};
}

void ModelConfig::validate() const {
  if (num_classes == 0) throw ConfigError("num_classes must be positive");
  if (stem_width() == 0) throw ConfigError("stem width must be positive (tiny scale needs stem_channels >= 4)");
  if (se_reduction == 0) throw ConfigError("se_reduction must be positive");
  if (input_height == 0 || input_width == 0) throw ConfigError("input size must be positive");
  for (std::size_t b : blocks_per_stage) {
    if (b == 0) throw ConfigError("every stage needs at least one residual block");
  }
}

Model Model::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model m(config);
  const bool tiny = config.scale == ModelScale::Tiny;
  const std::size_t stem = config.stem_width();
  m.stem_conv_ = tiny ? Conv2d::make(3, stem, 3, 1, 1, layer_seed(seed, "stem.conv"))
                      : Conv2d::make(3, stem, 7, 2, 3, layer_seed(seed, "stem.conv"));
  m.stem_bn_ = BatchNorm2d::make(stem);

  const auto widths = config.stage_widths();
  std::size_t in = stem;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t b = 0; b < config.blocks_per_stage[s]; ++b) {
      const std::size_t stride = (s > 0 && b == 0) ? 2 : 1;
      const std::string name = std::string(kStageNames[s]) + "." + std::to_string(b);
      m.stages_[s].push_back(ResidualBlock::make(in, widths[s], stride, seed, name));
      in = widths[s];
    }
  }

  const int anchor = se_anchor(config.se_scheme);
  if (anchor != -2) {
    const std::size_t channels = anchor == -1 ? stem : widths[static_cast<std::size_t>(anchor)];
    m.se_ = SEBlock::make(channels, config.se_reduction, config.se_bias, seed, "se");
  }
  m.fc_ = Linear::make(widths[3], config.num_classes, true, layer_seed(seed, "fc"));
  return m;
}

void Model::reset_classifier(std::uint64_t seed) {
  fc_ = Linear::make(config_.feature_dim(), config_.num_classes, true, layer_seed(seed, "fc"));
}

void Model::check_input(const Tensor& batch) const {
  if (!batch.defined() || batch.rank() != 4 || batch.dim(1) != 3) {
    throw DimensionError("model input must be [N,3,H,W], got " +
                         (batch.defined() ? shape_str(batch.shape()) : std::string("<undefined>")));
  }
  if (batch.dim(2) != config_.input_height || batch.dim(3) != config_.input_width) {
    throw DimensionError("model input spatial size: expected " + std::to_string(config_.input_height) + "x" +
                         std::to_string(config_.input_width) + ", got " + std::to_string(batch.dim(2)) + "x" +
                         std::to_string(batch.dim(3)));
  }
}

Tensor Model::features(const Tensor& batch, bool training) {
  check_input(batch);
  const int anchor = se_anchor(config_.se_scheme);
  Tensor x = relu(stem_bn_.forward(stem_conv_.forward(batch), training));
  if (config_.scale == ModelScale::Full) x = max_pool2d(x, 3, 2, 1);
  if (se_ && anchor == -1) x = se_->forward(x);
  for (std::size_t s = 0; s < 4; ++s) {
    for (auto& block : stages_[s]) x = block.forward(x, training);
    if (se_ && anchor == static_cast<int>(s)) x = se_->forward(x);
  }
  return global_avg_pool(x);
}

Tensor Model::forward(const Tensor& batch) { return forward_traced(batch).logits; }

ForwardTrace Model::forward_traced(const Tensor& batch) {
  if (mode_ == Mode::Inference) {
    NoGradGuard no_grad;
    Tensor f = features(batch, false);
    return {f, fc_.forward(f)};
  }
  Tensor f = features(batch, true);
  return {f, fc_.forward(f)};
}

Tensor Model::extract_features(const Tensor& batch) {
  if (mode_ != Mode::Inference) {
    throw ContractError("extract_features requires inference mode (weights must stay fixed)");
  }
  NoGradGuard no_grad;
  return features(batch, false);
}

void Model::visit(const TensorVisitor& fn) {
  stem_conv_.visit("stem.conv", fn);
  stem_bn_.visit("stem.bn", fn);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].visit(std::string(kStageNames[s]) + "." + std::to_string(b), fn);
    }
  }
  if (se_) se_->visit("se", fn);
  fc_.visit("fc", fn);
}

std::vector<std::pair<std::string, Tensor>> Model::named_tensors(bool include_buffers) {
  std::vector<std::pair<std::string, Tensor>> out;
  visit([&](const std::string& name, Tensor& t, TensorRole role) {
    if (include_buffers || role == TensorRole::Parameter) out.emplace_back(name, t);
  });
  return out;
}

std::vector<Tensor> Model::parameters() {
  std::vector<Tensor> out;
  visit([&](const std::string&, Tensor& t, TensorRole role) {
    if (role == TensorRole::Parameter) out.push_back(t);
  });
  return out;
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.numel();
  return n;
}

}  // namespace sresnet
