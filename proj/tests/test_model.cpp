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

#include <doctest.h>

#include <cmath>
#include <map>

#include "sresnet/blocks.hpp"
#include "sresnet/checkpoint.hpp"
#include "sresnet/error.hpp"
#include "sresnet/model.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace sresnet;
using namespace sresnet::testing;

namespace {

void fill(Tensor& t, double v) {
  for (double& x : t.data()) x = v;
}

std::map<std::string, std::vector<double>> snapshot(Model& m) {
  std::map<std::string, std::vector<double>> out;
  for (auto& [name, t] : m.named_tensors()) out[name] = {t.data().begin(), t.data().end()};
  return out;
}

std::vector<double> vals(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST_CASE("residual block: zeroed residual branch is relu of the identity path") {
  ResidualBlock block = ResidualBlock::make(3, 3, 1, 5, "blk");
  REQUIRE_FALSE(block.shortcut.has_value());
  fill(block.conv1.weight, 0.0);
  fill(block.conv2.weight, 0.0);
  Xoshiro256 rng(1);
  SUBCASE("non-negative input passes through") {
    const Tensor x = random_tensor({2, 3, 4, 4}, rng, 0.0, 1.0);
    CHECK(vals(block.forward(x, true)) == vals(x));
  }
  SUBCASE("negative entries are clipped") {
    const Tensor x = random_tensor({2, 3, 4, 4}, rng);
    CHECK(vals(block.forward(x, true)) == vals(relu(x)));
  }
}

TEST_CASE("residual block matches a straight-line composition of primitives") {
  Xoshiro256 rng(2);
  for (const auto& [in, out, stride] : {std::tuple{3, 3, 1}, std::tuple{3, 5, 2}}) {
    ResidualBlock block = ResidualBlock::make(in, out, stride, 17, "blk");
    for (auto* bn : {&block.bn1, &block.bn2}) {
      bn->gamma = random_tensor({static_cast<std::size_t>(out)}, rng, 0.5, 1.5);
      bn->beta = random_tensor({static_cast<std::size_t>(out)}, rng);
    }
    const Tensor x = random_tensor({2, static_cast<std::size_t>(in), 6, 6}, rng);
    BatchNormOptions o;
    Tensor m1(Shape{static_cast<std::size_t>(out)}, 0.0), v1(Shape{static_cast<std::size_t>(out)}, 1.0);
    Tensor m2 = m1.clone(), v2 = v1.clone(), m3 = m1.clone(), v3 = v1.clone();
    Tensor h = relu(batch_norm2d(conv2d(x, block.conv1.weight, static_cast<std::size_t>(stride), 1), block.bn1.gamma,
                                 block.bn1.beta, m1, v1, o));
    h = batch_norm2d(conv2d(h, block.conv2.weight, 1, 1), block.bn2.gamma, block.bn2.beta, m2, v2, o);
    Tensor sc = x;
    if (block.shortcut) {
      sc = batch_norm2d(conv2d(x, block.shortcut->conv.weight, static_cast<std::size_t>(stride), 0),
                        block.shortcut->bn.gamma, block.shortcut->bn.beta, m3, v3, o);
    }
    const Tensor expected = relu(add(h, sc));
    const Tensor got = block.forward(x, true);
    REQUIRE(got.shape() == expected.shape());
    for (std::size_t i = 0; i < got.numel(); ++i) CHECK(std::abs(got[i] - expected[i]) < 1e-10);
  }
}

TEST_CASE("residual block rejects a channel mismatch") {
  ResidualBlock block = ResidualBlock::make(4, 4, 1, 1, "blk");
  CHECK_THROWS_AS(block.forward(Tensor(Shape{1, 3, 4, 4}), true), DimensionError);
}

TEST_CASE("residual block gradients flow through both branches") {
  Xoshiro256 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    ResidualBlock block = ResidualBlock::make(2, 3, 2, 40 + trial, "blk");
    Tensor x = random_tensor({2, 2, 4, 4}, rng);
    const Tensor r = random_tensor({2, 3, 2, 2}, rng);
    const auto g = gradient_check([&] { return weighted_sum(block.forward(x, true), r); },
                                  {x, block.conv1.weight, block.conv2.weight, block.bn1.gamma,
                                   block.shortcut->conv.weight, block.shortcut->bn.beta});
    CHECK_MESSAGE(g.max_rel_error < 1e-4, g.worst);
  }
}

TEST_CASE("SE block") {
  Xoshiro256 rng(4);
  SEBlock se = SEBlock::make(8, 4, true, 3, "se");
  CHECK(se.hidden() == 2);
  CHECK(SEBlock::make(3, 16, true, 3, "se").hidden() == 1);

  SUBCASE("zero excitation weights halve the input") {
    fill(se.fc1.weight, 0.0);
    fill(se.fc1.bias, 0.0);
    fill(se.fc2.weight, 0.0);
    fill(se.fc2.bias, 0.0);
    const Tensor x = random_tensor({2, 8, 3, 3}, rng);
    const Tensor y = se.forward(x);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y[i] == 0.5 * x[i]);
  }
  SUBCASE("saturated gate is nearly the identity") {
    fill(se.fc2.weight, 0.0);
    fill(se.fc2.bias, 20.0);
    const Tensor x = random_tensor({2, 8, 3, 3}, rng);
    const Tensor y = se.forward(x);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-8);
  }
  SUBCASE("output/input ratio is one scalar in (0,1) per channel") {
    const Tensor x = random_away_from_zero({3, 8, 4, 4}, rng);
    const Tensor y = se.forward(x);
    const Tensor w = se.gate(x);
    for (std::size_t nc = 0; nc < 24; ++nc) {
      CHECK(w[nc] > 0.0);
      CHECK(w[nc] < 1.0);
      const double ratio = y[nc * 16] / x[nc * 16];
      for (std::size_t k = 0; k < 16; ++k) CHECK(std::abs(y[nc * 16 + k] / x[nc * 16 + k] - ratio) < 1e-12);
    }
  }
  SUBCASE("gradient check") {
    for (int trial = 0; trial < 3; ++trial) {
      Tensor x = random_tensor({2, 8, 3, 3}, rng);
      const Tensor r = random_tensor({2, 8, 3, 3}, rng);
      const auto g = gradient_check([&] { return weighted_sum(se.forward(x), r); },
                                    {x, se.fc1.weight, se.fc1.bias, se.fc2.weight, se.fc2.bias});
      CHECK_MESSAGE(g.max_rel_error < 1e-4, g.worst);
    }
  }
}

TEST_CASE("scheme placement") {
  struct Case {
    SeScheme s;
    const char* anchor;
    std::size_t tiny, full;
  };
  for (const Case& c : {Case{SeScheme::S1, "conv1", 16, 64}, Case{SeScheme::S2, "conv2_x", 16, 64},
                        Case{SeScheme::S3, "conv3_x", 32, 128}, Case{SeScheme::S4, "conv4_x", 64, 256}}) {
    CAPTURE(to_string(c.s));
    CHECK(se_anchor_stage(c.s) == c.anchor);
    Model tiny = Model::build(ModelConfig::tiny(4, c.s), 1);
    CHECK(tiny.se_block_count() == 1);
    CHECK(tiny.se_block()->channels == c.tiny);
    Model full = Model::build(ModelConfig::full(10, c.s), 1);
    CHECK(full.se_block_count() == 1);
    CHECK(full.se_block()->channels == c.full);
  }
  CHECK(Model::build(ModelConfig::tiny(4, SeScheme::None), 1).se_block_count() == 0);
  CHECK_THROWS_AS(parse_scheme("s9"), ConfigError);
}

TEST_CASE("parameter counts") {
  // The reference ResNet-18 for 1000 classes has 11,689,512 trainable
  // parameters (convs without bias, batch-norm scale/shift, fc with bias).
  ModelConfig base = ModelConfig::full(1000, SeScheme::None);
  Model plain = Model::build(base, 0);
  CHECK(plain.parameter_count() == 11689512);

  // One gate on conv3_x's 128 channels, r = 16: 128*8 + 8 + 8*128 + 128.
  base.se_scheme = SeScheme::S3;
  Model sresnet = Model::build(base, 0);
  CHECK(sresnet.parameter_count() - plain.parameter_count() == 2184);
}

TEST_CASE("initialization is seeded and shared across schemes") {
  Model a = Model::build(ModelConfig::tiny(4, SeScheme::S3), 9);
  Model b = Model::build(ModelConfig::tiny(4, SeScheme::S3), 9);
  Model c = Model::build(ModelConfig::tiny(4, SeScheme::S3), 10);
  Model none = Model::build(ModelConfig::tiny(4, SeScheme::None), 9);
  Model s1 = Model::build(ModelConfig::tiny(4, SeScheme::S1), 9);
  const auto sa = snapshot(a), sb = snapshot(b), sc = snapshot(c), sn = snapshot(none), s1s = snapshot(s1);
  CHECK(sa == sb);
  CHECK(sa.at("fc.weight") != sc.at("fc.weight"));
  for (const auto& [name, v] : sn) {
    CHECK(sa.at(name) == v);
    CHECK(s1s.at(name) == v);
  }
}

TEST_CASE("forward and feature extraction") {
  Model m = Model::build(ModelConfig::tiny(5, SeScheme::S3), 3);
  Xoshiro256 rng(5);
  const Tensor x = random_tensor({2, 3, 32, 32}, rng, 0.0, 1.0);

  const Tensor logits = m.forward(x);
  CHECK(logits.shape() == Shape{2, 5});
  for (double v : logits.data()) CHECK(std::isfinite(v));

  CHECK_THROWS_AS(m.extract_features(x), ContractError);
  CHECK_THROWS_AS(m.forward(Tensor(Shape{1, 3, 16, 16})), DimensionError);

  m.set_mode(Mode::Inference);
  CHECK(vals(m.forward(x)) == vals(m.forward(x)));

  SUBCASE("features equal the pre-classifier activations") {
    const ForwardTrace t = m.forward_traced(x);
    CHECK(vals(m.extract_features(x)) == vals(t.features));
    CHECK(t.features.shape() == Shape{2, 128});
  }
  SUBCASE("duplicate images give identical rows; batch composition does not matter") {
    Tensor dup(Shape{3, 3, 32, 32});
    const std::size_t per = 3 * 32 * 32;
    for (std::size_t i = 0; i < per; ++i) dup[i] = dup[per + i] = x[i], dup[2 * per + i] = x[per + i];
    const Tensor f = m.extract_features(dup);
    const Tensor alone = m.extract_features(Tensor(Shape{1, 3, 32, 32}, std::vector<double>(x.data().begin(), x.data().begin() + per)));
    const std::size_t dim = m.config().feature_dim();
    for (std::size_t d = 0; d < dim; ++d) {
      CHECK(f[d] == f[dim + d]);
      CHECK(std::abs(f[d] - alone[d]) < 1e-6);
    }
  }
}

TEST_CASE("full-scale feature width is 512") {
  ModelConfig cfg = ModelConfig::full(10, SeScheme::S3);
  CHECK(cfg.feature_dim() == 512);
  cfg.input_height = cfg.input_width = 64;
  Model m = Model::build(cfg, 1);
  m.set_mode(Mode::Inference);
  Xoshiro256 rng(6);
  CHECK(m.extract_features(random_tensor({1, 3, 64, 64}, rng)).shape() == Shape{1, 512});
}

TEST_CASE("SE neutralization reproduces the plain network") {
  Model se = Model::build(ModelConfig::tiny(4, SeScheme::S3), 12);
  Model plain = Model::build(ModelConfig::tiny(4, SeScheme::None), 12);
  fill(se.se_block()->fc2.weight, 0.0);
  fill(se.se_block()->fc2.bias, 20.0);
  se.set_mode(Mode::Inference);
  plain.set_mode(Mode::Inference);
  Xoshiro256 rng(7);
  const Tensor x = random_tensor({4, 3, 32, 32}, rng, 0.0, 1.0);
  const Tensor a = se.forward(x), b = plain.forward(x);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-4);
}

TEST_CASE("checkpoint roundtrip, partial load and corruption") {
  TempDir dir("ckpt");
  Model m = Model::build(ModelConfig::tiny(4, SeScheme::S3), 21);
  // Move running statistics away from their defaults.
  Xoshiro256 rng(8);
  (void)m.forward(random_tensor({4, 3, 32, 32}, rng));
  m.set_mode(Mode::Inference);
  const auto path = dir / "m.ckpt";
  save_checkpoint(m, path, {{"note", "x"}});

  SUBCASE("roundtrip is forward bit-identical") {
    Model r = load_checkpoint(path, m.config());
    r.set_mode(Mode::Inference);
    for (int b = 0; b < 10; ++b) {
      const Tensor x = random_tensor({2, 3, 32, 32}, rng);
      CHECK(vals(m.forward(x)) == vals(r.forward(x)));
    }
    const CheckpointHeader h = read_checkpoint_header(path);
    CHECK(h.version == kCheckpointVersion);
    CHECK(h.config == m.config());
    CHECK(h.extra.at("note") == "x");
  }
  SUBCASE("partial load keeps a fresh classifier") {
    Model target = Model::build(ModelConfig::tiny(7, SeScheme::S3), 99);
    const auto before = snapshot(target);
    load_checkpoint_into(target, path, LoadOptions{.skip_classifier = true});
    const auto after = snapshot(target), source = snapshot(m);
    for (const auto& [name, v] : after) {
      if (name.rfind("fc.", 0) == 0) CHECK(v == before.at(name));
      else CHECK(v == source.at(name));
    }
    Model wrong = Model::build(ModelConfig::tiny(7, SeScheme::S3), 99);
    CHECK_THROWS_AS(load_checkpoint_into(wrong, path), CheckpointShapeError);
  }
  SUBCASE("corruption is detected before anything is written") {
    Model target = Model::build(ModelConfig::tiny(4, SeScheme::S3), 5);
    const auto before = snapshot(target);
    const std::string bytes = slurp(path);

    std::string bad = bytes;
    bad[0] = 'X';
    spit(dir / "magic.ckpt", bad);
    CHECK_THROWS_AS(load_checkpoint_into(target, dir / "magic.ckpt"), CheckpointFormatError);

    bad = bytes;
    bad[8] = 9;
    spit(dir / "version.ckpt", bad);
    CHECK_THROWS_AS(load_checkpoint_into(target, dir / "version.ckpt"), CheckpointVersionError);

    spit(dir / "short.ckpt", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(load_checkpoint_into(target, dir / "short.ckpt"), CheckpointTruncatedError);

    Model other = Model::build(ModelConfig::tiny(4, SeScheme::S1), 5);
    save_checkpoint(other, dir / "s1.ckpt");
    CHECK_THROWS_AS(load_checkpoint_into(target, dir / "s1.ckpt"), CheckpointShapeError);

    CHECK(snapshot(target) == before);
  }
}
