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

#include "sresnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "sresnet/checkpoint.hpp"
#include "sresnet/error.hpp"
#include "sresnet/loss.hpp"
#include "sresnet/rng.hpp"

namespace sresnet {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;

class ModeGuard {
 public:
  ModeGuard(Model& m, Mode mode) : model_(m), saved_(m.mode()) { m.set_mode(mode); }
  ~ModeGuard() { model_.set_mode(saved_); }
  ModeGuard(const ModeGuard&) = delete;
  ModeGuard& operator=(const ModeGuard&) = delete;

 private:
  Model& model_;
  Mode saved_;
};

// Builds the model input for the selected items. Each item's augmentation
// draw depends on (epoch, dataset index) only, so any worker split produces
// the same batch.
Tensor prepare_batch(const LabeledDataset& ds, std::span<const std::size_t> indices, int epoch,
                     const TrainConfig& config) {
  std::vector<Tensor> prepared(indices.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < indices.size(); b += stride) {
      Tensor x = ds.items[indices[b]].image;
      if (config.augment && config.augment->any()) {
        x = augment(x, *config.augment, derive_seed(static_cast<std::uint64_t>(epoch), indices[b]));
      }
      if (config.standardization) x = standardize_image(x, *config.standardization);
      prepared[b] = std::move(x);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, indices.size());
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  const Shape& out_img = prepared[0].shape();
  const std::size_t per = shape_numel(out_img);
  Tensor batch(Shape{indices.size(), out_img[0], out_img[1], out_img[2]});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (prepared[b].shape() != out_img) throw DataError("mixed image sizes in batch (" + ds.items[indices[b]].source + ")");
    std::copy(prepared[b].data().begin(), prepared[b].data().end(),
              batch.data().begin() + static_cast<std::ptrdiff_t>(b * per));
  }
  return batch;
}

std::string format_row(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.17g,%.6f,%.6f,%.3f\n", r.epoch, r.train_loss, r.train_acc, r.test_acc,
                r.seconds);
  return buf;
}

}  // namespace

TrainingDivergence::TrainingDivergence(int epoch, int batch, double loss)
    : Error("training diverged: non-finite loss " + std::to_string(loss) + " at epoch " + std::to_string(epoch) +
            ", batch " + std::to_string(batch)),
      epoch_(epoch),
      batch_(batch),
      loss_(loss) {}

std::string History::to_csv() const {
  std::string out = "epoch,train_loss,train_acc,test_acc,seconds\n";
  for (const auto& r : epochs) out += format_row(r);
  return out;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(adam.lr >= 0.0)) throw ConfigError("lr must be >= 0");
  adam.validate();
  if (augment) augment->validate();
  if (standardization) standardization->validate();
}

std::vector<int> predict(Model& model, const LabeledDataset& dataset, std::size_t batch_size) {
  if (dataset.empty()) throw ContractError("predict: empty dataset");
  if (batch_size == 0) throw ConfigError("predict: batch size must be positive");
  ModeGuard guard(model, Mode::Inference);
  std::vector<int> out;
  out.reserve(dataset.size());
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, idx.size() - start);
    auto [batch, labels] = make_batch(dataset, std::span(idx).subspan(start, n));
    const auto preds = argmax_rows(model.forward(batch));
    out.insert(out.end(), preds.begin(), preds.end());
  }
  return out;
}

double evaluate(Model& model, const LabeledDataset& dataset, std::size_t batch_size) {
  if (dataset.empty()) throw ContractError("evaluate: empty dataset");
  const auto preds = predict(model, dataset, batch_size);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == dataset.items[i].label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

History train(Model& model, const LabeledDataset& train_set, const LabeledDataset& test_set, const TrainConfig& config) {
  if (train_set.empty()) throw ContractError("train: empty training set");
  if (test_set.empty()) throw ContractError("train: empty test set");
  config.validate();

  const LabeledDataset test_ready = config.standardization ? standardize(test_set, *config.standardization) : test_set;
  Adam optimizer(model.parameters(), config.adam);
  History history;
  double best = -1.0;
  model.set_mode(Mode::Training);

  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.lr_schedule) optimizer.set_lr(config.lr_schedule(epoch, config.adam.lr));
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle) {
      Xoshiro256 rng(derive_seed(config.seed, kShuffleStream, static_cast<std::uint64_t>(epoch)));
      shuffle(order, rng);
    }

    double loss_sum = 0.0;
    std::size_t correct = 0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      const auto indices = std::span<const std::size_t>(order).subspan(start, n);
      Tensor batch = prepare_batch(train_set, indices, epoch, config);
      std::vector<int> labels(n);
      for (std::size_t b = 0; b < n; ++b) labels[b] = train_set.items[indices[b]].label;

      Tape tape;
      Tensor logits, loss;
      {
        auto recording = tape.record();
        logits = model.forward(batch);
        loss = cross_entropy(logits, labels);
      }
      const double value = loss.item();
      if (!std::isfinite(value)) throw TrainingDivergence(epoch, batch_index, value);
      optimizer.zero_grad();
      backward(loss);
      optimizer.step();

      loss_sum += value * static_cast<double>(n);
      const auto preds = argmax_rows(logits);
      for (std::size_t b = 0; b < n; ++b) correct += preds[b] == labels[b] ? 1 : 0;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    rec.test_acc = evaluate(model, test_ready, config.batch_size);
    if (config.record_timing) {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    history.epochs.push_back(rec);
    if (!config.best_checkpoint.empty() && rec.test_acc > best) {
      best = rec.test_acc;
      save_checkpoint(model, config.best_checkpoint, config.checkpoint_extra);
    }
    if (config.on_epoch) config.on_epoch(rec);
  }
  return history;
}

std::string scheme_label(SeScheme s) {
  switch (s) {
    case SeScheme::S1: return "Scheme 1";
    case SeScheme::S2: return "Scheme 2";
    case SeScheme::S3: return "Scheme 3";
    case SeScheme::S4: return "Scheme 4";
    case SeScheme::None: break;
  }
  return "Baseline";
}

std::string AblationReport::to_csv() const {
  std::string header = "Scheme";
  std::string row = "Precision /%";
  for (const auto& [scheme, acc] : entries) {
    header += "," + scheme_label(scheme);
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",%.1f", acc * 100.0);
    row += buf;
  }
  return header + "\n" + row + "\n";
}

AblationReport ablate(const ModelConfig& base, std::uint64_t model_seed, const LabeledDataset& train_set,
                      const LabeledDataset& test_set, const TrainConfig& config, const std::vector<SeScheme>& schemes,
                      const std::filesystem::path& checkpoint_dir) {
  if (schemes.empty()) throw ConfigError("ablate: at least one scheme is required");
  AblationReport report;
  for (SeScheme s : schemes) {
    ModelConfig mc = base;
    mc.se_scheme = s;
    Model model = Model::build(mc, model_seed);
    TrainConfig tc = config;
    tc.best_checkpoint.clear();
    const History h = train(model, train_set, test_set, tc);
    if (!checkpoint_dir.empty()) {
      save_checkpoint(model, checkpoint_dir / ("scheme_" + std::string(to_string(s)) + ".ckpt"), config.checkpoint_extra);
    }
    report.entries.emplace_back(s, h.epochs.back().test_acc);
    report.histories.push_back(h);
  }
  return report;
}

}  // namespace sresnet
