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

#ifndef SRESNET_TRAIN_HPP_
#define SRESNET_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sresnet/adam.hpp"
#include "sresnet/augment.hpp"
#include "sresnet/dataset.hpp"
#include "sresnet/model.hpp"

namespace sresnet {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;
};

struct History {
  std::vector<EpochRecord> epochs;

  /// "epoch,train_loss,train_acc,test_acc,seconds" plus one row per epoch.
  std::string to_csv() const;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  int epochs = 50;
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool shuffle = true;

  /// Applied per item on [0,1] images before standardization.
  std::optional<AugmentSpec> augment;
  /// Applied per item after augmentation; omit when the datasets are
  /// already standardized.
  std::optional<ChannelStats> standardization;
  /// Threads preparing (augmenting, standardizing) a batch. Results do not
  /// depend on this value.
  std::size_t workers = 1;

  /// Written whenever test accuracy improves on the best so far.
  std::filesystem::path best_checkpoint;
  nlohmann::json checkpoint_extra;

  /// When false, History::seconds is written as 0 so runs compare byte-equal.
  bool record_timing = true;
  /// Learning-rate hook (epoch, base lr) -> lr. Unset: constant lr.
  std::function<double(int, double)> lr_schedule;
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

/// Mini-batch Adam on cross-entropy. Per epoch: seeded shuffle, batches,
/// forward/backward/step, then test accuracy in inference mode. Throws
/// ContractError for empty datasets and TrainingDivergence when the loss
/// stops being finite.
History train(Model& model, const LabeledDataset& train_set, const LabeledDataset& test_set, const TrainConfig& config);

/// Fraction of argmax predictions equal to the label, in inference mode.
/// The model's mode is restored afterwards.
double evaluate(Model& model, const LabeledDataset& dataset, std::size_t batch_size = 64);

/// Per-item predictions in dataset order.
std::vector<int> predict(Model& model, const LabeledDataset& dataset, std::size_t batch_size = 64);

struct AblationReport {
  /// (scheme, final test accuracy in [0,1]) in the requested order.
  std::vector<std::pair<SeScheme, double>> entries;
  std::vector<History> histories;  // parallel to entries

  /// Two rows:
  ///   Scheme,Scheme 1,Scheme 2,...
  ///   Precision /%,<acc%>,...
  /// "Precision" is test-set accuracy in percent, one decimal.
  std::string to_csv() const;
};

/// Trains one fresh model per scheme from the same seeds and reports final
/// test accuracy. With `checkpoint_dir` set, writes scheme_<s>.ckpt there.
AblationReport ablate(const ModelConfig& base, std::uint64_t model_seed, const LabeledDataset& train_set,
                      const LabeledDataset& test_set, const TrainConfig& config, const std::vector<SeScheme>& schemes,
                      const std::filesystem::path& checkpoint_dir = {});

/// "Scheme 1" .. "Scheme 4" ("Baseline" for none).
std::string scheme_label(SeScheme s);

}  // namespace sresnet

#endif  // SRESNET_TRAIN_HPP_
