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

#ifndef SRESNET_ERROR_HPP_
#define SRESNET_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sresnet {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter, option or specification value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API precondition (bad label, wrong mode, missing grad...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Batch statistics requested over fewer than two elements per channel.
class DegenerateBatchError : public Error {
 public:
  using Error::Error;
};

/// backward() called on a tape that was already replayed.
class ConsumedTapeError : public Error {
 public:
  using Error::Error;
};

/// Unusable input data: unreadable folders, empty classes, bad images.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A class has too few items to be split per class.
class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

/// A named entity (class, region, metric) does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Cosine similarity against a zero-norm vector.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

/// Base of all checkpoint loading failures.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

class CheckpointFormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointShapeError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Loss became NaN or infinite during training.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(int epoch, int batch, double loss);

  int epoch() const { return epoch_; }
  int batch() const { return batch_; }
  double loss() const { return loss_; }

 private:
  int epoch_;
  int batch_;
  double loss_;
};

/// Nothing could be rendered or written.
class ExportError : public Error {
 public:
  using Error::Error;
};

}  // namespace sresnet

#endif  // SRESNET_ERROR_HPP_
