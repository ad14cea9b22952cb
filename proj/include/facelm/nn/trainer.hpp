#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facelm/nn/adam.hpp"
#include "facelm/nn/history.hpp"
#include "facelm/nn/model.hpp"

namespace facelm::nn {

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  LrSchedule schedule;
  /// Per-class loss weights; empty means unweighted.
  std::vector<double> class_weights;
};

struct TrainResult {
  MlpModel model;
  TrainingHistory history;
};

/// Per epoch: seeded shuffle, minibatch forward/backward/Adam in train mode,
/// then full eval-mode passes over the train and test sets. A trailing
/// batch of a single sample is folded into the previous batch so batch
/// normalization always sees at least two rows. An empty test set records
/// NaN test metrics.
TrainResult train(MlpModel model, const Matrix& X_train, std::span<const int> y_train,
                  const Matrix& X_test, std::span<const int> y_test, const TrainConfig& config);

struct EvalMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Eval-mode loss and accuracy; the model's mode is restored afterwards.
EvalMetrics evaluate_model(MlpModel& model, const Matrix& X, std::span<const int> y);

/// Eval-mode predicted labels.
std::vector<int> predict_labels(MlpModel& model, const Matrix& X);

/// Inverse-frequency weights n / (C * n_c), normalized over the classes
/// present; absent classes get weight 0.
std::vector<double> inverse_frequency_weights(std::span<const int> labels);

}  // namespace facelm::nn
