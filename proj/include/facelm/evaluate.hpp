#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facelm/features.hpp"
#include "facelm/forest.hpp"
#include "facelm/nn/trainer.hpp"
#include "facelm/stats.hpp"

namespace facelm::eval {

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

/// Within each class the samples are shuffled (seeded) and dealt round-robin
/// to folds. Throws if any present class has fewer than k samples.
FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

double accuracy(std::span<const int> predictions, std::span<const int> truth);

/// Entry (i, j) counts samples of true class i predicted as j.
using ConfusionMatrix = std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions>;

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truth);

enum class ModelKind { Tree, Forest, BasicNn, OptimizedNn };

std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view text);
inline constexpr std::array<ModelKind, 4> kAllModels = {ModelKind::Tree, ModelKind::Forest,
                                                        ModelKind::BasicNn, ModelKind::OptimizedNn};

struct ModelConfig {
  forest::TreeParams tree;
  forest::ForestParams forest;
  nn::TrainConfig nn;              // seed is overwritten per fold
  bool class_weighting = false;    // inverse-frequency loss weights for NNs
  OutlierPolicy outliers = OutlierPolicy::Winsorize;
};

/// Defaults for one model kind: the basic network trains at a constant
/// learning rate, the optimized network uses the step-decay schedule.
ModelConfig default_config(ModelKind kind);

struct FoldOutput {
  std::vector<int> predictions;
  std::optional<nn::TrainingHistory> history;
};

/// Trains on one fold's training split and predicts its test split.
using FoldTrainer = std::function<FoldOutput(const Matrix& X_train, std::span<const int> y_train,
                                             const Matrix& X_test, std::span<const int> y_test,
                                             std::uint64_t fold_seed)>;

struct CvReport {
  std::string model;
  FeatureMode mode = FeatureMode::Displacement;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  std::vector<ConfusionMatrix> confusions;
  std::vector<nn::TrainingHistory> histories;  // one per fold, neural models only
  nlohmann::json config;
};

/// Fold f trains from seed + f. With `parallel` the folds run on separate
/// threads; the report is identical to the sequential one.
CvReport cross_validate(const FoldTrainer& trainer, std::string model, const Matrix& X,
                        std::span<const int> y, int k, std::uint64_t seed, bool parallel = false);

CvReport cross_validate(ModelKind kind, const ModelConfig& config, const Matrix& X,
                        std::span<const int> y, int k, std::uint64_t seed, bool parallel = false);

struct PreparedSplit {
  Matrix X_train;
  std::vector<int> y_train;
  Matrix X_test;
};

/// Fits the outlier policy on the training split. Winsorize clips both
/// splits to the training fences; drop removes training rows only.
PreparedSplit apply_outlier_policy(const Matrix& X_train, std::span<const int> y_train,
                                   const Matrix& X_test, OutlierPolicy policy);

/// Untrained network for a neural model kind; weights are drawn from a
/// sub-seed of `seed`.
nn::MlpModel make_network(ModelKind kind, std::size_t input_width, std::uint64_t seed);

/// The per-fold trainer used for a model kind, including outlier handling
/// fitted on the training split.
FoldTrainer make_fold_trainer(ModelKind kind, const ModelConfig& config);

nlohmann::json to_json(const CvReport& report);
nlohmann::json to_json(const ModelConfig& config, ModelKind kind);

/// Markdown table of mean accuracies: one row per model, one column per
/// feature mode present in the reports.
std::string comparison_markdown(std::span<const CvReport> reports);

}  // namespace facelm::eval
