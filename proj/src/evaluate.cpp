#include "facelm/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>

#include <fmt/format.h>

#include "facelm/rng.hpp"

namespace facelm::eval {

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error("k must be at least 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(k)) {
      const std::string name = label >= 0 && label < static_cast<int>(kNumEmotions)
                                   ? std::string(emotion_name(emotion_from_index(label)))
                                   : std::to_string(label);
      throw Error(fmt::format("class '{}' has {} sample(s), fewer than k = {}", name,
                              members.size(), k));
    }
  }

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.fold_of.assign(labels.size(), -1);
  Rng rng(derive_seed(seed, 0x666F6C64));
  std::size_t next = 0;  // round-robin continues across classes
  for (auto& [label, members] : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) fa.fold_of[i] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  }
  return fa;
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.empty() || predictions.size() != truth.size()) {
    throw Error("accuracy needs equally long, non-empty label lists");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) throw Error("confusion matrix: length mismatch");
  ConfusionMatrix cm{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    cm.at(static_cast<std::size_t>(truth[i])).at(static_cast<std::size_t>(predictions[i]))++;
  }
  return cm;
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::BasicNn: return "basic_nn";
    case ModelKind::OptimizedNn: return "optimized_nn";
  }
  return "unknown";
}

ModelKind parse_model(std::string_view text) {
  for (auto k : kAllModels) {
    if (model_name(k) == text) return k;
  }
  throw Error("unknown model '" + std::string(text) + "'");
}

ModelConfig default_config(ModelKind kind) {
  ModelConfig c;
  if (kind == ModelKind::BasicNn) c.nn.schedule.kind = nn::LrSchedule::Kind::Constant;
  return c;
}

CvReport cross_validate(const FoldTrainer& trainer, std::string model, const Matrix& X,
                        std::span<const int> y, int k, std::uint64_t seed, bool parallel) {
  if (X.rows() != y.size()) throw Error("cross_validate: feature/label count mismatch");
  const auto folds = stratified_kfold(y, k, seed);

  auto run_fold = [&](int f) {
    const auto tr = folds.train_indices(f);
    const auto te = folds.test_indices(f);
    const Matrix Xtr = X.select_rows(tr);
    const Matrix Xte = X.select_rows(te);
    std::vector<int> ytr, yte;
    for (auto i : tr) ytr.push_back(y[i]);
    for (auto i : te) yte.push_back(y[i]);
    auto out = trainer(Xtr, ytr, Xte, yte, seed + static_cast<std::uint64_t>(f));
    return std::make_pair(std::move(out), std::move(yte));
  };

  std::vector<std::pair<FoldOutput, std::vector<int>>> results;
  if (parallel) {
    std::vector<std::future<std::pair<FoldOutput, std::vector<int>>>> futures;
    for (int f = 0; f < k; ++f) futures.push_back(std::async(std::launch::async, run_fold, f));
    for (auto& fut : futures) results.push_back(fut.get());
  } else {
    for (int f = 0; f < k; ++f) results.push_back(run_fold(f));
  }

  CvReport report;
  report.model = std::move(model);
  report.k = k;
  report.seed = seed;
  for (auto& [out, truth] : results) {
    report.fold_accuracies.push_back(accuracy(out.predictions, truth));
    report.confusions.push_back(confusion_matrix(out.predictions, truth));
    if (out.history) report.histories.push_back(std::move(*out.history));
  }
  double sum = 0.0;
  for (double a : report.fold_accuracies) sum += a;
  report.mean_accuracy = sum / static_cast<double>(report.fold_accuracies.size());
  return report;
}

PreparedSplit apply_outlier_policy(const Matrix& X_train, std::span<const int> y_train,
                                   const Matrix& X_test, OutlierPolicy policy) {
  PreparedSplit out{X_train, std::vector<int>(y_train.begin(), y_train.end()), X_test};
  if (policy == OutlierPolicy::Winsorize) {
    const auto fences = column_fences(out.X_train);
    out.X_train = winsorize(out.X_train, fences);
    out.X_test = winsorize(out.X_test, fences);
  } else if (policy == OutlierPolicy::Drop) {
    auto res = handle_outliers(out.X_train, out.y_train, OutlierPolicy::Drop);
    out.X_train = std::move(res.X);
    out.y_train = std::move(res.labels);
  }
  return out;
}

nn::MlpModel make_network(ModelKind kind, std::size_t input_width, std::uint64_t seed) {
  const auto model_seed = derive_seed(seed, 0x6D6F64);
  if (kind == ModelKind::BasicNn) {
    nn::BasicDims dims;
    dims.input = input_width;
    return nn::build_basic_model(model_seed, dims);
  }
  if (kind == ModelKind::OptimizedNn) {
    nn::OptimizedDims dims;
    dims.input = input_width;
    return nn::build_optimized_model(model_seed, dims);
  }
  throw Error("make_network: not a neural model");
}

FoldTrainer make_fold_trainer(ModelKind kind, const ModelConfig& config) {
  return [kind, config](const Matrix& X_train, std::span<const int> y_train, const Matrix& X_test,
                        std::span<const int> y_test, std::uint64_t fold_seed) -> FoldOutput {
    auto prepared = apply_outlier_policy(X_train, y_train, X_test, config.outliers);
    const Matrix& Xtr = prepared.X_train;
    const Matrix& Xte = prepared.X_test;
    const std::vector<int>& ytr = prepared.y_train;

    FoldOutput out;
    switch (kind) {
      case ModelKind::Tree: {
        auto params = config.tree;
        params.rng_seed = fold_seed;
        const auto tree = forest::fit_tree(Xtr, ytr, params);
        for (std::size_t i = 0; i < Xte.rows(); ++i) out.predictions.push_back(tree.predict(Xte.row(i)).label);
        break;
      }
      case ModelKind::Forest: {
        auto params = config.forest;
        params.rng_seed = fold_seed;
        const auto rf = forest::fit_forest(Xtr, ytr, params);
        for (std::size_t i = 0; i < Xte.rows(); ++i) out.predictions.push_back(rf.predict(Xte.row(i)));
        break;
      }
      case ModelKind::BasicNn:
      case ModelKind::OptimizedNn: {
        auto model = make_network(kind, Xtr.cols(), fold_seed);
        auto tc = config.nn;
        tc.seed = fold_seed;
        tc.batch_size = std::min(tc.batch_size, Xtr.rows());
        if (config.class_weighting) tc.class_weights = nn::inverse_frequency_weights(ytr);
        auto result = nn::train(std::move(model), Xtr, ytr, Xte, y_test, tc);
        out.predictions = nn::predict_labels(result.model, Xte);
        out.history = std::move(result.history);
        break;
      }
    }
    return out;
  };
}

CvReport cross_validate(ModelKind kind, const ModelConfig& config, const Matrix& X,
                        std::span<const int> y, int k, std::uint64_t seed, bool parallel) {
  auto report =
      cross_validate(make_fold_trainer(kind, config), std::string(model_name(kind)), X, y, k, seed,
                     parallel);
  report.config = to_json(config, kind);
  return report;
}

nlohmann::json to_json(const ModelConfig& c, ModelKind kind) {
  nlohmann::json j = {{"outlier_policy", policy_name(c.outliers)}};
  switch (kind) {
    case ModelKind::Tree:
      j["tree"] = forest::to_json(c.tree);
      break;
    case ModelKind::Forest:
      j["forest"] = {{"n_trees", c.forest.n_trees},
                     {"features_per_split", c.forest.features_per_split},
                     {"bootstrap", c.forest.bootstrap},
                     {"tree", forest::to_json(c.forest.tree)}};
      break;
    case ModelKind::BasicNn:
    case ModelKind::OptimizedNn:
      j["nn"] = {{"epochs", c.nn.epochs},
                 {"batch_size", c.nn.batch_size},
                 {"schedule", c.nn.schedule.kind == nn::LrSchedule::Kind::Constant ? "constant"
                                                                                   : "step"},
                 {"base_lr", c.nn.schedule.base},
                 {"decay_factor", c.nn.schedule.factor},
                 {"decay_every", c.nn.schedule.step_epochs},
                 {"class_weighting", c.class_weighting}};
      break;
  }
  return j;
}

nlohmann::json to_json(const CvReport& r) {
  nlohmann::json confusions = nlohmann::json::array();
  for (const auto& cm : r.confusions) confusions.push_back(cm);
  nlohmann::json histories = nlohmann::json::array();
  for (const auto& h : r.histories) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : h.epochs) {
      epochs.push_back({e.train_loss, e.train_accuracy, e.test_loss, e.test_accuracy,
                        e.learning_rate});
    }
    histories.push_back(epochs);
  }
  nlohmann::json j = {{"model", r.model},
                      {"feature_mode", mode_name(r.mode)},
                      {"k", r.k},
                      {"seed", r.seed},
                      {"fold_accuracies", r.fold_accuracies},
                      {"mean_accuracy", r.mean_accuracy},
                      {"confusion_matrices", confusions},
                      {"labels", nlohmann::json::array()},
                      {"config", r.config}};
  for (auto e : kAllEmotions) j["labels"].push_back(emotion_name(e));
  if (!r.histories.empty()) {
    j["history_columns"] = {"train_loss", "train_acc", "test_loss", "test_acc", "lr"};
    j["histories"] = histories;
  }
  return j;
}

std::string comparison_markdown(std::span<const CvReport> reports) {
  std::vector<FeatureMode> modes;
  std::vector<std::string> models;
  for (const auto& r : reports) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
  }
  std::string out = "| model |";
  for (auto m : modes) out += fmt::format(" {} |", mode_name(m));
  out += "\n|---|";
  for (std::size_t i = 0; i < modes.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& model : models) {
    out += fmt::format("| {} |", model);
    for (auto m : modes) {
      auto it = std::find_if(reports.begin(), reports.end(),
                             [&](const CvReport& r) { return r.model == model && r.mode == m; });
      out += it == reports.end() ? " - |" : fmt::format(" {:.4f} |", it->mean_accuracy);
    }
    out += '\n';
  }
  return out;
}

}  // namespace facelm::eval
