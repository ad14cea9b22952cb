#include "facelm/nn/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "facelm/dataset.hpp"
#include "facelm/emotion.hpp"
#include "facelm/nn/loss.hpp"

namespace facelm::nn {

void write_history_csv(const TrainingHistory& history, std::ostream& out) {
  out << "epoch,train_loss,train_acc,test_loss,test_acc,lr\n";
  for (std::size_t i = 0; i < history.epochs.size(); ++i) {
    const auto& e = history.epochs[i];
    out << (i + 1) << ',' << format_decimal(e.train_loss) << ','
        << format_decimal(e.train_accuracy) << ','
        << (std::isfinite(e.test_loss) ? format_decimal(e.test_loss) : "nan") << ','
        << (std::isfinite(e.test_accuracy) ? format_decimal(e.test_accuracy) : "nan") << ','
        << format_decimal(e.learning_rate) << '\n';
  }
}

TrainingHistory mean_history(const std::vector<TrainingHistory>& histories) {
  TrainingHistory out;
  if (histories.empty()) return out;
  const std::size_t n = histories.front().size();
  out.epochs.resize(n);
  for (const auto& h : histories) {
    if (h.size() != n) throw Error("mean_history: histories differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      out.epochs[i].train_loss += h.epochs[i].train_loss;
      out.epochs[i].train_accuracy += h.epochs[i].train_accuracy;
      out.epochs[i].test_loss += h.epochs[i].test_loss;
      out.epochs[i].test_accuracy += h.epochs[i].test_accuracy;
      out.epochs[i].learning_rate += h.epochs[i].learning_rate;
    }
  }
  const auto k = static_cast<double>(histories.size());
  for (auto& e : out.epochs) {
    e.train_loss /= k;
    e.train_accuracy /= k;
    e.test_loss /= k;
    e.test_accuracy /= k;
    e.learning_rate /= k;
  }
  return out;
}

EvalMetrics evaluate_model(MlpModel& model, const Matrix& X, std::span<const int> y) {
  if (X.rows() == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const Mode saved = model.mode();
  model.set_mode(Mode::Eval);
  const Matrix logits = model.forward(X);
  model.set_mode(saved);
  const auto loss = softmax_cross_entropy(logits, y);
  const auto pred = argmax_rows(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y[i] ? 1 : 0;
  return {loss.loss, static_cast<double>(correct) / static_cast<double>(pred.size())};
}

std::vector<int> predict_labels(MlpModel& model, const Matrix& X) {
  const Mode saved = model.mode();
  model.set_mode(Mode::Eval);
  const Matrix logits = model.forward(X);
  model.set_mode(saved);
  return argmax_rows(logits);
}

std::vector<double> inverse_frequency_weights(std::span<const int> labels) {
  std::vector<double> counts(kNumEmotions, 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  const double present =
      static_cast<double>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }));
  std::vector<double> w(kNumEmotions, 0.0);
  for (std::size_t c = 0; c < kNumEmotions; ++c) {
    if (counts[c] > 0) w[c] = static_cast<double>(labels.size()) / (present * counts[c]);
  }
  return w;
}

TrainResult train(MlpModel model, const Matrix& X_train, std::span<const int> y_train,
                  const Matrix& X_test, std::span<const int> y_test, const TrainConfig& config) {
  const std::size_t n = X_train.rows();
  if (n == 0 || y_train.size() != n) throw Error("train: empty or misaligned training set");
  if (X_test.rows() != y_test.size()) throw Error("train: misaligned test set");
  if (config.batch_size == 0) throw Error("train: batch size must be positive");
  if (config.batch_size > n) {
    throw Error("train: batch size " + std::to_string(config.batch_size) +
                " exceeds the training set size " + std::to_string(n));
  }
  if (config.epochs < 1) throw Error("train: epochs must be >= 1");

  Rng shuffle_rng(derive_seed(config.seed, 0x73687566));
  AdamState adam;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainingHistory history;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.schedule.at(epoch);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    model.set_mode(Mode::Train);

    std::size_t start = 0;
    while (start < n) {
      std::size_t end = std::min(start + config.batch_size, n);
      if (n - end == 1) end = n;  // never leave a single-row batch behind
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = X_train.select_rows(idx);
      std::vector<int> yb(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) yb[k] = y_train[idx[k]];

      const Matrix logits = model.forward(xb);
      const auto loss = softmax_cross_entropy(logits, yb, config.class_weights);
      model.backward(loss.grad);
      adam.step(model.params(), lr);
      start = end;
    }

    const auto tr = evaluate_model(model, X_train, y_train);
    const auto te = evaluate_model(model, X_test, y_test);
    history.epochs.push_back({tr.loss, tr.accuracy, te.loss, te.accuracy, lr});
  }
  model.set_mode(Mode::Eval);
  return {std::move(model), std::move(history)};
}

}  // namespace facelm::nn
