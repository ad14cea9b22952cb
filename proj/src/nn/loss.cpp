#include "facelm/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "facelm/emotion.hpp"

namespace facelm::nn {

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      p(i, j) = std::exp(row[j] - mx);
      sum += p(i, j);
    }
    for (std::size_t j = 0; j < row.size(); ++j) p(i, j) /= sum;
  }
  return p;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels,
                                 std::span<const double> class_weights) {
  const std::size_t B = logits.rows();
  const std::size_t C = logits.cols();
  if (B == 0 || labels.size() != B) throw Error("softmax_cross_entropy: label count mismatch");

  std::vector<double> w(B, 1.0);
  if (!class_weights.empty()) {
    for (std::size_t i = 0; i < B; ++i) w[i] = class_weights[static_cast<std::size_t>(labels[i])];
  }
  double wsum = 0.0;
  for (double v : w) wsum += v;

  LossResult res;
  res.grad = Matrix(B, C);
  double total = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    const auto label = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || label >= C) throw Error("softmax_cross_entropy: label out of range");
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    total += w[i] * (log_z - row[label]);
    for (std::size_t j = 0; j < C; ++j) {
      const double p = std::exp(row[j] - log_z);
      res.grad(i, j) = w[i] * (p - (j == label ? 1.0 : 0.0)) / wsum;
    }
  }
  res.loss = total / wsum;
  return res;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace facelm::nn
