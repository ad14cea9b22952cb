#pragma once

#include <span>

#include "facelm/matrix.hpp"

namespace facelm::nn {

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // dLoss/dLogits, same shape as the logits
};

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Mean cross-entropy of softmax(logits) against integer labels. The
/// gradient is (softmax - one_hot) / B. With `class_weights` non-empty the
/// loss is sum(w_i * ce_i) / sum(w_i) and the gradient is weighted to match.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels,
                                 std::span<const double> class_weights = {});

/// Predicted label per row (argmax, lowest index on ties).
std::vector<int> argmax_rows(const Matrix& logits);

}  // namespace facelm::nn
