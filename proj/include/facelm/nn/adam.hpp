#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facelm/nn/layers.hpp"

namespace facelm::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double learning_rate = 0.001;
};

/// Per-parameter first/second moments plus the shared step counter.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  /// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2;
  /// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
  /// Moments are allocated lazily on the first call; later calls must pass
  /// parameters of the same shapes in the same order.
  void step(std::span<const Param> params, double lr);

  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t t_ = 0;
};

struct LrSchedule {
  enum class Kind { Constant, StepDecay };
  Kind kind = Kind::StepDecay;
  double base = 0.001;
  double factor = 0.5;
  int step_epochs = 15;

  /// base * factor^floor(epoch / step_epochs) for step decay.
  double at(int epoch) const;
};

/// The default step-decay schedule: 0.001 * 0.5^floor(epoch / 15).
double lr_schedule(int epoch);

}  // namespace facelm::nn
