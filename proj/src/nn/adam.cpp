#include "facelm/nn/adam.hpp"

#include <cmath>

#include "facelm/emotion.hpp"

namespace facelm::nn {

void AdamState::step(std::span<const Param> params, double lr) {
  if (!(lr > 0.0)) throw Error("learning rate must be positive");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value->rows(), p.value->cols());
      v_.emplace_back(p.value->rows(), p.value->cols());
    }
  }
  if (m_.size() != params.size()) throw Error("adam: parameter list changed between steps");

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].value->values();
    auto g = params[k].grad->values();
    auto m = m_[k].values();
    auto v = v_[k].values();
    if (theta.size() != m.size() || g.size() != m.size()) throw Error("adam: shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

double LrSchedule::at(int epoch) const {
  if (epoch < 0) throw Error("epoch must be non-negative");
  if (kind == Kind::Constant) return base;
  return base * std::pow(factor, static_cast<double>(epoch / step_epochs));
}

double lr_schedule(int epoch) { return LrSchedule{}.at(epoch); }

}  // namespace facelm::nn
