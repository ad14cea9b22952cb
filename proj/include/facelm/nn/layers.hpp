#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "facelm/matrix.hpp"
#include "facelm/rng.hpp"
#include "json.hpp"

namespace facelm::nn {

enum class Mode { Train, Eval };

enum class LayerKind { Dense, Relu, Gelu, BatchNorm, Dropout, ResidualBlock };

std::string_view kind_name(LayerKind kind);

/// A trainable tensor and its gradient accumulator.
struct Param {
  Matrix* value = nullptr;
  Matrix* grad = nullptr;
};

/// Layers cache what backward() needs during forward(); backward() must
/// follow the forward() of the same batch. Parameter gradients are
/// overwritten, not accumulated.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual Matrix forward(const Matrix& x, Mode mode, Rng& rng) = 0;
  virtual Matrix backward(const Matrix& grad_out) = 0;
  virtual void collect_params(std::vector<Param>& /*out*/) {}
  /// Output width, or 0 for width-preserving layers.
  virtual std::size_t out_width() const { return 0; }
  virtual nlohmann::json to_json() const = 0;
};

class Dense final : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);

  LayerKind kind() const override { return LayerKind::Dense; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  Matrix forward(const Matrix& x, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_out) override;
  void collect_params(std::vector<Param>& out) override;
  std::size_t out_width() const override { return weights.rows(); }
  std::size_t in_width() const { return weights.cols(); }
  nlohmann::json to_json() const override;

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero. Weights are
  /// drawn row-major.
  void init_uniform(Rng& rng);

  Matrix weights;  // out x in
  Matrix bias;     // 1 x out
  Matrix grad_weights;
  Matrix grad_bias;

 private:
  Matrix input_;
};

class Relu final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::Relu; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
  Matrix forward(const Matrix& x, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_out) override;
  nlohmann::json to_json() const override;

 private:
  Matrix input_;
};

/// 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
double gelu(double x);
double gelu_derivative(double x);

class Gelu final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::Gelu; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Gelu>(*this); }
  Matrix forward(const Matrix& x, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_out) override;
  nlohmann::json to_json() const override;

 private:
  Matrix input_;
};

/// Per-feature batch normalization. Train mode uses biased batch statistics
/// and updates the running estimates with momentum 0.1 (unbiased variance);
/// eval mode uses the running estimates.
class BatchNorm final : public Layer {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  explicit BatchNorm(std::size_t width);

  LayerKind kind() const override { return LayerKind::BatchNorm; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }
  Matrix forward(const Matrix& x, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_out) override;
  void collect_params(std::vector<Param>& out) override;
  nlohmann::json to_json() const override;
  std::size_t width() const { return gamma.cols(); }

  Matrix gamma;  // 1 x d
  Matrix beta;   // 1 x d
  Matrix running_mean;
  Matrix running_var;
  Matrix grad_gamma;
  Matrix grad_beta;

 private:
  Mode last_mode_ = Mode::Eval;
  Matrix xhat_;
  std::vector<double> inv_std_;
};

/// Inverted dropout: kept units are scaled by 1 / (1 - rate) in train mode.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate);

  LayerKind kind() const override { return LayerKind::Dropout; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }
  Matrix forward(const Matrix& x, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_out) override;
  nlohmann::json to_json() const override;
  double rate() const { return rate_; }

 private:
  double rate_;
  Matrix mask_;  // empty when the last pass was the identity
};

/// main(x) + skip(x), where skip is a learned dense projection so that the
/// block can change width.
class ResidualBlock final : public Layer {
 public:
  ResidualBlock(std::vector<std::unique_ptr<Layer>> main, Dense skip);
  ResidualBlock(const ResidualBlock& other);
  ResidualBlock& operator=(const ResidualBlock&) = delete;

  LayerKind kind() const override { return LayerKind::ResidualBlock; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ResidualBlock>(*this); }
  Matrix forward(const Matrix& x, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_out) override;
  void collect_params(std::vector<Param>& out) override;
  std::size_t out_width() const override { return skip_.out_width(); }
  nlohmann::json to_json() const override;

  std::vector<std::unique_ptr<Layer>>& main_path() { return main_; }
  const std::vector<std::unique_ptr<Layer>>& main_path() const { return main_; }
  Dense& skip() { return skip_; }
  const Dense& skip() const { return skip_; }

 private:
  std::vector<std::unique_ptr<Layer>> main_;
  Dense skip_;
};

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& j);

}  // namespace facelm::nn
