#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "facelm/nn/layers.hpp"

namespace facelm::nn {

/// Ordered layer stack emitting logits. Copying deep-copies every layer.
class MlpModel {
 public:
  MlpModel(std::string architecture, std::vector<std::unique_ptr<Layer>> layers,
           std::uint64_t seed);
  MlpModel(const MlpModel& other);
  MlpModel& operator=(const MlpModel& other);
  MlpModel(MlpModel&&) noexcept = default;
  MlpModel& operator=(MlpModel&&) noexcept = default;

  Matrix forward(const Matrix& x);
  /// Back-propagates dLoss/dLogits; fills every parameter gradient and
  /// returns dLoss/dInput.
  Matrix backward(const Matrix& grad_logits);

  void set_mode(Mode mode) { mode_ = mode; }
  Mode mode() const { return mode_; }

  std::vector<Param> params();
  std::size_t parameter_count();

  /// Widths of the dense layers in order (hidden widths plus output).
  std::vector<std::size_t> dense_widths() const;

  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  const std::string& architecture() const { return architecture_; }
  std::uint64_t seed() const { return seed_; }

  /// Layers with flattened row-major tensors, batchnorm running stats and
  /// the seed.
  nlohmann::json to_json() const;
  static MlpModel from_json(const nlohmann::json& j);

 private:
  std::string architecture_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::uint64_t seed_ = 0;
  Mode mode_ = Mode::Eval;
  Rng dropout_rng_;
};

struct BasicDims {
  std::size_t input = 136;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 128;
  std::size_t output = 7;
  double dropout = 0.5;
};

struct OptimizedDims {
  std::size_t input = 136;
  std::size_t hidden1 = 512;
  std::size_t hidden2 = 256;
  std::size_t hidden3 = 128;
  std::size_t output = 7;
  double dropout = 0.3;
};

/// dense(136->256), relu, dropout(0.5), dense(256->128), relu, dropout(0.5),
/// dense(128->7).
MlpModel build_basic_model(std::uint64_t seed, const BasicDims& dims = {});

/// dense(136->512), batchnorm, gelu, dropout(0.3),
/// residual[dense(512->256), batchnorm, gelu | skip dense(512->256)],
/// dropout(0.3), dense(256->128), batchnorm, gelu, dropout(0.3),
/// dense(128->7).
MlpModel build_optimized_model(std::uint64_t seed, const OptimizedDims& dims = {});

}  // namespace facelm::nn
