#include "facelm/nn/model.hpp"

#include "facelm/emotion.hpp"

namespace facelm::nn {

namespace {

void init_dense_layers(std::vector<std::unique_ptr<Layer>>& layers, Rng& rng) {
  for (auto& l : layers) {
    if (auto* d = dynamic_cast<Dense*>(l.get())) {
      d->init_uniform(rng);
    } else if (auto* r = dynamic_cast<ResidualBlock*>(l.get())) {
      init_dense_layers(r->main_path(), rng);
      r->skip().init_uniform(rng);
    }
  }
}

void dense_widths_of(const std::vector<std::unique_ptr<Layer>>& layers,
                     std::vector<std::size_t>& out) {
  for (const auto& l : layers) {
    if (l->kind() == LayerKind::Dense) {
      out.push_back(l->out_width());
    } else if (const auto* r = dynamic_cast<const ResidualBlock*>(l.get())) {
      dense_widths_of(r->main_path(), out);
    }
  }
}

std::uint64_t dropout_seed(std::uint64_t seed) { return derive_seed(seed, 0x64726F70); }

}  // namespace

MlpModel::MlpModel(std::string architecture, std::vector<std::unique_ptr<Layer>> layers,
                   std::uint64_t seed)
    : architecture_(std::move(architecture)),
      layers_(std::move(layers)),
      seed_(seed),
      dropout_rng_(dropout_seed(seed)) {}

MlpModel::MlpModel(const MlpModel& other)
    : architecture_(other.architecture_),
      seed_(other.seed_),
      mode_(other.mode_),
      dropout_rng_(other.dropout_rng_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

MlpModel& MlpModel::operator=(const MlpModel& other) {
  if (this != &other) {
    MlpModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Matrix MlpModel::forward(const Matrix& x) {
  Matrix h = x;
  for (auto& l : layers_) h = l->forward(h, mode_, dropout_rng_);
  return h;
}

Matrix MlpModel::backward(const Matrix& grad_logits) {
  Matrix g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Param> MlpModel::params() {
  std::vector<Param> out;
  for (auto& l : layers_) l->collect_params(out);
  return out;
}

std::size_t MlpModel::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.value->size();
  return n;
}

std::vector<std::size_t> MlpModel::dense_widths() const {
  std::vector<std::size_t> out;
  dense_widths_of(layers_, out);
  return out;
}

nlohmann::json MlpModel::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) layers.push_back(l->to_json());
  return {{"architecture", architecture_}, {"seed", seed_}, {"layers", layers}};
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
  std::vector<std::unique_ptr<Layer>> layers;
  for (const auto& lj : j.at("layers")) layers.push_back(layer_from_json(lj));
  return MlpModel(j.at("architecture").get<std::string>(), std::move(layers),
                  j.at("seed").get<std::uint64_t>());
}

MlpModel build_basic_model(std::uint64_t seed, const BasicDims& dims) {
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(std::make_unique<Dense>(dims.input, dims.hidden1));
  layers.push_back(std::make_unique<Relu>());
  layers.push_back(std::make_unique<Dropout>(dims.dropout));
  layers.push_back(std::make_unique<Dense>(dims.hidden1, dims.hidden2));
  layers.push_back(std::make_unique<Relu>());
  layers.push_back(std::make_unique<Dropout>(dims.dropout));
  layers.push_back(std::make_unique<Dense>(dims.hidden2, dims.output));
  Rng rng(seed);
  init_dense_layers(layers, rng);
  return MlpModel("basic", std::move(layers), seed);
}

MlpModel build_optimized_model(std::uint64_t seed, const OptimizedDims& dims) {
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(std::make_unique<Dense>(dims.input, dims.hidden1));
  layers.push_back(std::make_unique<BatchNorm>(dims.hidden1));
  layers.push_back(std::make_unique<Gelu>());
  layers.push_back(std::make_unique<Dropout>(dims.dropout));

  std::vector<std::unique_ptr<Layer>> main;
  main.push_back(std::make_unique<Dense>(dims.hidden1, dims.hidden2));
  main.push_back(std::make_unique<BatchNorm>(dims.hidden2));
  main.push_back(std::make_unique<Gelu>());
  layers.push_back(
      std::make_unique<ResidualBlock>(std::move(main), Dense(dims.hidden1, dims.hidden2)));
  layers.push_back(std::make_unique<Dropout>(dims.dropout));

  layers.push_back(std::make_unique<Dense>(dims.hidden2, dims.hidden3));
  layers.push_back(std::make_unique<BatchNorm>(dims.hidden3));
  layers.push_back(std::make_unique<Gelu>());
  layers.push_back(std::make_unique<Dropout>(dims.dropout));
  layers.push_back(std::make_unique<Dense>(dims.hidden3, dims.output));
  Rng rng(seed);
  init_dense_layers(layers, rng);
  return MlpModel("optimized", std::move(layers), seed);
}

}  // namespace facelm::nn
