#include "facelm/nn/layers.hpp"

#include <cmath>
#include <numbers>

#include "facelm/emotion.hpp"

namespace facelm::nn {

namespace {

const double kGeluC = std::sqrt(2.0 / std::numbers::pi);
constexpr double kGeluA = 0.044715;

std::vector<double> flat(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

Matrix read_matrix(const nlohmann::json& j, std::size_t rows, std::size_t cols) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != rows * cols) throw Error("checkpoint tensor has the wrong size");
  Matrix m(rows, cols);
  std::copy(v.begin(), v.end(), m.values().begin());
  return m;
}

Matrix column_sums(const Matrix& g) {
  Matrix s(1, g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) s(0, j) += g(i, j);
  }
  return s;
}

}  // namespace

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Relu: return "relu";
    case LayerKind::Gelu: return "gelu";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::ResidualBlock: return "residual_block";
  }
  return "unknown";
}

// Dense ---------------------------------------------------------------------

Dense::Dense(std::size_t in, std::size_t out)
    : weights(out, in), bias(1, out), grad_weights(out, in), grad_bias(1, out) {
  if (in == 0 || out == 0) throw Error("dense layer widths must be positive");
}

void Dense::init_uniform(Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(weights.rows() + weights.cols()));
  for (double& w : weights.values()) w = rng.uniform(-limit, limit);
  bias.fill(0.0);
}

Matrix Dense::forward(const Matrix& x, Mode /*mode*/, Rng& /*rng*/) {
  input_ = x;
  Matrix y = matmul_transposed(x, weights);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += bias(0, j);
  }
  return y;
}

Matrix Dense::backward(const Matrix& grad_out) {
  grad_weights = matmul_lhs_transposed(grad_out, input_);
  grad_bias = column_sums(grad_out);
  return matmul(grad_out, weights);
}

void Dense::collect_params(std::vector<Param>& out) {
  out.push_back({&weights, &grad_weights});
  out.push_back({&bias, &grad_bias});
}

nlohmann::json Dense::to_json() const {
  return {{"kind", "dense"},
          {"in", in_width()},
          {"out", out_width()},
          {"weights", flat(weights)},
          {"bias", flat(bias)}};
}

// Activations ---------------------------------------------------------------

Matrix Relu::forward(const Matrix& x, Mode, Rng&) {
  input_ = x;
  Matrix y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix Relu::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  auto in = input_.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < gv.size(); ++i) {
    if (!(in[i] > 0.0)) gv[i] = 0.0;
  }
  return g;
}

nlohmann::json Relu::to_json() const { return {{"kind", "relu"}}; }

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_derivative(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

Matrix Gelu::forward(const Matrix& x, Mode, Rng&) {
  input_ = x;
  Matrix y = x;
  for (double& v : y.values()) v = gelu(v);
  return y;
}

Matrix Gelu::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  auto in = input_.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= gelu_derivative(in[i]);
  return g;
}

nlohmann::json Gelu::to_json() const { return {{"kind", "gelu"}}; }

// BatchNorm -----------------------------------------------------------------

BatchNorm::BatchNorm(std::size_t width)
    : gamma(1, width, 1.0),
      beta(1, width, 0.0),
      running_mean(1, width, 0.0),
      running_var(1, width, 1.0),
      grad_gamma(1, width),
      grad_beta(1, width) {}

Matrix BatchNorm::forward(const Matrix& x, Mode mode, Rng&) {
  const std::size_t B = x.rows();
  const std::size_t d = x.cols();
  last_mode_ = mode;
  xhat_ = Matrix(B, d);
  inv_std_.assign(d, 0.0);
  Matrix y(B, d);

  if (mode == Mode::Train) {
    if (B < 2) throw Error("batch normalization needs a batch of at least 2 in train mode");
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < B; ++i) mean += x(i, j);
      mean /= static_cast<double>(B);
      double var = 0.0;
      for (std::size_t i = 0; i < B; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
      var /= static_cast<double>(B);
      inv_std_[j] = 1.0 / std::sqrt(var + kEps);
      running_mean(0, j) = (1.0 - kMomentum) * running_mean(0, j) + kMomentum * mean;
      const double unbiased = var * static_cast<double>(B) / static_cast<double>(B - 1);
      running_var(0, j) = (1.0 - kMomentum) * running_var(0, j) + kMomentum * unbiased;
      for (std::size_t i = 0; i < B; ++i) xhat_(i, j) = (x(i, j) - mean) * inv_std_[j];
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      inv_std_[j] = 1.0 / std::sqrt(running_var(0, j) + kEps);
      for (std::size_t i = 0; i < B; ++i) {
        xhat_(i, j) = (x(i, j) - running_mean(0, j)) * inv_std_[j];
      }
    }
  }
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < d; ++j) y(i, j) = gamma(0, j) * xhat_(i, j) + beta(0, j);
  }
  return y;
}

Matrix BatchNorm::backward(const Matrix& grad_out) {
  const std::size_t B = grad_out.rows();
  const std::size_t d = grad_out.cols();
  Matrix dx(B, d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      sum_g += grad_out(i, j);
      sum_gx += grad_out(i, j) * xhat_(i, j);
    }
    grad_beta(0, j) = sum_g;
    grad_gamma(0, j) = sum_gx;
    const double scale = gamma(0, j) * inv_std_[j];
    if (last_mode_ == Mode::Train) {
      const double n = static_cast<double>(B);
      for (std::size_t i = 0; i < B; ++i) {
        dx(i, j) = scale / n * (n * grad_out(i, j) - sum_g - xhat_(i, j) * sum_gx);
      }
    } else {
      for (std::size_t i = 0; i < B; ++i) dx(i, j) = scale * grad_out(i, j);
    }
  }
  return dx;
}

void BatchNorm::collect_params(std::vector<Param>& out) {
  out.push_back({&gamma, &grad_gamma});
  out.push_back({&beta, &grad_beta});
}

nlohmann::json BatchNorm::to_json() const {
  return {{"kind", "batchnorm"},
          {"width", width()},
          {"gamma", flat(gamma)},
          {"beta", flat(beta)},
          {"running_mean", flat(running_mean)},
          {"running_var", flat(running_var)}};
}

// Dropout -------------------------------------------------------------------

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error("dropout rate must be in [0, 1)");
}

Matrix Dropout::forward(const Matrix& x, Mode mode, Rng& rng) {
  if (mode == Mode::Eval || rate_ == 0.0) {
    mask_ = Matrix();
    return x;
  }
  mask_ = Matrix(x.rows(), x.cols());
  const double keep_scale = 1.0 / (1.0 - rate_);
  for (double& m : mask_.values()) m = rng.uniform() >= rate_ ? keep_scale : 0.0;
  Matrix y = x;
  auto yv = y.values();
  auto mv = mask_.values();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] *= mv[i];
  return y;
}

Matrix Dropout::backward(const Matrix& grad_out) {
  if (mask_.empty()) return grad_out;
  Matrix g = grad_out;
  auto gv = g.values();
  auto mv = mask_.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= mv[i];
  return g;
}

nlohmann::json Dropout::to_json() const { return {{"kind", "dropout"}, {"rate", rate_}}; }

// ResidualBlock -------------------------------------------------------------

ResidualBlock::ResidualBlock(std::vector<std::unique_ptr<Layer>> main, Dense skip)
    : main_(std::move(main)), skip_(std::move(skip)) {}

ResidualBlock::ResidualBlock(const ResidualBlock& other) : Layer(other), skip_(other.skip_) {
  for (const auto& l : other.main_) main_.push_back(l->clone());
}

Matrix ResidualBlock::forward(const Matrix& x, Mode mode, Rng& rng) {
  Matrix h = x;
  for (auto& l : main_) h = l->forward(h, mode, rng);
  const Matrix s = skip_.forward(x, mode, rng);
  if (h.rows() != s.rows() || h.cols() != s.cols()) {
    throw Error("residual block: main path and skip projection widths differ");
  }
  auto hv = h.values();
  auto sv = s.values();
  for (std::size_t i = 0; i < hv.size(); ++i) hv[i] += sv[i];
  return h;
}

Matrix ResidualBlock::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = main_.rbegin(); it != main_.rend(); ++it) g = (*it)->backward(g);
  const Matrix gs = skip_.backward(grad_out);
  auto gv = g.values();
  auto sv = gs.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += sv[i];
  return g;
}

void ResidualBlock::collect_params(std::vector<Param>& out) {
  for (auto& l : main_) l->collect_params(out);
  skip_.collect_params(out);
}

nlohmann::json ResidualBlock::to_json() const {
  nlohmann::json main = nlohmann::json::array();
  for (const auto& l : main_) main.push_back(l->to_json());
  return {{"kind", "residual_block"}, {"main", main}, {"skip", skip_.to_json()}};
}

// Deserialization -----------------------------------------------------------

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "dense") {
    const auto in = j.at("in").get<std::size_t>();
    const auto out = j.at("out").get<std::size_t>();
    auto d = std::make_unique<Dense>(in, out);
    d->weights = read_matrix(j.at("weights"), out, in);
    d->bias = read_matrix(j.at("bias"), 1, out);
    return d;
  }
  if (kind == "relu") return std::make_unique<Relu>();
  if (kind == "gelu") return std::make_unique<Gelu>();
  if (kind == "dropout") return std::make_unique<Dropout>(j.at("rate").get<double>());
  if (kind == "batchnorm") {
    const auto w = j.at("width").get<std::size_t>();
    auto bn = std::make_unique<BatchNorm>(w);
    bn->gamma = read_matrix(j.at("gamma"), 1, w);
    bn->beta = read_matrix(j.at("beta"), 1, w);
    bn->running_mean = read_matrix(j.at("running_mean"), 1, w);
    bn->running_var = read_matrix(j.at("running_var"), 1, w);
    return bn;
  }
  if (kind == "residual_block") {
    std::vector<std::unique_ptr<Layer>> main;
    for (const auto& lj : j.at("main")) main.push_back(layer_from_json(lj));
    auto skip = layer_from_json(j.at("skip"));
    auto* dense = dynamic_cast<Dense*>(skip.get());
    if (dense == nullptr) throw Error("residual skip projection must be a dense layer");
    return std::make_unique<ResidualBlock>(std::move(main), *dense);
  }
  throw Error("unknown layer kind '" + kind + "'");
}

}  // namespace facelm::nn
