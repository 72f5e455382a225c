// SPDX-License-Identifier: Apache-2.0

#include "qnnae/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qnnae/errors.hpp"
#include "qnnae/random.hpp"
#include "qnnae/text.hpp"

namespace qnnae::mlp {
namespace {

double activate(Activation act, double a) {
  switch (act) {
    case Activation::logistic:
      return 1.0 / (1.0 + std::exp(-a));
    case Activation::tanh:
      return std::tanh(a);
    case Activation::relu:
      return a > 0.0 ? a : 0.0;
  }
  return a;
}

// Derivative expressed through the pre-activation `a` and the output `z`.
double activate_derivative(Activation act, double a, double z) {
  switch (act) {
    case Activation::logistic:
      return z * (1.0 - z);
    case Activation::tanh:
      return 1.0 - z * z;
    case Activation::relu:
      return a > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

// log(1 + e^x) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Scratch buffers for one pass over a data set.
struct Workspace {
  explicit Workspace(const MlpArchitecture& arch)
      : pre(arch.hidden_neurons), hidden(arch.hidden_neurons), out(arch.output_dim),
        delta_out(arch.output_dim), delta_hidden(arch.hidden_neurons) {}

  std::vector<double> pre;
  std::vector<double> hidden;
  std::vector<double> out;
  std::vector<double> delta_out;
  std::vector<double> delta_hidden;
};

void forward_pass(const MlpArchitecture& arch, std::span<const double> w,
                  std::span<const double> x, Workspace& ws) {
  const std::size_t in = arch.input_dim;
  for (std::size_t h = 0; h < arch.hidden_neurons; ++h) {
    const double* row = w.data() + h * (in + 1);
    double a = row[in];
    for (std::size_t i = 0; i < in; ++i) a += row[i] * x[i];
    ws.pre[h] = a;
    ws.hidden[h] = activate(arch.activation, a);
  }
  const double* w2 = w.data() + arch.hidden_block_size();
  const std::size_t hid = arch.hidden_neurons;
  for (std::size_t o = 0; o < arch.output_dim; ++o) {
    const double* row = w2 + o * (hid + 1);
    double a = row[hid];
    for (std::size_t h = 0; h < hid; ++h) a += row[h] * ws.hidden[h];
    ws.out[o] = a;
  }
}

// Cross-entropy of one example; fills ws.delta_out with dLoss/dscore.
double example_loss(const MlpArchitecture& arch, int label, Workspace& ws) {
  if (arch.output_dim == 1) {
    const double z = ws.out[0];
    const double y = label == 1 ? 1.0 : 0.0;
    ws.delta_out[0] = logistic(z) - y;
    return softplus(z) - y * z;
  }
  const double peak = *std::max_element(ws.out.begin(), ws.out.end());
  double total = 0.0;
  for (std::size_t o = 0; o < arch.output_dim; ++o) {
    ws.delta_out[o] = std::exp(ws.out[o] - peak);
    total += ws.delta_out[o];
  }
  for (std::size_t o = 0; o < arch.output_dim; ++o) ws.delta_out[o] /= total;
  ws.delta_out[static_cast<std::size_t>(label)] -= 1.0;
  return peak + std::log(total) - ws.out[static_cast<std::size_t>(label)];
}

// Objective on already-scaled features.
double scaled_objective(const MlpArchitecture& arch, std::span<const double> w,
                        const Samples& data, double l2_alpha, std::span<double> gradient,
                        Workspace& ws) {
  const bool want_gradient = !gradient.empty();
  if (want_gradient) std::fill(gradient.begin(), gradient.end(), 0.0);

  const std::size_t in = arch.input_dim;
  const std::size_t hid = arch.hidden_neurons;
  const std::size_t offset2 = arch.hidden_block_size();
  double loss = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.row(n);
    forward_pass(arch, w, x, ws);
    loss += example_loss(arch, data.labels[n], ws);
    if (!want_gradient) continue;

    for (std::size_t h = 0; h < hid; ++h) ws.delta_hidden[h] = 0.0;
    for (std::size_t o = 0; o < arch.output_dim; ++o) {
      const double d = ws.delta_out[o];
      double* g = gradient.data() + offset2 + o * (hid + 1);
      const double* row = w.data() + offset2 + o * (hid + 1);
      for (std::size_t h = 0; h < hid; ++h) {
        g[h] += d * ws.hidden[h];
        ws.delta_hidden[h] += d * row[h];
      }
      g[hid] += d;
    }
    for (std::size_t h = 0; h < hid; ++h) {
      const double d =
          ws.delta_hidden[h] * activate_derivative(arch.activation, ws.pre[h], ws.hidden[h]);
      double* g = gradient.data() + h * (in + 1);
      for (std::size_t i = 0; i < in; ++i) g[i] += d * x[i];
      g[in] += d;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(data.size());
  double squared_norm = 0.0;
  for (double v : w) squared_norm += v * v;
  if (want_gradient) {
    for (std::size_t k = 0; k < w.size(); ++k) gradient[k] = gradient[k] * inv_n + l2_alpha * w[k];
  }
  return loss * inv_n + 0.5 * l2_alpha * squared_norm;
}

void check_samples(const MlpArchitecture& arch, const Samples& data) {
  if (data.size() == 0) throw DataError("training set is empty");
  if (data.num_features != arch.input_dim) {
    throw DataError("samples have " + std::to_string(data.num_features) +
                    " features, network expects " + std::to_string(arch.input_dim));
  }
  if (data.features.size() != data.size() * data.num_features) {
    throw DataError("feature matrix size does not match label count");
  }
  const int classes = static_cast<int>(arch.output_dim == 1 ? 2 : arch.output_dim);
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (data.labels[n] < 0 || data.labels[n] >= classes) {
      throw DataError("label " + std::to_string(data.labels[n]) + " at row " +
                      std::to_string(n) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

// Scaled copy of the feature matrix (or the original when no scaler is set).
std::vector<double> scale_features(const FeatureScaler& scaler, const Samples& data) {
  std::vector<double> scaled(data.features.begin(), data.features.end());
  if (scaler.empty()) return scaled;
  for (std::size_t n = 0; n < data.size(); ++n) {
    std::span<double> row(scaled.data() + n * data.num_features, data.num_features);
    scaler.apply(data.row(n), row);
  }
  return scaled;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::logistic:
      return "logistic";
    case Activation::tanh:
      return "tanh";
    case Activation::relu:
      return "relu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "logistic") return Activation::logistic;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw DataError("unknown activation '" + std::string(name) + "'");
}

void MlpArchitecture::validate() const {
  if (input_dim == 0 || hidden_neurons == 0 || output_dim == 0) {
    throw DataError("network dimensions must be positive (got " + std::to_string(input_dim) +
                    ", " + std::to_string(hidden_neurons) + ", " + std::to_string(output_dim) +
                    ")");
  }
}

std::size_t output_dim_for_classes(std::size_t num_classes) {
  return num_classes <= 2 ? 1 : num_classes;
}

WeightVector::WeightVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DataError("weight " + std::to_string(k) + " is not finite");
    }
  }
}

double WeightVector::norm() const { return std::sqrt(dot(values_, values_)); }

FeatureScaler FeatureScaler::fit(const Samples& data) {
  FeatureScaler scaler;
  const std::size_t d = data.num_features;
  scaler.mean.assign(d, 0.0);
  scaler.scale.assign(d, 1.0);
  if (data.size() == 0) return scaler;
  const double n = static_cast<double>(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    for (std::size_t j = 0; j < d; ++j) scaler.mean[j] += row[j];
  }
  for (auto& m : scaler.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - scaler.mean[j];
      var[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    scaler.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return scaler;
}

void FeatureScaler::apply(std::span<const double> x, std::span<double> out) const {
  if (empty()) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
}

void MlpModel::validate() const {
  architecture.validate();
  if (weights.size() != architecture.weight_count()) {
    throw DataError("model has " + std::to_string(weights.size()) + " weights, architecture needs " +
                    std::to_string(architecture.weight_count()));
  }
  if (!scaler.empty() && (scaler.mean.size() != architecture.input_dim ||
                          scaler.scale.size() != architecture.input_dim)) {
    throw DataError("feature scaler width does not match the input dimension");
  }
}

void TrainConfig::validate() const {
  if (max_iter < 1) throw DataError("max_iter must be at least 1");
  if (!(l2_alpha >= 0.0)) throw DataError("l2_alpha must be non-negative");
  if (!(learning_rate > 0.0)) throw DataError("learning_rate must be positive");
  if (!(tolerance > 0.0)) throw DataError("tolerance must be positive");
}

WeightVector init_weights(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  std::vector<double> w;
  w.reserve(arch.weight_count());
  const double r1 = std::sqrt(6.0 / static_cast<double>(arch.input_dim + arch.hidden_neurons));
  for (std::size_t k = 0; k < arch.hidden_block_size(); ++k) w.push_back(uniform(rng, -r1, r1));
  const double r2 = std::sqrt(6.0 / static_cast<double>(arch.hidden_neurons + arch.output_dim));
  for (std::size_t k = arch.hidden_block_size(); k < arch.weight_count(); ++k) {
    w.push_back(uniform(rng, -r2, r2));
  }
  return WeightVector(std::move(w));
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
  model.validate();
  const auto& arch = model.architecture;
  if (x.size() != arch.input_dim) {
    throw DataError("input has " + std::to_string(x.size()) + " features, network expects " +
                    std::to_string(arch.input_dim));
  }
  std::vector<double> scaled(x.size());
  model.scaler.apply(x, scaled);
  Workspace ws(arch);
  forward_pass(arch, model.weights.values(), scaled, ws);
  return ws.out;
}

int classify_scores(std::span<const double> scores) {
  if (scores.size() == 1) return logistic(scores[0]) > 0.5 ? 1 : 0;
  std::size_t best = 0;
  for (std::size_t o = 1; o < scores.size(); ++o) {
    if (scores[o] > scores[best]) best = o;
  }
  return static_cast<int>(best);
}

int classify(const MlpModel& model, std::span<const double> x) {
  return classify_scores(forward(model, x));
}

std::vector<int> classify_rows(const MlpModel& model, const Samples& data) {
  model.validate();
  if (data.num_features != model.architecture.input_dim) {
    throw DataError("samples have " + std::to_string(data.num_features) +
                    " features, network expects " + std::to_string(model.architecture.input_dim));
  }
  Workspace ws(model.architecture);
  std::vector<double> scaled(data.num_features);
  std::vector<int> out;
  out.reserve(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    model.scaler.apply(data.row(n), scaled);
    forward_pass(model.architecture, model.weights.values(), scaled, ws);
    out.push_back(classify_scores(ws.out));
  }
  return out;
}

double objective(const MlpModel& model, const Samples& data, double l2_alpha,
                 std::span<double> gradient) {
  model.validate();
  check_samples(model.architecture, data);
  if (!gradient.empty() && gradient.size() != model.architecture.weight_count()) {
    throw DataError("gradient buffer has the wrong length");
  }
  const std::vector<double> scaled = scale_features(model.scaler, data);
  const Samples view{scaled, data.labels, data.num_features};
  Workspace ws(model.architecture);
  return scaled_objective(model.architecture, model.weights.values(), view, l2_alpha, gradient,
                          ws);
}

TrainResult train(MlpModel model, const Samples& data, const TrainConfig& config) {
  model.validate();
  config.validate();
  check_samples(model.architecture, data);

  const auto& arch = model.architecture;
  const std::vector<double> scaled = scale_features(model.scaler, data);
  const Samples view{scaled, data.labels, data.num_features};
  Workspace ws(arch);

  std::vector<double> w(model.weights.values().begin(), model.weights.values().end());
  std::vector<double> grad(w.size());
  std::vector<double> trial(w.size());

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  TrainResult result;
  double loss = scaled_objective(arch, w, view, config.l2_alpha, grad, ws);
  if (!std::isfinite(loss)) throw TrainingError("non-finite loss at iteration 0", 0);
  result.loss_history.push_back(loss);
  double grad_sq = dot(grad, grad);
  double step = config.learning_rate;

  std::size_t iter = 0;
  while (iter < config.max_iter && std::sqrt(grad_sq) >= config.tolerance) {
    bool accepted = false;
    double trial_loss = loss;
    for (int b = 0; b < kMaxBacktracks; ++b) {
      for (std::size_t k = 0; k < w.size(); ++k) trial[k] = w[k] - step * grad[k];
      trial_loss = scaled_objective(arch, trial, view, config.l2_alpha, {}, ws);
      if (std::isfinite(trial_loss) && trial_loss <= loss - kArmijo * step * grad_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
    ++iter;
    w.swap(trial);
    loss = scaled_objective(arch, w, view, config.l2_alpha, grad, ws);
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite loss at iteration " + std::to_string(iter), iter);
    }
    result.loss_history.push_back(loss);
    grad_sq = dot(grad, grad);
    step *= 2.0;
  }

  result.iterations = iter;
  result.final_loss = loss;
  result.gradient_norm = std::sqrt(grad_sq);
  model.weights = WeightVector(std::move(w));
  result.model = std::move(model);
  return result;
}

void save_model(std::ostream& out, const MlpModel& model) {
  model.validate();
  const auto& arch = model.architecture;
  out << "mlp " << arch.input_dim << ' ' << arch.hidden_neurons << ' ' << arch.output_dim << ' '
      << to_string(arch.activation) << ' ' << (model.scaler.empty() ? 0 : 1) << '\n';
  for (double v : model.weights.values()) out << text::format_double(v) << '\n';
  for (std::size_t j = 0; j < model.scaler.mean.size(); ++j) {
    out << text::format_double(model.scaler.mean[j]) << ' '
        << text::format_double(model.scaler.scale[j]) << '\n';
  }
}

MlpModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, line)) {
      throw DataError("model file truncated after line " + std::to_string(line_number));
    }
    ++line_number;
    return text::trim(line);
  };
  auto number = [&](std::string_view token) {
    auto v = text::parse_double(token);
    if (!v || !std::isfinite(*v)) {
      throw DataError("line " + std::to_string(line_number) + ": bad number '" +
                      std::string(token) + "'");
    }
    return *v;
  };

  std::istringstream header{std::string(next_line())};
  std::string tag, activation;
  long long in_dim = 0, hidden = 0, out_dim = 0, scaled = 0;
  if (!(header >> tag >> in_dim >> hidden >> out_dim >> activation >> scaled) || tag != "mlp" ||
      in_dim <= 0 || hidden <= 0 || out_dim <= 0 || (scaled != 0 && scaled != 1)) {
    throw DataError("line 1: malformed model header");
  }
  MlpModel model;
  model.architecture = {static_cast<std::size_t>(in_dim), static_cast<std::size_t>(hidden),
                        static_cast<std::size_t>(out_dim), parse_activation(activation)};
  std::vector<double> w;
  w.reserve(model.architecture.weight_count());
  for (std::size_t k = 0; k < model.architecture.weight_count(); ++k) w.push_back(number(next_line()));
  model.weights = WeightVector(std::move(w));
  if (scaled == 1) {
    for (std::size_t j = 0; j < model.architecture.input_dim; ++j) {
      const auto parts = text::split(next_line(), ' ');
      if (parts.size() != 2) {
        throw DataError("line " + std::to_string(line_number) + ": expected 'mean scale'");
      }
      model.scaler.mean.push_back(number(parts[0]));
      model.scaler.scale.push_back(number(parts[1]));
    }
  }
  model.validate();
  return model;
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  save_model(out, model);
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace qnnae::mlp
