// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qnnae::mlp {

enum class Activation { logistic, tanh, relu };

std::string_view to_string(Activation activation);
/// Accepts "logistic", "tanh", "relu"; throws DataError otherwise.
Activation parse_activation(std::string_view name);

/// Single-hidden-layer feedforward network shape.
///
/// The flat weight layout is: hidden layer rows (input_dim weights followed by
/// the bias, one row per hidden neuron), then output layer rows (hidden
/// weights followed by the bias, one row per output).
struct MlpArchitecture {
  std::size_t input_dim = 1;
  std::size_t hidden_neurons = 1;
  std::size_t output_dim = 1;
  Activation activation = Activation::logistic;

  void validate() const;
  std::size_t hidden_block_size() const { return (input_dim + 1) * hidden_neurons; }
  std::size_t weight_count() const {
    return hidden_block_size() + (hidden_neurons + 1) * output_dim;
  }

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// Output layer width for a classification problem: one logistic unit for
/// two classes, one score per class otherwise.
std::size_t output_dim_for_classes(std::size_t num_classes);

class WeightVector {
 public:
  WeightVector() = default;
  /// Throws DataError on NaN/inf.
  explicit WeightVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> values_;
};

/// Row-major feature matrix with integer labels; a non-owning view.
struct Samples {
  std::span<const double> features;
  std::span<const int> labels;
  std::size_t num_features = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return features.subspan(i * num_features, num_features);
  }
};

/// Per-feature standardization. Empty means identity.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  /// Zero mean, unit variance on `data`. Constant features get scale 1.
  static FeatureScaler fit(const Samples& data);

  bool empty() const noexcept { return mean.empty(); }
  void apply(std::span<const double> x, std::span<double> out) const;

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;
};

struct MlpModel {
  MlpArchitecture architecture;
  WeightVector weights;
  FeatureScaler scaler;

  /// Checks weight length and scaler width against the architecture.
  void validate() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct TrainConfig {
  std::size_t max_iter = 400;
  double l2_alpha = 1e-5;
  /// Initial step of the backtracking line search.
  double learning_rate = 1.0;
  /// Stop once the gradient's Euclidean norm falls below this.
  double tolerance = 1e-5;

  void validate() const;
};

/// Glorot-uniform initialization, biases included, per layer; deterministic
/// in `seed`.
WeightVector init_weights(const MlpArchitecture& arch, std::uint64_t seed);

/// Raw output-layer pre-activations (no logistic/softmax applied).
std::vector<double> forward(const MlpModel& model, std::span<const double> x);

/// Label from raw scores: argmax with ties to the lowest index, or for a
/// single output, 1 iff logistic(score) > 0.5.
int classify_scores(std::span<const double> scores);
int classify(const MlpModel& model, std::span<const double> x);
/// classify() for every row of `data` (labels are ignored).
std::vector<int> classify_rows(const MlpModel& model, const Samples& data);

/// Mean cross-entropy over `data` plus l2_alpha * |w|^2 / 2, with features
/// passed through the model's scaler. Writes the gradient when `gradient` is
/// non-empty (it must then have weight_count() entries).
double objective(const MlpModel& model, const Samples& data, double l2_alpha,
                 std::span<double> gradient = {});

struct TrainResult {
  MlpModel model;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  /// Objective before the first step and after each accepted step.
  std::vector<double> loss_history;
};

/// Full-batch gradient descent with Armijo backtracking. Throws
/// TrainingError when the objective becomes non-finite.
TrainResult train(MlpModel model, const Samples& data, const TrainConfig& config);

void save_model(std::ostream& out, const MlpModel& model);
MlpModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace qnnae::mlp
