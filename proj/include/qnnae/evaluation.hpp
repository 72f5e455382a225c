// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qnnae/dataio.hpp"
#include "qnnae/mlp.hpp"
#include "qnnae/pqm.hpp"

// Architecture evaluation: train many initializations of one architecture,
// record which validation patterns each trained network gets right, and
// score the architecture with a memory retrieval against the all-ones
// (100% correct) performance string.
namespace qnnae::evaluation {

/// Bit j is 1 iff the network classifies validation pattern j correctly.
struct PerformanceVector {
  pqm::BitString bits;
  std::size_t source_weight_index = 0;

  friend bool operator==(const PerformanceVector&, const PerformanceVector&) = default;
};

PerformanceVector performance_vector(const mlp::MlpModel& model,
                                     const dataio::Dataset& validation,
                                     std::size_t source_weight_index = 0);

/// cos^2(pi * (t_s - correct) / (2 t_s)): one memory entry's contribution.
double score_term(std::size_t correct, std::size_t t_s);

/// Mean of score_term over the list, summed in list order.
double score(std::span<const PerformanceVector> performances, std::size_t t_s);

enum class Mode { sampled, exhaustive };
std::string_view to_string(Mode mode);

/// Quantized weights for exhaustive enumeration. Point i assigns weight k the
/// level given by digit k of i in base |levels| (weight 0 varies fastest).
class WeightGrid {
 public:
  static constexpr std::size_t kDefaultBudget = 531441;  // 3^12

  WeightGrid(std::vector<double> levels, std::size_t weight_count,
             std::size_t budget = kDefaultBudget);

  const std::vector<double>& levels() const noexcept { return levels_; }
  std::size_t weight_count() const noexcept { return weight_count_; }
  std::size_t budget() const noexcept { return budget_; }
  /// |levels|^weight_count; throws CapacityError when it exceeds the budget.
  std::size_t total_points() const;
  mlp::WeightVector point(std::size_t index) const;

 private:
  std::vector<double> levels_;
  std::size_t weight_count_;
  std::size_t budget_;
};

/// Monte-Carlo view of running the quantum procedure `kappa` times: each run
/// reads 0 with probability equal to the score.
struct RepetitionEstimate {
  std::size_t kappa = 0;
  std::size_t zeros = 0;
  double estimate = 0.0;
  double standard_error = 0.0;

  friend bool operator==(const RepetitionEstimate&, const RepetitionEstimate&) = default;
};

RepetitionEstimate estimate_by_repetition(double score, std::size_t kappa, std::uint64_t seed);

struct EvaluationConfig {
  mlp::TrainConfig train;
  double train_fraction = 0.1;
  bool stratified = true;
  std::size_t num_samples = 1000;
  /// Drives the split and every weight initialization.
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  mlp::Activation activation = mlp::Activation::logistic;
  /// Exhaustive mode: train each grid point (true) or use it as final weights.
  bool train_grid_points = false;
  /// Repetitions for the shot estimate; 0 disables it.
  std::size_t kappa = 0;
  /// Keep every performance vector in the report.
  bool keep_performances = false;
};

struct ArchitectureReport {
  mlp::MlpArchitecture architecture;
  double score_p0 = 0.0;
  double mean_accuracy = 0.0;
  /// Validation accuracy of each retained network, in sample order.
  std::vector<double> accuracy_per_sample;
  /// Initializations attempted, including excluded ones.
  std::size_t num_samples = 0;
  /// Initializations whose training diverged; not part of the memory.
  std::size_t excluded = 0;
  Mode mode = Mode::sampled;
  std::uint64_t seed = 0;
  std::size_t validation_size = 0;
  std::vector<PerformanceVector> performances;
  std::optional<RepetitionEstimate> repetition;

  double min_accuracy() const;
  double max_accuracy() const;
  /// Population standard deviation.
  double stddev_accuracy() const;

  friend bool operator==(const ArchitectureReport&, const ArchitectureReport&) = default;
};

/// Split plus standardization fitted on the train part.
struct PreparedData {
  dataio::Dataset train;
  dataio::Dataset validation;
  mlp::FeatureScaler scaler;
};

PreparedData prepare(const dataio::Dataset& dataset, const EvaluationConfig& config);

/// Architecture matching a dataset's feature and class counts.
mlp::MlpArchitecture architecture_for(const dataio::Dataset& dataset, std::size_t hidden,
                                      mlp::Activation activation);

using InitializationSource = std::function<mlp::WeightVector(std::size_t)>;

/// Shared core of both modes: evaluates initializations 0..count-1.
ArchitectureReport evaluate_initializations(const mlp::MlpArchitecture& arch,
                                            const PreparedData& data, std::size_t count,
                                            const InitializationSource& init, bool train,
                                            const EvaluationConfig& config, Mode mode);

/// `config.num_samples` Glorot initializations, each trained.
ArchitectureReport evaluate_sampled(const mlp::MlpArchitecture& arch,
                                    const dataio::Dataset& dataset,
                                    const EvaluationConfig& config);

/// Every point of `grid`, trained only if config.train_grid_points.
ArchitectureReport evaluate_exhaustive(const mlp::MlpArchitecture& arch,
                                       const dataio::Dataset& dataset, const WeightGrid& grid,
                                       const EvaluationConfig& config);

struct SweepParams {
  std::size_t hidden_lo = 1;
  std::size_t hidden_hi = 20;
  Mode mode = Mode::sampled;
  std::vector<double> levels{-1.0, 0.0, 1.0};
  std::size_t grid_budget = WeightGrid::kDefaultBudget;
};

using ReportCallback = std::function<void(const ArchitectureReport&)>;

/// One report per hidden count in [hidden_lo, hidden_hi), ascending. Every
/// architecture sees the same split. `on_report` is called as each finishes.
std::vector<ArchitectureReport> sweep(const dataio::Dataset& dataset, const SweepParams& params,
                                      const EvaluationConfig& config,
                                      const ReportCallback& on_report = {});

}  // namespace qnnae::evaluation
