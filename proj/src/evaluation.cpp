// SPDX-License-Identifier: Apache-2.0

#include "qnnae/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

#include "qnnae/errors.hpp"
#include "qnnae/random.hpp"
#include "qnnae/text.hpp"

namespace qnnae::evaluation {
namespace {

// Result slot for one initialization; filled by whichever worker owns it.
struct SampleOutcome {
  bool excluded = false;
  std::size_t correct = 0;
  pqm::BitString bits;
};

// Runs body(i) for i in [0, count) on `threads` workers. The first exception
// raised by any worker is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

PerformanceVector performance_vector(const mlp::MlpModel& model,
                                     const dataio::Dataset& validation,
                                     std::size_t source_weight_index) {
  if (validation.size() == 0) throw DataError("validation set is empty");
  const std::vector<int> predicted = mlp::classify_rows(model, validation.samples());
  pqm::BitString bits(validation.size());
  for (std::size_t j = 0; j < validation.size(); ++j) {
    bits.set(j, predicted[j] == validation.labels()[j]);
  }
  return {std::move(bits), source_weight_index};
}

double score_term(std::size_t correct, std::size_t t_s) {
  const double unit = std::numbers::pi / (2.0 * static_cast<double>(t_s));
  const double c = std::cos(unit * static_cast<double>(t_s - correct));
  return c * c;
}

double score(std::span<const PerformanceVector> performances, std::size_t t_s) {
  if (performances.empty()) throw DataError("cannot score an empty performance list");
  if (t_s == 0) throw DataError("validation size must be positive");
  double total = 0.0;
  for (const auto& p : performances) {
    if (p.bits.size() != t_s) {
      throw DataError("performance vector of length " + std::to_string(p.bits.size()) +
                      " does not match validation size " + std::to_string(t_s));
    }
    total += score_term(p.bits.count_ones(), t_s);
  }
  return total / static_cast<double>(performances.size());
}

std::string_view to_string(Mode mode) {
  return mode == Mode::sampled ? "sampled" : "exhaustive";
}

WeightGrid::WeightGrid(std::vector<double> levels, std::size_t weight_count,
                       std::size_t budget)
    : levels_(std::move(levels)), weight_count_(weight_count), budget_(budget) {
  if (levels_.empty()) throw DataError("weight grid needs at least one level");
  if (weight_count_ == 0) throw DataError("weight grid needs at least one weight");
  std::set<double> seen;
  for (double level : levels_) {
    if (!std::isfinite(level)) throw DataError("weight grid levels must be finite");
    if (!seen.insert(level).second) {
      throw DataError("weight grid level " + text::format_double(level) + " is repeated");
    }
  }
}

std::size_t WeightGrid::total_points() const {
  const std::size_t base = levels_.size();
  std::size_t total = 1;
  bool over = false;
  for (std::size_t k = 0; k < weight_count_ && !over; ++k) {
    if (total > budget_ / base) {
      over = true;
    } else {
      total *= base;
      over = total > budget_;
    }
  }
  if (over) {
    const double required = std::pow(static_cast<double>(base), static_cast<double>(weight_count_));
    throw CapacityError(std::to_string(base) + "^" + std::to_string(weight_count_) + " = " +
                            text::format_double(required) + " grid points exceed the budget of " +
                            std::to_string(budget_),
                        required > 1e19 ? std::numeric_limits<std::size_t>::max()
                                        : static_cast<std::size_t>(required),
                        budget_);
  }
  return total;
}

mlp::WeightVector WeightGrid::point(std::size_t index) const {
  std::vector<double> w(weight_count_);
  const std::size_t base = levels_.size();
  for (std::size_t k = 0; k < weight_count_; ++k) {
    w[k] = levels_[index % base];
    index /= base;
  }
  return mlp::WeightVector(std::move(w));
}

RepetitionEstimate estimate_by_repetition(double score, std::size_t kappa, std::uint64_t seed) {
  if (kappa == 0) throw DataError("kappa must be at least 1");
  RepetitionEstimate est;
  est.kappa = kappa;
  Rng rng(seed);
  for (std::size_t r = 0; r < kappa; ++r) est.zeros += uniform01(rng) < score;
  est.estimate = static_cast<double>(est.zeros) / static_cast<double>(kappa);
  est.standard_error =
      std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(kappa));
  return est;
}

double ArchitectureReport::min_accuracy() const {
  if (accuracy_per_sample.empty()) return 0.0;
  return *std::min_element(accuracy_per_sample.begin(), accuracy_per_sample.end());
}

double ArchitectureReport::max_accuracy() const {
  if (accuracy_per_sample.empty()) return 0.0;
  return *std::max_element(accuracy_per_sample.begin(), accuracy_per_sample.end());
}

double ArchitectureReport::stddev_accuracy() const {
  if (accuracy_per_sample.empty()) return 0.0;
  double sq = 0.0;
  for (double a : accuracy_per_sample) sq += (a - mean_accuracy) * (a - mean_accuracy);
  return std::sqrt(sq / static_cast<double>(accuracy_per_sample.size()));
}

PreparedData prepare(const dataio::Dataset& dataset, const EvaluationConfig& config) {
  const dataio::SplitSpec spec{config.train_fraction, config.seed, config.stratified};
  auto [train, validation] = dataio::split(dataset, spec);
  auto scaler = mlp::FeatureScaler::fit(train.samples());
  return {std::move(train), std::move(validation), std::move(scaler)};
}

mlp::MlpArchitecture architecture_for(const dataio::Dataset& dataset, std::size_t hidden,
                                      mlp::Activation activation) {
  if (dataset.num_classes() < 2) {
    throw DataError("dataset '" + dataset.name() + "' has fewer than two classes");
  }
  mlp::MlpArchitecture arch{dataset.num_features(), hidden,
                            mlp::output_dim_for_classes(dataset.num_classes()), activation};
  arch.validate();
  return arch;
}

ArchitectureReport evaluate_initializations(const mlp::MlpArchitecture& arch,
                                            const PreparedData& data, std::size_t count,
                                            const InitializationSource& init, bool train,
                                            const EvaluationConfig& config, Mode mode) {
  arch.validate();
  if (count == 0) throw DataError("at least one initialization is required");
  if (data.validation.size() == 0) throw DataError("validation set is empty");
  if (data.train.num_features() != arch.input_dim) {
    throw DataError("dataset has " + std::to_string(data.train.num_features()) +
                    " features, architecture expects " + std::to_string(arch.input_dim));
  }
  if (train) config.train.validate();

  const std::size_t t_s = data.validation.size();
  std::vector<SampleOutcome> outcomes(count);
  parallel_for(count, config.threads, [&](std::size_t i) {
    mlp::MlpModel model{arch, init(i), data.scaler};
    model.validate();
    if (train) {
      try {
        model = mlp::train(std::move(model), data.train.samples(), config.train).model;
      } catch (const TrainingError&) {
        outcomes[i].excluded = true;
        return;
      }
    }
    PerformanceVector pv = performance_vector(model, data.validation, i);
    outcomes[i].correct = pv.bits.count_ones();
    if (config.keep_performances) outcomes[i].bits = std::move(pv.bits);
  });

  ArchitectureReport report;
  report.architecture = arch;
  report.mode = mode;
  report.seed = config.seed;
  report.num_samples = count;
  report.validation_size = t_s;
  double score_sum = 0.0;
  double accuracy_sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    auto& outcome = outcomes[i];
    if (outcome.excluded) {
      ++report.excluded;
      continue;
    }
    const double accuracy = static_cast<double>(outcome.correct) / static_cast<double>(t_s);
    report.accuracy_per_sample.push_back(accuracy);
    accuracy_sum += accuracy;
    score_sum += score_term(outcome.correct, t_s);
    if (config.keep_performances) report.performances.push_back({std::move(outcome.bits), i});
  }
  const std::size_t kept = count - report.excluded;
  if (kept == 0) {
    throw DataError("every one of the " + std::to_string(count) +
                    " trainings diverged; nothing to score");
  }
  report.score_p0 = score_sum / static_cast<double>(kept);
  report.mean_accuracy = accuracy_sum / static_cast<double>(kept);
  if (config.kappa > 0) {
    report.repetition = estimate_by_repetition(report.score_p0, config.kappa,
                                               derive_seed(config.seed, arch.hidden_neurons));
  }
  return report;
}

ArchitectureReport evaluate_sampled(const mlp::MlpArchitecture& arch,
                                    const dataio::Dataset& dataset,
                                    const EvaluationConfig& config) {
  const PreparedData data = prepare(dataset, config);
  return evaluate_initializations(
      arch, data, config.num_samples,
      [&](std::size_t i) { return mlp::init_weights(arch, derive_seed(config.seed, i)); }, true,
      config, Mode::sampled);
}

ArchitectureReport evaluate_exhaustive(const mlp::MlpArchitecture& arch,
                                       const dataio::Dataset& dataset, const WeightGrid& grid,
                                       const EvaluationConfig& config) {
  arch.validate();
  if (grid.weight_count() != arch.weight_count()) {
    throw DataError("grid covers " + std::to_string(grid.weight_count()) +
                    " weights, architecture has " + std::to_string(arch.weight_count()));
  }
  const std::size_t points = grid.total_points();
  const PreparedData data = prepare(dataset, config);
  return evaluate_initializations(
      arch, data, points, [&](std::size_t i) { return grid.point(i); },
      config.train_grid_points, config, Mode::exhaustive);
}

std::vector<ArchitectureReport> sweep(const dataio::Dataset& dataset, const SweepParams& params,
                                      const EvaluationConfig& config,
                                      const ReportCallback& on_report) {
  if (params.hidden_lo < 1 || params.hidden_hi <= params.hidden_lo) {
    throw DataError("hidden range [" + std::to_string(params.hidden_lo) + ", " +
                    std::to_string(params.hidden_hi) + ") is empty or starts below 1");
  }
  // Fail on budget before doing any work.
  if (params.mode == Mode::exhaustive) {
    for (std::size_t h = params.hidden_lo; h < params.hidden_hi; ++h) {
      const auto arch = architecture_for(dataset, h, config.activation);
      WeightGrid(params.levels, arch.weight_count(), params.grid_budget).total_points();
    }
  }

  const PreparedData data = prepare(dataset, config);
  std::vector<ArchitectureReport> reports;
  for (std::size_t h = params.hidden_lo; h < params.hidden_hi; ++h) {
    const auto arch = architecture_for(dataset, h, config.activation);
    if (params.mode == Mode::sampled) {
      reports.push_back(evaluate_initializations(
          arch, data, config.num_samples,
          [&](std::size_t i) { return mlp::init_weights(arch, derive_seed(config.seed, i)); },
          true, config, Mode::sampled));
    } else {
      const WeightGrid grid(params.levels, arch.weight_count(), params.grid_budget);
      reports.push_back(evaluate_initializations(
          arch, data, grid.total_points(), [&](std::size_t i) { return grid.point(i); },
          config.train_grid_points, config, Mode::exhaustive));
    }
    if (on_report) on_report(reports.back());
  }
  return reports;
}

}  // namespace qnnae::evaluation
