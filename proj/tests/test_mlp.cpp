// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qnnae/errors.hpp"
#include "qnnae/mlp.hpp"
#include "qnnae/random.hpp"

using namespace qnnae;
using namespace qnnae::mlp;

namespace {

struct OwnedSamples {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t num_features = 0;
  Samples view() const { return {features, labels, num_features}; }
};

OwnedSamples random_samples(Rng& rng, std::size_t n, std::size_t d, int classes) {
  OwnedSamples s;
  s.num_features = d;
  for (std::size_t i = 0; i < n * d; ++i) s.features.push_back(standard_normal(rng));
  for (std::size_t i = 0; i < n; ++i) {
    s.labels.push_back(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(classes))));
  }
  return s;
}

OwnedSamples xor_points() {
  return {{-1, -1, -1, 1, 1, -1, 1, 1}, {0, 1, 1, 0}, 2};
}

int activation_code(Activation a) {
  return a == Activation::logistic ? 0 : a == Activation::tanh ? 1 : 2;
}

std::vector<double> as_vector(const WeightVector& w) {
  return {w.values().begin(), w.values().end()};
}

double training_accuracy(const MlpModel& model, const Samples& data) {
  const auto predicted = classify_rows(model, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += predicted[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("architecture") {
    const MlpArchitecture arch{3, 5, 2, Activation::tanh};
    CHECK(arch.weight_count() == (3 + 1) * 5 + (5 + 1) * 2);
    CHECK(arch.hidden_block_size() == 20);
    CHECK_THROWS_AS((MlpArchitecture{0, 1, 1}.validate()), DataError);
    CHECK_THROWS_AS((MlpArchitecture{1, 0, 1}.validate()), DataError);
    CHECK(output_dim_for_classes(2) == 1);
    CHECK(output_dim_for_classes(3) == 3);
    CHECK(parse_activation("relu") == Activation::relu);
    CHECK(to_string(Activation::tanh) == "tanh");
    CHECK_THROWS_AS(parse_activation("sigmoid"), DataError);
    CHECK_THROWS_AS(WeightVector({1.0, std::nan("")}), DataError);
    CHECK_THROWS_AS(WeightVector({INFINITY}), DataError);
  }

  TEST_CASE("init is deterministic and within the Glorot range") {
    const MlpArchitecture arch{4, 6, 3};
    const auto a = init_weights(arch, 123);
    const auto b = init_weights(arch, 123);
    CHECK(a == b);
    CHECK(a.size() == arch.weight_count());
    CHECK_FALSE(a == init_weights(arch, 124));
    const double r1 = std::sqrt(6.0 / 10.0);
    const double r2 = std::sqrt(6.0 / 9.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(std::abs(a[k]) <= (k < arch.hidden_block_size() ? r1 : r2));
    }
  }

  TEST_CASE("init coordinates have mean zero") {
    const MlpArchitecture arch{2, 3, 1};
    const double r1 = std::sqrt(6.0 / 5.0);
    const double r2 = std::sqrt(6.0 / 4.0);
    constexpr int kDraws = 10000;
    for (std::size_t coord : {std::size_t{0}, std::size_t{8}, std::size_t{12}}) {
      double sum = 0.0;
      for (int s = 0; s < kDraws; ++s) sum += init_weights(arch, derive_seed(5, s))[coord];
      const double range = coord < arch.hidden_block_size() ? r1 : r2;
      const double sigma = range / std::sqrt(3.0) / std::sqrt(double{kDraws});
      CHECK(std::abs(sum / kDraws) <= 4.0 * sigma);
    }
  }

  TEST_CASE("forward examples") {
    const MlpArchitecture arch{3, 4, 2};
    const MlpModel zero{arch, WeightVector(std::vector<double>(arch.weight_count(), 0.0)), {}};
    const std::array<double, 3> x{0.3, -2.0, 7.5};
    const auto scores = forward(zero, x);
    CHECK(scores.size() == 2);
    CHECK(scores[0] == scores[1]);

    const MlpArchitecture chain{1, 1, 1, Activation::tanh};
    const MlpModel bias_only{chain, WeightVector({0.0, 0.0, 0.0, 0.625}), {}};
    const std::array<double, 1> one{3.0};
    CHECK(forward(bias_only, one)[0] == 0.625);
    CHECK_THROWS_AS(forward(bias_only, x), DataError);
  }

  TEST_CASE("forward matches an independent implementation") {
    Rng rng(2718);
    for (int trial = 0; trial < 30; ++trial) {
      const Activation act = static_cast<Activation>(trial % 3);
      const MlpArchitecture arch{1 + uniform_index(rng, 5), 1 + uniform_index(rng, 8),
                                 1 + uniform_index(rng, 4), act};
      const MlpModel model{arch, init_weights(arch, rng()), {}};
      std::vector<double> x(arch.input_dim);
      for (auto& v : x) v = 2.0 * standard_normal(rng);
      const auto ours = forward(model, x);
      const auto theirs = oracle::forward(arch.input_dim, arch.hidden_neurons, arch.output_dim,
                                          activation_code(act), as_vector(model.weights), x);
      REQUIRE(ours.size() == theirs.size());
      for (std::size_t o = 0; o < ours.size(); ++o) CHECK(std::abs(ours[o] - theirs[o]) <= 1e-12);
      CHECK(classify_scores(ours) == oracle::predict(theirs));
    }
  }

  TEST_CASE("classification rules") {
    CHECK(classify_scores(std::array{0.9, 0.1}) == 0);
    CHECK(classify_scores(std::array{0.5, 0.5}) == 0);
    CHECK(classify_scores(std::array{0.1, 0.7, 0.7}) == 1);
    CHECK(classify_scores(std::array{0.0}) == 0);  // logistic(0) = 0.5, not above
    CHECK(classify_scores(std::array{1e-9}) == 1);
    CHECK(classify_scores(std::array{-1e-9}) == 0);
  }

  TEST_CASE("last layer is affine in its weights") {
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
      const MlpArchitecture arch{3, 5, 1 + uniform_index(rng, 3), Activation::tanh};
      const auto w = init_weights(arch, rng());
      const double c = uniform(rng, -3.0, 3.0);
      auto scaled = as_vector(w);
      for (std::size_t k = arch.hidden_block_size(); k < scaled.size(); ++k) scaled[k] *= c;
      const MlpModel a{arch, w, {}};
      const MlpModel b{arch, WeightVector(scaled), {}};
      const std::array<double, 3> x{0.5, -1.0, 2.0};
      const auto sa = forward(a, x);
      const auto sb = forward(b, x);
      for (std::size_t o = 0; o < sa.size(); ++o) CHECK(std::abs(sb[o] - c * sa[o]) <= 1e-12);
    }
  }

  TEST_CASE("analytic gradient matches central differences") {
    Rng rng(1618);
    constexpr double kEps = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
      const Activation act = trial % 2 == 0 ? Activation::logistic : Activation::tanh;
      const int classes = trial % 3 == 0 ? 3 : 2;
      const MlpArchitecture arch{1 + uniform_index(rng, 4), 1 + uniform_index(rng, 6),
                                 output_dim_for_classes(classes), act};
      const auto data = random_samples(rng, 12, arch.input_dim, classes);
      const double alpha = trial % 4 == 0 ? 0.0 : 0.01;
      const MlpModel model{arch, init_weights(arch, rng()), {}};
      std::vector<double> grad(arch.weight_count());
      objective(model, data.view(), alpha, grad);
      const auto numeric = oracle::finite_difference_gradient(
          [&](const std::vector<double>& w) {
            return objective(MlpModel{arch, WeightVector(w), {}}, data.view(), alpha);
          },
          as_vector(model.weights), kEps);
      for (std::size_t k = 0; k < grad.size(); ++k) {
        const double denom = std::max({std::abs(grad[k]), std::abs(numeric[k]), 1e-4});
        CHECK(std::abs(grad[k] - numeric[k]) / denom <= 1e-5);
      }
    }
  }

  TEST_CASE("objective adds the L2 term") {
    const auto data = xor_points();
    const MlpArchitecture arch{2, 3, 1};
    const MlpModel model{arch, init_weights(arch, 3), {}};
    const double base = objective(model, data.view(), 0.0);
    const double w2 = model.weights.norm() * model.weights.norm();
    CHECK(objective(model, data.view(), 0.5) == doctest::Approx(base + 0.25 * w2).epsilon(1e-12));
  }

  TEST_CASE("stationary point leaves weights unchanged") {
    const auto data = xor_points();
    const MlpArchitecture arch{2, 3, 1, Activation::tanh};
    const MlpModel model{arch, WeightVector(std::vector<double>(arch.weight_count(), 0.0)), {}};
    const auto result = train(model, data.view(), TrainConfig{});
    CHECK(result.iterations == 0);
    CHECK(result.model.weights == model.weights);
  }

  TEST_CASE("xor is learned from most initializations") {
    const auto data = xor_points();
    const MlpArchitecture arch{2, 4, 1};
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto result = train(MlpModel{arch, init_weights(arch, seed), {}}, data.view(), {});
      solved += training_accuracy(result.model, data.view()) == 1.0;
    }
    CHECK(solved >= 80);
  }

  TEST_CASE("training is deterministic and decreases the loss") {
    Rng rng(8);
    const auto data = random_samples(rng, 40, 3, 3);
    const MlpArchitecture arch{3, 5, 3};
    const MlpModel start{arch, init_weights(arch, 77), {}};
    const auto a = train(start, data.view(), {});
    const auto b = train(start, data.view(), {});
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.loss_history.size() == a.iterations + 1);
    for (std::size_t i = 1; i < a.loss_history.size(); ++i) {
      CHECK(a.loss_history[i] < a.loss_history[i - 1]);
    }
    CHECK(a.iterations <= 400);
  }

  TEST_CASE("strong L2 shrinks the weights") {
    Rng rng(21);
    const auto data = random_samples(rng, 30, 2, 2);
    const MlpArchitecture arch{2, 4, 1};
    const MlpModel start{arch, init_weights(arch, 5), {}};
    TrainConfig free_cfg;
    free_cfg.l2_alpha = 0.0;
    TrainConfig heavy_cfg;
    heavy_cfg.l2_alpha = 1e3;
    const auto loose = train(start, data.view(), free_cfg);
    const auto tight = train(start, data.view(), heavy_cfg);
    CHECK(tight.model.weights.norm() < loose.model.weights.norm());
  }

  TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.max_iter = 0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = {};
    cfg.l2_alpha = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = {};
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
  }

  TEST_CASE("non-finite loss raises TrainingError") {
    const OwnedSamples data{{1e308, 1e308, 1e308, 1e308}, {0, 1}, 2};
    const MlpArchitecture arch{2, 2, 1, Activation::relu};
    // Two hidden units of +inf with opposite output weights give inf - inf.
    const MlpModel model{arch, WeightVector({1, 1, 0, 1, 1, 0, 1, -1, 0}), {}};
    CHECK_THROWS_AS(train(model, data.view(), {}), TrainingError);
  }

  TEST_CASE("label range is checked") {
    const OwnedSamples data{{0.0, 1.0}, {0, 2}, 1};
    const MlpArchitecture arch{1, 2, 1};
    CHECK_THROWS_AS(train(MlpModel{arch, init_weights(arch, 1), {}}, data.view(), {}), DataError);
  }

  TEST_CASE("feature scaler") {
    const OwnedSamples data{{1.0, 5.0, 3.0, 5.0}, {0, 1}, 2};
    const auto scaler = FeatureScaler::fit(data.view());
    CHECK(scaler.mean == std::vector<double>{2.0, 5.0});
    CHECK(scaler.scale == std::vector<double>{1.0, 1.0});
    std::array<double, 2> out{};
    scaler.apply(std::array{4.0, 6.0}, out);
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 1.0);
  }

  TEST_CASE("model files round-trip exactly") {
    const MlpArchitecture arch{3, 2, 4, Activation::relu};
    Rng rng(6);
    const auto data = random_samples(rng, 10, 3, 4);
    const MlpModel model{arch, init_weights(arch, 99), FeatureScaler::fit(data.view())};
    std::stringstream buffer;
    save_model(buffer, model);
    CHECK(load_model(buffer) == model);

    const MlpModel plain{arch, init_weights(arch, 100), {}};
    std::stringstream plain_buffer;
    save_model(plain_buffer, plain);
    CHECK(load_model(plain_buffer) == plain);

    std::istringstream truncated("mlp 1 1 1 logistic 0\n0.5\n");
    CHECK_THROWS_AS(load_model(truncated), DataError);
    std::istringstream garbage("not a model\n");
    CHECK_THROWS_AS(load_model(garbage), DataError);
  }
}
