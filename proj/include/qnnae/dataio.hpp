// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnnae/mlp.hpp"

namespace qnnae::dataio {

/// Labeled feature matrix. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  /// Validates shape, label range and finiteness; throws DataError.
  Dataset(std::string name, std::vector<std::string> feature_names, std::vector<double> features,
          std::vector<int> labels, std::vector<std::string> class_names);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_features() const noexcept { return feature_names_.size(); }
  std::size_t num_classes() const noexcept { return class_names_.size(); }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  /// Original label token for each dense class id.
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<double>& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * num_features(), num_features());
  }
  mlp::Samples samples() const { return {features_, labels_, num_features()}; }

  /// Rows `indices`, in the given order, with the same class mapping.
  Dataset subset(std::span<const std::size_t> indices, std::string name) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string name_;
  std::vector<std::string> feature_names_;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
};

/// Header row names the columns; exactly one is `label`. Labels become dense
/// ids in first-appearance order.
Dataset read_csv(std::istream& in, std::string name);
Dataset load_csv(const std::filesystem::path& path);

/// Feature columns in order, then `label`; shortest round-trip numbers.
void write_csv(std::ostream& out, const Dataset& ds);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

struct SplitSpec {
  double train_fraction = 0.1;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct Split {
  std::vector<std::size_t> train_indices;       // ascending
  std::vector<std::size_t> validation_indices;  // ascending (file order)
};

/// Train size is round(fraction * N). Both parts keep original row order.
Split split_indices(const Dataset& ds, const SplitSpec& spec);
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

enum class SyntheticKind { xor_corners, two_gaussians, rings };

std::string_view to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view name);

/// Two-feature, two-class generators with alternating labels (balanced).
///   xor_corners: clusters at (+-1, +-1), class = sign(x) != sign(y).
///   two_gaussians: clusters at (-1, 0) and (+1, 0).
///   rings: radius 1 (class 0) and radius 2 (class 1).
/// `noise` is the Gaussian standard deviation added to each point.
Dataset make_synthetic(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed);

}  // namespace qnnae::dataio
