// SPDX-License-Identifier: Apache-2.0

#include "qnnae/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "qnnae/errors.hpp"
#include "qnnae/random.hpp"
#include "qnnae/text.hpp"

namespace qnnae::dataio {

Dataset::Dataset(std::string name, std::vector<std::string> feature_names,
                 std::vector<double> features, std::vector<int> labels,
                 std::vector<std::string> class_names)
    : name_(std::move(name)),
      feature_names_(std::move(feature_names)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (feature_names_.empty()) throw DataError("dataset has no feature columns");
  if (features_.size() != labels_.size() * feature_names_.size()) {
    throw DataError("feature matrix has " + std::to_string(features_.size()) +
                    " values, expected " +
                    std::to_string(labels_.size() * feature_names_.size()));
  }
  const int classes = static_cast<int>(class_names_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= classes) {
      throw DataError("row " + std::to_string(i) + ": label " + std::to_string(labels_[i]) +
                      " outside [0, " + std::to_string(classes) + ")");
    }
  }
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (!std::isfinite(features_[k])) {
      throw DataError("row " + std::to_string(k / feature_names_.size()) +
                      ": non-finite feature value");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string name) const {
  std::vector<double> features;
  std::vector<int> labels;
  features.reserve(indices.size() * num_features());
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw DataError("subset index " + std::to_string(i) + " out of range");
    const auto r = row(i);
    features.insert(features.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
  }
  return Dataset(std::move(name), feature_names_, std::move(features), std::move(labels),
                 class_names_);
}

Dataset read_csv(std::istream& in, std::string name) {
  std::string line;
  std::size_t line_number = 0;
  if (!std::getline(in, line)) throw DataError("CSV is empty (no header row)");
  ++line_number;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> feature_names;
  std::size_t label_column = 0;
  std::size_t label_count = 0;
  const auto header = text::split(text::trim(line), ',');
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto field = text::trim(header[c]);
    if (field == "label") {
      label_column = c;
      ++label_count;
    } else {
      feature_names.emplace_back(field);
    }
  }
  if (label_count == 0) throw DataError("line 1: header has no 'label' column");
  if (label_count > 1) throw DataError("line 1: header has more than one 'label' column");
  if (feature_names.empty()) throw DataError("line 1: header has no feature columns");

  std::vector<double> features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::unordered_map<std::string, int> class_ids;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = text::split(trimmed, ',');
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_number) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto field = text::trim(fields[c]);
      if (c == label_column) {
        if (field.empty()) throw DataError("line " + std::to_string(line_number) + ": empty label");
        auto [it, inserted] =
            class_ids.try_emplace(std::string(field), static_cast<int>(class_names.size()));
        if (inserted) class_names.emplace_back(field);
        labels.push_back(it->second);
        continue;
      }
      const auto value = text::parse_double(field);
      if (!value || !std::isfinite(*value)) {
        throw DataError("line " + std::to_string(line_number) + ": non-numeric feature '" +
                        std::string(field) + "' in column " + std::to_string(c + 1));
      }
      features.push_back(*value);
    }
  }
  return Dataset(std::move(name), std::move(feature_names), std::move(features),
                 std::move(labels), std::move(class_names));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  try {
    return read_csv(in, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_csv(std::ostream& out, const Dataset& ds) {
  for (const auto& name : ds.feature_names()) out << name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) out << text::format_double(v) << ',';
    out << ds.class_names()[static_cast<std::size_t>(ds.labels()[i])] << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, ds);
}

Split split_indices(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DataError("train fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.size();
  const auto train_size =
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (train_size == 0 || train_size >= n) {
    throw DataError("split of " + std::to_string(n) + " rows at fraction " +
                    text::format_double(spec.train_fraction) +
                    " leaves the train or validation part empty");
  }

  Rng rng(spec.seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(train_size);
  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
  } else {
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
    for (std::size_t i = 0; i < n; ++i) {
      by_class[static_cast<std::size_t>(ds.labels()[i])].push_back(i);
    }
    std::size_t present = 0;
    for (const auto& members : by_class) present += !members.empty();
    if (train_size < present) {
      throw DataError("stratified split needs at least " + std::to_string(present) +
                      " training rows (one per class), got " + std::to_string(train_size));
    }
    // Largest-remainder allocation of train_size over classes, at least one
    // row per present class.
    std::vector<std::size_t> quota(by_class.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t allocated = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      const double exact = static_cast<double>(train_size) *
                           static_cast<double>(by_class[c].size()) / static_cast<double>(n);
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      remainders.emplace_back(exact - static_cast<double>(quota[c]), c);
      allocated += quota[c];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; allocated < train_size; ++r) {
      ++quota[remainders[r % remainders.size()].second];
      ++allocated;
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].empty() || quota[c] > 0) continue;
      // Borrow a slot from the class holding the most.
      const auto donor = static_cast<std::size_t>(
          std::max_element(quota.begin(), quota.end()) - quota.begin());
      if (quota[donor] <= 1) {
        throw DataError("stratified split cannot place every class in the train part");
      }
      --quota[donor];
      quota[c] = 1;
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (quota[c] >= by_class[c].size() && !by_class[c].empty()) {
        throw DataError("class '" + ds.class_names()[c] +
                        "' has too few rows to appear in both split parts");
      }
      shuffle(std::span<std::size_t>(by_class[c]), rng);
      chosen.insert(chosen.end(), by_class[c].begin(),
                    by_class[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
  }

  std::sort(chosen.begin(), chosen.end());
  Split result;
  result.train_indices = chosen;
  result.validation_indices.reserve(n - chosen.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next < chosen.size() && chosen[next] == i) {
      ++next;
    } else {
      result.validation_indices.push_back(i);
    }
  }
  return result;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  const Split parts = split_indices(ds, spec);
  return {ds.subset(parts.train_indices, ds.name() + "/train"),
          ds.subset(parts.validation_indices, ds.name() + "/validation")};
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::xor_corners:
      return "xor";
    case SyntheticKind::two_gaussians:
      return "two_gaussians";
    case SyntheticKind::rings:
      return "rings";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "xor") return SyntheticKind::xor_corners;
  if (name == "two_gaussians") return SyntheticKind::two_gaussians;
  if (name == "rings") return SyntheticKind::rings;
  throw DataError("unknown synthetic dataset '" + std::string(name) +
                  "' (expected xor, two_gaussians or rings)");
}

Dataset make_synthetic(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed) {
  if (n < 8) throw DataError("synthetic datasets need at least 8 rows");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw DataError("noise must be non-negative");

  Rng rng(seed);
  std::vector<double> features;
  std::vector<int> labels;
  features.reserve(2 * n);
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    double x = 0.0;
    double y = 0.0;
    switch (kind) {
      case SyntheticKind::xor_corners: {
        // Class 0 alternates (+,+)/(-,-), class 1 alternates (+,-)/(-,+).
        const bool flip = (i / 2) % 2 == 1;
        x = flip ? -1.0 : 1.0;
        y = (label == 0) ? x : -x;
        break;
      }
      case SyntheticKind::two_gaussians:
        x = label == 0 ? -1.0 : 1.0;
        break;
      case SyntheticKind::rings: {
        const double radius = label == 0 ? 1.0 : 2.0;
        const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        x = radius * std::cos(angle);
        y = radius * std::sin(angle);
        break;
      }
    }
    x += noise * standard_normal(rng);
    y += noise * standard_normal(rng);
    features.push_back(x);
    features.push_back(y);
    labels.push_back(label);
  }
  std::string name = std::string(to_string(kind)) + "(n=" + std::to_string(n) +
                     ",noise=" + text::format_double(noise) + ",seed=" + std::to_string(seed) + ")";
  return Dataset(std::move(name), {"x", "y"}, std::move(features), std::move(labels), {"0", "1"});
}

}  // namespace qnnae::dataio
