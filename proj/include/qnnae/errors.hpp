// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnnae {

/// Malformed or inconsistent input: bad files, dimension mismatches, bad
/// arguments. The CLI maps it to exit code 1.
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request that exceeds a configured resource limit (simulator qubits,
/// weight-grid budget). The CLI maps it to exit code 2.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, std::size_t required, std::size_t limit)
      : std::runtime_error(what), required_(required), limit_(limit) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t required_;
  std::size_t limit_;
};

/// Training diverged (non-finite loss).
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace qnnae
