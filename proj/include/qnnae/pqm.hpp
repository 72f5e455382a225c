// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "qnnae/qsim.hpp"

// Probabilistic quantum memory: p stored patterns in uniform superposition,
// retrieval by measuring a control qubit whose P(0) is
//   (1/p) * sum_k cos^2(pi * d_H(input, pattern_k) / (2n)).
namespace qnnae::pqm {

/// Fixed-length bit pattern. Text form is one '0'/'1' character per bit,
/// character k being bit k (which maps to qubit k in a register).
class BitString {
 public:
  BitString() = default;
  /// n zero bits.
  explicit BitString(std::size_t n);
  explicit BitString(std::vector<std::uint8_t> bits);

  static BitString parse(std::string_view text);
  static BitString ones(std::size_t n);

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t k) const { return bits_[k] != 0; }
  void set(std::size_t k, bool value) { bits_.at(k) = value ? 1 : 0; }

  std::size_t count_ones() const noexcept;
  /// Little-endian basis index (bit k -> 2^k). Requires size() <= 64.
  std::uint64_t to_index() const;
  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

/// Ordered multiset of equal-length patterns. Immutable once built.
class PatternMemory {
 public:
  explicit PatternMemory(std::vector<BitString> patterns);

  /// One pattern per line; blank lines and text after '#' are ignored.
  static PatternMemory parse(std::istream& in);
  static PatternMemory load(const std::filesystem::path& path);

  std::size_t pattern_length() const noexcept { return patterns_.front().size(); }
  std::size_t size() const noexcept { return patterns_.size(); }
  const std::vector<BitString>& patterns() const noexcept { return patterns_; }

 private:
  std::vector<BitString> patterns_;
};

struct RetrievalOutcome {
  double p0;
  double p1;
};

/// Closed-form control-qubit distribution.
RetrievalOutcome retrieve_analytic(const PatternMemory& memory, const BitString& input);

/// Largest pattern length the circuit route accepts (2n+1 qubits).
inline constexpr std::size_t kMaxCircuitPatternLength = 10;

/// Qubit layout of the retrieval register: input bits 0..n-1, memory bits
/// n..2n-1, control qubit 2n.
struct RetrievalRegisters {
  std::size_t pattern_length;

  qsim::Qubit input(std::size_t k) const { return qsim::Qubit{k}; }
  qsim::Qubit memory(std::size_t k) const { return qsim::Qubit{pattern_length + k}; }
  qsim::Qubit control() const { return qsim::Qubit{2 * pattern_length}; }
  std::size_t num_qubits() const { return 2 * pattern_length + 1; }
};

/// n-qubit state with amplitude sqrt(multiplicity/p) on each stored pattern.
qsim::StateVector prepare_memory_state(const PatternMemory& memory);

/// Input register |i>, memory register as in prepare_memory_state, control |0>.
qsim::StateVector prepare_retrieval_state(const PatternMemory& memory, const BitString& input);

/// Applies the retrieval gate sequence in place; the control qubit must be
/// |0> on entry. Afterwards P(control=0) follows the cos^2 law and the
/// input/memory registers are restored.
void apply_retrieval_circuit(qsim::StateVector& state, const RetrievalRegisters& regs);

/// Control-qubit marginal read off the simulated final state (no sampling).
RetrievalOutcome retrieve_exact_from_circuit(const PatternMemory& memory,
                                             const BitString& input);

struct ShotResult {
  RetrievalOutcome estimate;
  std::size_t count0 = 0;
  std::size_t count1 = 0;
};

/// Runs the retrieval circuit and measures the control qubit `shots` times.
/// Shot s draws from a generator seeded with `seed + s`.
ShotResult retrieve_circuit(const PatternMemory& memory, const BitString& input,
                            std::size_t shots, std::uint64_t seed);

}  // namespace qnnae::pqm
