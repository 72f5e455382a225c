// SPDX-License-Identifier: Apache-2.0

#include "qnnae/pqm.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "qnnae/errors.hpp"
#include "qnnae/text.hpp"

namespace qnnae::pqm {
namespace {

void require_same_length(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) {
    throw DataError("bit strings differ in length (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
}

void require_circuit_capacity(std::size_t n) {
  if (n > kMaxCircuitPatternLength) {
    throw CapacityError("retrieval circuit needs " + std::to_string(2 * n + 1) +
                            " qubits; patterns longer than " +
                            std::to_string(kMaxCircuitPatternLength) +
                            " bits exceed the simulator budget",
                        n, kMaxCircuitPatternLength);
  }
}

}  // namespace

BitString::BitString(std::size_t n) : bits_(n, 0) {}

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw DataError("bit value must be 0 or 1");
  }
}

BitString BitString::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw DataError("invalid bit character '" + std::string(1, c) + "' in \"" +
                      std::string(text) + "\"");
    }
    bits.push_back(c == '1' ? 1 : 0);
  }
  if (bits.empty()) throw DataError("empty bit string");
  return BitString(std::move(bits));
}

BitString BitString::ones(std::size_t n) {
  return BitString(std::vector<std::uint8_t>(n, 1));
}

std::size_t BitString::count_ones() const noexcept {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

std::uint64_t BitString::to_index() const {
  if (bits_.size() > 64) throw DataError("bit string too long for a basis index");
  std::uint64_t index = 0;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k]) index |= std::uint64_t{1} << k;
  }
  return index;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  require_same_length(a, b);
  std::size_t d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d += a[k] != b[k];
  return d;
}

PatternMemory::PatternMemory(std::vector<BitString> patterns)
    : patterns_(std::move(patterns)) {
  if (patterns_.empty()) throw DataError("pattern memory is empty");
  const std::size_t n = patterns_.front().size();
  if (n == 0) throw DataError("patterns must have at least one bit");
  for (std::size_t k = 1; k < patterns_.size(); ++k) {
    if (patterns_[k].size() != n) {
      throw DataError("pattern " + std::to_string(k) + " has length " +
                      std::to_string(patterns_[k].size()) + ", expected " + std::to_string(n));
    }
  }
}

PatternMemory PatternMemory::parse(std::istream& in) {
  std::vector<BitString> patterns;
  std::string line;
  std::size_t line_number = 0;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = text::trim(view);
    if (view.empty()) continue;
    try {
      BitString bits = BitString::parse(view);
      if (expected == 0) expected = bits.size();
      if (bits.size() != expected) {
        throw DataError("length " + std::to_string(bits.size()) + " differs from " +
                        std::to_string(expected));
      }
      patterns.push_back(std::move(bits));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (patterns.empty()) throw DataError("pattern memory is empty");
  return PatternMemory(std::move(patterns));
}

PatternMemory PatternMemory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pattern file " + path.string());
  try {
    return parse(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

RetrievalOutcome retrieve_analytic(const PatternMemory& memory, const BitString& input) {
  const std::size_t n = memory.pattern_length();
  if (input.size() != n) {
    throw DataError("input has length " + std::to_string(input.size()) +
                    ", memory patterns have length " + std::to_string(n));
  }
  const double unit = std::numbers::pi / (2.0 * static_cast<double>(n));
  double sum_cos = 0.0;
  double sum_sin = 0.0;
  for (const auto& pattern : memory.patterns()) {
    const double angle = unit * static_cast<double>(hamming_distance(input, pattern));
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    sum_cos += c * c;
    sum_sin += s * s;
  }
  const double p = static_cast<double>(memory.size());
  return {sum_cos / p, sum_sin / p};
}

qsim::StateVector prepare_memory_state(const PatternMemory& memory) {
  const std::size_t n = memory.pattern_length();
  if (n > qsim::kMaxQubits) {
    throw CapacityError("memory register of " + std::to_string(n) + " qubits is too large", n,
                        qsim::kMaxQubits);
  }
  std::map<std::uint64_t, std::size_t> multiplicity;
  for (const auto& pattern : memory.patterns()) ++multiplicity[pattern.to_index()];

  std::vector<qsim::Amplitude> amps(std::size_t{1} << n);
  const double p = static_cast<double>(memory.size());
  for (const auto& [index, count] : multiplicity) {
    amps[index] = std::sqrt(static_cast<double>(count) / p);
  }
  return qsim::StateVector::from_amplitudes(n, std::move(amps));
}

qsim::StateVector prepare_retrieval_state(const PatternMemory& memory, const BitString& input) {
  const std::size_t n = memory.pattern_length();
  if (input.size() != n) {
    throw DataError("input has length " + std::to_string(input.size()) +
                    ", memory patterns have length " + std::to_string(n));
  }
  require_circuit_capacity(n);
  const RetrievalRegisters regs{n};
  const qsim::StateVector memory_state = prepare_memory_state(memory);

  // Tensor |input> (x) |memory> (x) |0>: input occupies the low n bits.
  std::vector<qsim::Amplitude> amps(std::size_t{1} << regs.num_qubits());
  const std::uint64_t input_index = input.to_index();
  for (std::uint64_t m = 0; m < memory_state.size(); ++m) {
    if (memory_state[m] != qsim::Amplitude{}) amps[input_index | (m << n)] = memory_state[m];
  }
  return qsim::StateVector::from_amplitudes(regs.num_qubits(), std::move(amps));
}

void apply_retrieval_circuit(qsim::StateVector& state, const RetrievalRegisters& regs) {
  const std::size_t n = regs.pattern_length;
  const double half_step = std::numbers::pi / (2.0 * static_cast<double>(n));

  // memory_k becomes 1 where it agrees with input_k, 0 where it differs.
  for (std::size_t k = 0; k < n; ++k) {
    qsim::apply_cnot(state, regs.input(k), regs.memory(k));
    qsim::apply_x(state, regs.memory(k));
  }
  qsim::apply_hadamard(state, regs.control());
  // Each differing bit contributes e^{+i*half_step} on the control-0 branch and
  // e^{-i*half_step} on the control-1 branch.
  for (std::size_t k = 0; k < n; ++k) {
    qsim::apply_phase(state, regs.memory(k), half_step, false);
    qsim::apply_phase(state, regs.memory(k), -2.0 * half_step, false, regs.control());
  }
  qsim::apply_hadamard(state, regs.control());
  for (std::size_t k = n; k-- > 0;) {
    qsim::apply_x(state, regs.memory(k));
    qsim::apply_cnot(state, regs.input(k), regs.memory(k));
  }
}

RetrievalOutcome retrieve_exact_from_circuit(const PatternMemory& memory,
                                             const BitString& input) {
  qsim::StateVector state = prepare_retrieval_state(memory, input);
  const RetrievalRegisters regs{memory.pattern_length()};
  apply_retrieval_circuit(state, regs);
  const double p0 = qsim::probability(state, regs.control(), false);
  const double p1 = qsim::probability(state, regs.control(), true);
  return {p0, p1};
}

ShotResult retrieve_circuit(const PatternMemory& memory, const BitString& input,
                            std::size_t shots, std::uint64_t seed) {
  if (shots == 0) throw DataError("shots must be at least 1");
  qsim::StateVector final_state = prepare_retrieval_state(memory, input);
  const RetrievalRegisters regs{memory.pattern_length()};
  apply_retrieval_circuit(final_state, regs);

  // The circuit is deterministic, so each shot measures a fresh copy of the
  // same pre-measurement state.
  ShotResult result;
  for (std::size_t s = 0; s < shots; ++s) {
    qsim::StateVector state = final_state;
    Rng rng(seed + s);
    if (qsim::measure_qubit(state, regs.control(), rng)) {
      ++result.count1;
    } else {
      ++result.count0;
    }
  }
  const double total = static_cast<double>(shots);
  result.estimate = {static_cast<double>(result.count0) / total,
                     static_cast<double>(result.count1) / total};
  return result;
}

}  // namespace qnnae::pqm
