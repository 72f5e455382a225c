// SPDX-License-Identifier: Apache-2.0

#include "qnnae/qsim.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qnnae::qsim {
namespace {

constexpr std::uint64_t bit(std::size_t q) { return std::uint64_t{1} << q; }

// Calls fn(i) for every basis index whose bit q is 0; fn pairs i with i|bit(q).
template <typename Fn>
void for_each_pair(std::size_t size, std::size_t q, Fn&& fn) {
  const std::uint64_t stride = bit(q);
  for (std::uint64_t base = 0; base < size; base += 2 * stride) {
    for (std::uint64_t i = base; i < base + stride; ++i) fn(i);
  }
}

void require_distinct(std::initializer_list<Qubit> qubits) {
  for (auto a = qubits.begin(); a != qubits.end(); ++a) {
    for (auto b = a + 1; b != qubits.end(); ++b) {
      if (*a == *b) {
        throw std::invalid_argument("qsim: gate operands must be distinct qubits (qubit " +
                                    std::to_string(a->index) + " repeated)");
      }
    }
  }
}

}  // namespace

StateVector::StateVector(std::size_t num_qubits)
    : StateVector(num_qubits, {}) {
  amplitudes_.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

StateVector::StateVector(std::size_t num_qubits, std::vector<Amplitude> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
  if (num_qubits == 0 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("qsim: register width must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(num_qubits));
  }
}

StateVector StateVector::basis(std::size_t num_qubits, std::uint64_t index) {
  StateVector state(num_qubits);
  if (index >= state.size()) {
    throw std::out_of_range("qsim: basis index " + std::to_string(index) +
                            " outside a " + std::to_string(num_qubits) + "-qubit register");
  }
  state.amplitudes_[0] = 0.0;
  state.amplitudes_[index] = 1.0;
  return state;
}

StateVector StateVector::from_amplitudes(std::size_t num_qubits,
                                         std::vector<Amplitude> amplitudes,
                                         double norm_tolerance) {
  if (num_qubits == 0 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("qsim: register width out of range");
  }
  if (amplitudes.size() != (std::size_t{1} << num_qubits)) {
    throw std::invalid_argument("qsim: expected " +
                                std::to_string(std::size_t{1} << num_qubits) +
                                " amplitudes, got " + std::to_string(amplitudes.size()));
  }
  StateVector state(num_qubits, std::move(amplitudes));
  if (std::abs(state.norm_squared() - 1.0) > norm_tolerance) {
    throw std::invalid_argument("qsim: amplitudes are not normalized");
  }
  return state;
}

double StateVector::norm_squared() const noexcept {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

void StateVector::check(Qubit q) const {
  if (q.index >= num_qubits_) {
    throw std::out_of_range("qsim: qubit " + std::to_string(q.index) + " outside a " +
                            std::to_string(num_qubits_) + "-qubit register");
  }
}

void apply_hadamard(StateVector& state, Qubit q) {
  state.check(q);
  constexpr double s = std::numbers::sqrt2 / 2.0;
  auto amps = state.amplitudes();
  for_each_pair(amps.size(), q.index, [&](std::uint64_t i) {
    const Amplitude a0 = amps[i];
    const Amplitude a1 = amps[i | bit(q.index)];
    amps[i] = s * (a0 + a1);
    amps[i | bit(q.index)] = s * (a0 - a1);
  });
}

void apply_x(StateVector& state, Qubit q) {
  state.check(q);
  auto amps = state.amplitudes();
  for_each_pair(amps.size(), q.index,
                [&](std::uint64_t i) { std::swap(amps[i], amps[i | bit(q.index)]); });
}

void apply_cnot(StateVector& state, Qubit control, Qubit target) {
  state.check(control);
  state.check(target);
  require_distinct({control, target});
  auto amps = state.amplitudes();
  for_each_pair(amps.size(), target.index, [&](std::uint64_t i) {
    if (i & bit(control.index)) std::swap(amps[i], amps[i | bit(target.index)]);
  });
}

void apply_toffoli(StateVector& state, Qubit c1, Qubit c2, Qubit target) {
  state.check(c1);
  state.check(c2);
  state.check(target);
  require_distinct({c1, c2, target});
  const std::uint64_t controls = bit(c1.index) | bit(c2.index);
  auto amps = state.amplitudes();
  for_each_pair(amps.size(), target.index, [&](std::uint64_t i) {
    if ((i & controls) == controls) std::swap(amps[i], amps[i | bit(target.index)]);
  });
}

void apply_phase(StateVector& state, Qubit q, double angle, bool on_value,
                 std::optional<Qubit> control) {
  state.check(q);
  std::uint64_t mask = bit(q.index);
  std::uint64_t match = on_value ? bit(q.index) : 0;
  if (control) {
    state.check(*control);
    require_distinct({q, *control});
    mask |= bit(control->index);
    match |= bit(control->index);
  }
  const Amplitude factor = std::polar(1.0, angle);
  auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if ((i & mask) == match) amps[i] *= factor;
  }
}

void apply_oracle(StateVector& state, const BooleanFunction& f,
                  std::span<const Qubit> inputs, Qubit output) {
  state.check(output);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    state.check(inputs[j]);
    if (inputs[j] == output) {
      throw std::invalid_argument("qsim: oracle output qubit is also an input");
    }
    for (std::size_t k = j + 1; k < inputs.size(); ++k) {
      if (inputs[j] == inputs[k]) throw std::invalid_argument("qsim: repeated oracle input");
    }
  }
  auto amps = state.amplitudes();
  for_each_pair(amps.size(), output.index, [&](std::uint64_t i) {
    std::uint64_t x = 0;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      if (i & bit(inputs[j].index)) x |= bit(j);
    }
    if (f(x)) std::swap(amps[i], amps[i | bit(output.index)]);
  });
}

double probability(const StateVector& state, Qubit q, bool value) {
  state.check(q);
  const auto amps = state.amplitudes();
  double p = 0.0;
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (static_cast<bool>(i & bit(q.index)) == value) p += std::norm(amps[i]);
  }
  return p;
}

bool measure_qubit(StateVector& state, Qubit q, Rng& rng) {
  const double p1 = probability(state, q, true);
  const bool outcome = uniform01(rng) < p1;
  const double kept = outcome ? p1 : 1.0 - p1;
  const double scale = 1.0 / std::sqrt(kept);
  auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (static_cast<bool>(i & bit(q.index)) == outcome) {
      amps[i] *= scale;
    } else {
      amps[i] = 0.0;
    }
  }
  return outcome;
}

void write_amplitudes_csv(std::ostream& out, const StateVector& state) {
  out << "index,real,imag\n";
  char buf[64];
  const auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    out << i << ',';
    auto r = std::to_chars(buf, buf + sizeof buf, amps[i].real());
    out.write(buf, r.ptr - buf);
    out << ',';
    r = std::to_chars(buf, buf + sizeof buf, amps[i].imag());
    out.write(buf, r.ptr - buf);
    out << '\n';
  }
}

}  // namespace qnnae::qsim
