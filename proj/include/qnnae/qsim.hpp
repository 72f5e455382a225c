// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qnnae/random.hpp"

// Dense state-vector simulator. Qubit 0 is the least significant bit of the
// basis index. Gates act in place by strided iteration over the amplitudes.
namespace qnnae::qsim {

using Amplitude = std::complex<double>;

/// Upper bound on register width; 2^24 amplitudes is 256 MiB.
inline constexpr std::size_t kMaxQubits = 24;

struct Qubit {
  std::size_t index;

  constexpr explicit Qubit(std::size_t i) noexcept : index(i) {}
  friend constexpr bool operator==(Qubit, Qubit) = default;
};

class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(std::size_t num_qubits);

  /// Computational basis state |index>.
  static StateVector basis(std::size_t num_qubits, std::uint64_t index);

  /// Takes ownership of `amplitudes`; the length must be 2^num_qubits and the
  /// norm must be 1 within `norm_tolerance`.
  static StateVector from_amplitudes(std::size_t num_qubits,
                                     std::vector<Amplitude> amplitudes,
                                     double norm_tolerance = 1e-10);

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }
  std::span<Amplitude> amplitudes() noexcept { return amplitudes_; }

  const Amplitude& operator[](std::uint64_t i) const { return amplitudes_[i]; }

  /// Sum of squared magnitudes.
  double norm_squared() const noexcept;

  /// Throws std::out_of_range unless q addresses a qubit of this register.
  void check(Qubit q) const;

 private:
  StateVector(std::size_t num_qubits, std::vector<Amplitude> amplitudes);

  std::size_t num_qubits_;
  std::vector<Amplitude> amplitudes_;
};

void apply_hadamard(StateVector& state, Qubit q);

void apply_x(StateVector& state, Qubit q);

void apply_cnot(StateVector& state, Qubit control, Qubit target);

/// |x,y,z> -> |x,y,z xor (x and y)> with x=c1, y=c2, z=target.
void apply_toffoli(StateVector& state, Qubit c1, Qubit c2, Qubit target);

/// Multiplies every amplitude whose qubit `q` equals `on_value` (and whose
/// `control` qubit is 1, if given) by exp(i*angle).
void apply_phase(StateVector& state, Qubit q, double angle, bool on_value = true,
                 std::optional<Qubit> control = std::nullopt);

/// Boolean function of k bits; bit j of the argument is the value of inputs[j].
using BooleanFunction = std::function<bool(std::uint64_t)>;

/// |x, y> -> |x, y xor f(x)>. A permutation of basis states.
void apply_oracle(StateVector& state, const BooleanFunction& f,
                  std::span<const Qubit> inputs, Qubit output);

/// Marginal probability that qubit q reads `value`.
double probability(const StateVector& state, Qubit q, bool value);

/// Projective measurement of a single qubit. Collapses `state` onto the
/// observed branch and renormalizes it.
bool measure_qubit(StateVector& state, Qubit q, Rng& rng);

/// Diagnostic dump: `index,real,imag` per basis state.
void write_amplitudes_csv(std::ostream& out, const StateVector& state);

}  // namespace qnnae::qsim
