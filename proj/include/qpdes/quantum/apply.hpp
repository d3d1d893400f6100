#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpdes/quantum/circuit.hpp"

namespace qpdes::quantum {

struct Measurement {
  /// One bit per measured wire, in the order the wires were listed.
  std::vector<int> outcome;
  /// Single-qubit basis kets for the measured keys, same order.
  std::vector<Ket> collapsed;
  /// Renormalized state of the unmeasured keys; empty when all were measured.
  std::optional<Ket> residual;

  /// Outcome as an integer with the first listed wire as the most significant bit.
  std::size_t outcome_index() const;
};

/// Born-rule measurement driven by a caller-supplied sample in [0, 1).
/// Outcome bitstrings are ordered lexicographically (first listed wire most
/// significant); the first whose cumulative probability exceeds `sample` wins.
/// Throws WireOutOfRange, Precondition (sample outside [0, 1)) or ZeroNormResidual.
Measurement measure(const Ket& state, std::span<const std::size_t> wires, double sample);

struct ApplyResult {
  /// States that now hold every involved key.
  std::vector<Ket> states;
  std::vector<int> outcome;
};

/// Runs `circuit` with wire i bound to keys[i]. `states` must hold every key;
/// all keys of the touched states are carried along. The touched states are
/// tensored in order of first appearance and the circuit keys moved to the
/// least significant positions, so the unitary acts on contiguous blocks.
/// `sample` is required when the circuit measures.
ApplyResult apply(std::span<const Ket> states, const Circuit& circuit, std::span<const QubitKey> keys,
                  std::optional<double> sample, UnitaryMemo* memo);

}  // namespace qpdes::quantum
