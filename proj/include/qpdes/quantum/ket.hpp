#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qpdes/core/qubit_key.hpp"

namespace qpdes::quantum {

using cplx = std::complex<double>;
using Amplitudes = std::vector<cplx>;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kNormTolerance = 1e-9;

/// Pure state over `keys`. Wire i is keys[i]; wire 0 is the most significant
/// bit of the amplitude index.
struct Ket {
  Amplitudes amplitudes;
  std::vector<QubitKey> keys;

  std::size_t width() const { return keys.size(); }
  double norm() const;
  bool contains(const QubitKey& k) const;
  /// Index of `k` among keys; UnknownKey when absent.
  std::size_t wire_of(const QubitKey& k) const;

  /// Throws BadDimension, DuplicateKey or NotNormalized.
  void validate() const;

  static Ket basis(const QubitKey& k, int bit);
  /// (|00> + |11>)/sqrt(2) over [a, b].
  static Ket epr(const QubitKey& a, const QubitKey& b);
  /// Validating constructor.
  static Ket make(Amplitudes amplitudes, std::vector<QubitKey> keys);

  bool operator==(const Ket&) const = default;
};

/// Kronecker product in list order; keys concatenate in list order.
/// Throws DuplicateKey when key sets overlap.
Ket tensor(std::span<const Ket* const> states);
Ket tensor(const Ket& a, const Ket& b);

/// Reorders wires so the result's keys equal `order`. Throws NotAPermutation.
Ket permute(const Ket& state, std::span<const QubitKey> order);

/// |<a|b>|^2 after aligning b's key order to a's. Keys must match as sets.
double fidelity(const Ket& a, const Ket& b);

}  // namespace qpdes::quantum
