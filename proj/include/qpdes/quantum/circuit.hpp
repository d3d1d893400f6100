#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qpdes/quantum/ket.hpp"

namespace qpdes::quantum {

enum class Gate : std::uint8_t { kI, kX, kY, kZ, kH, kS, kT, kCnot, kSwap };

std::string_view gate_name(Gate g);
/// Throws UnknownGate.
Gate parse_gate(std::string_view name);
std::size_t gate_arity(Gate g);

struct GateOp {
  Gate gate = Gate::kI;
  std::vector<std::size_t> wires;

  bool operator==(const GateOp&) const = default;
};

struct Circuit {
  std::size_t width = 1;
  std::vector<GateOp> gates;
  /// Measured once each, after all gates; outcome bit i belongs to measured[i].
  std::vector<std::size_t> measured;

  explicit Circuit(std::size_t w = 1) : width(w) {}

  Circuit& add(Gate g, std::vector<std::size_t> wires);
  Circuit& measure(std::vector<std::size_t> wires);

  /// Throws WireOutOfRange or BadDimension on malformed gates.
  void validate() const;
  /// Canonical serialization of width and gate list; measurement excluded.
  std::string fingerprint() const;

  bool operator==(const Circuit&) const = default;
};

/// Column-major dense matrix: element (row i, column j) is data[j * dim + i].
struct Matrix {
  std::size_t dim = 0;
  std::vector<cplx> data;

  cplx at(std::size_t row, std::size_t col) const { return data[col * dim + row]; }
};

/// Applies the circuit's gates in order to each identity column.
Matrix compute_unitary(const Circuit& c);

/// Bounded LRU cache from circuit fingerprint to unitary. Thread-safe.
class UnitaryMemo {
 public:
  static constexpr std::size_t kDefaultCapacity = 1024;

  explicit UnitaryMemo(std::size_t capacity = kDefaultCapacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  std::shared_ptr<const Matrix> get(const Circuit& c);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t hits() const;
  std::uint64_t misses() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const Matrix>>;

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> lru_;
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

/// Unitary through `memo`, or computed fresh when memo is null.
std::shared_ptr<const Matrix> circuit_unitary(const Circuit& c, UnitaryMemo* memo);

namespace circuits {
/// H(0), CNOT(0,1): maps |00> to an EPR pair.
Circuit epr_prep();
/// CNOT(0,1), H(0), measure [0, 1].
Circuit bell_measurement();
/// X^x_bit then Z^z_bit on one wire, no measurement.
Circuit pauli_correction(int x_bit, int z_bit);
/// CNOT(0,1), measure [1]: one side of a purification round on (kept, sacrificed).
Circuit purification_half();
/// Measure wire 0 of a single qubit.
Circuit measure_one();
}  // namespace circuits

}  // namespace qpdes::quantum
