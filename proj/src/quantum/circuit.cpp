#include "qpdes/quantum/circuit.hpp"

#include <array>

#include "qpdes/core/error.hpp"

namespace qpdes::quantum {

namespace {

constexpr std::array<std::string_view, 9> kGateNames = {"I", "X", "Y", "Z", "H", "S", "T", "CNOT", "SWAP"};

// Wire w is bit (width - 1 - w) of the amplitude index.
std::size_t mask_of(std::size_t width, std::size_t wire) { return std::size_t{1} << (width - 1 - wire); }

void apply_gate(const GateOp& op, std::size_t width, std::vector<cplx>& v) {
  const std::size_t n = v.size();
  if (op.gate == Gate::kI) return;
  if (op.gate == Gate::kCnot || op.gate == Gate::kSwap) {
    const std::size_t m0 = mask_of(width, op.wires[0]);
    const std::size_t m1 = mask_of(width, op.wires[1]);
    for (std::size_t i = 0; i < n; ++i) {
      if (op.gate == Gate::kCnot) {
        if ((i & m0) != 0 && (i & m1) == 0) std::swap(v[i], v[i | m1]);
      } else if ((i & m0) != 0 && (i & m1) == 0) {
        std::swap(v[i], v[(i & ~m0) | m1]);
      }
    }
    return;
  }
  const std::size_t m = mask_of(width, op.wires[0]);
  const cplx t_phase(kInvSqrt2, kInvSqrt2);
  for (std::size_t i0 = 0; i0 < n; ++i0) {
    if ((i0 & m) != 0) continue;
    const std::size_t i1 = i0 | m;
    const cplx a = v[i0];
    const cplx b = v[i1];
    switch (op.gate) {
      case Gate::kX: v[i0] = b; v[i1] = a; break;
      case Gate::kY: v[i0] = cplx(b.imag(), -b.real()); v[i1] = cplx(-a.imag(), a.real()); break;
      case Gate::kZ: v[i1] = -b; break;
      case Gate::kH: v[i0] = (a + b) * kInvSqrt2; v[i1] = (a - b) * kInvSqrt2; break;
      case Gate::kS: v[i1] = cplx(-b.imag(), b.real()); break;
      case Gate::kT: v[i1] = b * t_phase; break;
      default: break;
    }
  }
}

}  // namespace

std::string_view gate_name(Gate g) { return kGateNames[static_cast<std::size_t>(g)]; }

Gate parse_gate(std::string_view name) {
  for (std::size_t i = 0; i < kGateNames.size(); ++i) {
    if (kGateNames[i] == name) return static_cast<Gate>(i);
  }
  fail(ErrorCode::kUnknownGate, "unknown gate: " + std::string(name));
}

std::size_t gate_arity(Gate g) { return g == Gate::kCnot || g == Gate::kSwap ? 2 : 1; }

Circuit& Circuit::add(Gate g, std::vector<std::size_t> wires) {
  gates.push_back(GateOp{g, std::move(wires)});
  return *this;
}

Circuit& Circuit::measure(std::vector<std::size_t> wires) {
  measured = std::move(wires);
  return *this;
}

void Circuit::validate() const {
  if (width == 0 || width > 16) fail(ErrorCode::kBadDimension, "circuit width out of range");
  for (const GateOp& op : gates) {
    if (op.wires.size() != gate_arity(op.gate)) {
      fail(ErrorCode::kBadDimension, std::string(gate_name(op.gate)) + " takes " + std::to_string(gate_arity(op.gate)) +
                                         " wires");
    }
    for (std::size_t w : op.wires) {
      if (w >= width) fail(ErrorCode::kWireOutOfRange, "gate wire " + std::to_string(w) + " out of range");
    }
    if (op.wires.size() == 2 && op.wires[0] == op.wires[1]) {
      fail(ErrorCode::kWireOutOfRange, "two-qubit gate on a single wire");
    }
  }
  std::vector<bool> seen(width, false);
  for (std::size_t w : measured) {
    if (w >= width) fail(ErrorCode::kWireOutOfRange, "measured wire " + std::to_string(w) + " out of range");
    if (seen[w]) fail(ErrorCode::kWireOutOfRange, "wire measured twice");
    seen[w] = true;
  }
}

std::string Circuit::fingerprint() const {
  std::string out = std::to_string(width);
  for (const GateOp& op : gates) {
    out += '|';
    out += gate_name(op.gate);
    for (std::size_t i = 0; i < op.wires.size(); ++i) {
      out += i == 0 ? ':' : ',';
      out += std::to_string(op.wires[i]);
    }
  }
  return out;
}

Matrix compute_unitary(const Circuit& c) {
  c.validate();
  Matrix m;
  m.dim = std::size_t{1} << c.width;
  m.data.assign(m.dim * m.dim, cplx(0.0, 0.0));
  std::vector<cplx> column(m.dim);
  for (std::size_t j = 0; j < m.dim; ++j) {
    std::fill(column.begin(), column.end(), cplx(0.0, 0.0));
    column[j] = 1.0;
    for (const GateOp& op : c.gates) apply_gate(op, c.width, column);
    std::copy(column.begin(), column.end(), m.data.begin() + static_cast<std::ptrdiff_t>(j * m.dim));
  }
  return m;
}

std::shared_ptr<const Matrix> UnitaryMemo::get(const Circuit& c) {
  std::string fp = c.fingerprint();
  {
    std::lock_guard lock(mu_);
    const auto it = index_.find(fp);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++hits_;
      return it->second->second;
    }
    ++misses_;
  }
  auto fresh = std::make_shared<const Matrix>(compute_unitary(c));
  std::lock_guard lock(mu_);
  const auto it = index_.find(fp);
  if (it != index_.end()) return it->second->second;
  lru_.emplace_front(fp, fresh);
  index_.emplace(std::move(fp), lru_.begin());
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return fresh;
}

std::size_t UnitaryMemo::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

std::uint64_t UnitaryMemo::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t UnitaryMemo::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::shared_ptr<const Matrix> circuit_unitary(const Circuit& c, UnitaryMemo* memo) {
  if (memo != nullptr) return memo->get(c);
  return std::make_shared<const Matrix>(compute_unitary(c));
}

namespace circuits {

Circuit epr_prep() {
  Circuit c(2);
  c.add(Gate::kH, {0}).add(Gate::kCnot, {0, 1});
  return c;
}

Circuit bell_measurement() {
  Circuit c(2);
  c.add(Gate::kCnot, {0, 1}).add(Gate::kH, {0}).measure({0, 1});
  return c;
}

Circuit pauli_correction(int x_bit, int z_bit) {
  Circuit c(1);
  if (x_bit != 0) c.add(Gate::kX, {0});
  if (z_bit != 0) c.add(Gate::kZ, {0});
  return c;
}

Circuit purification_half() {
  Circuit c(2);
  c.add(Gate::kCnot, {0, 1}).measure({1});
  return c;
}

Circuit measure_one() {
  Circuit c(1);
  c.measure({0});
  return c;
}

}  // namespace circuits

}  // namespace qpdes::quantum
