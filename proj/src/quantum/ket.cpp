#include "qpdes/quantum/ket.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qpdes/core/error.hpp"
#include "qpdes/quantum/kernels.hpp"

namespace qpdes::quantum {

double Ket::norm() const {
  double sum = 0.0;
  for (const cplx& a : amplitudes) sum += std::norm(a);
  return std::sqrt(sum);
}

bool Ket::contains(const QubitKey& k) const { return std::find(keys.begin(), keys.end(), k) != keys.end(); }

std::size_t Ket::wire_of(const QubitKey& k) const {
  const auto it = std::find(keys.begin(), keys.end(), k);
  if (it == keys.end()) fail(ErrorCode::kUnknownKey, "key not in state: " + k.str());
  return static_cast<std::size_t>(it - keys.begin());
}

void Ket::validate() const {
  if (keys.empty() || keys.size() > 30 || amplitudes.size() != (std::size_t{1} << keys.size())) {
    fail(ErrorCode::kBadDimension, "amplitude count " + std::to_string(amplitudes.size()) + " does not match " +
                                       std::to_string(keys.size()) + " keys");
  }
  std::set<QubitKey> seen(keys.begin(), keys.end());
  if (seen.size() != keys.size()) fail(ErrorCode::kDuplicateKey, "duplicate key in state");
  if (std::abs(norm() - 1.0) > kNormTolerance) fail(ErrorCode::kNotNormalized, "state norm differs from 1");
}

Ket Ket::basis(const QubitKey& k, int bit) {
  Ket out;
  out.keys = {k};
  out.amplitudes = bit == 0 ? Amplitudes{1.0, 0.0} : Amplitudes{0.0, 1.0};
  return out;
}

Ket Ket::epr(const QubitKey& a, const QubitKey& b) {
  Ket out;
  out.keys = {a, b};
  out.amplitudes = {kInvSqrt2, 0.0, 0.0, kInvSqrt2};
  return out;
}

Ket Ket::make(Amplitudes amplitudes, std::vector<QubitKey> keys) {
  Ket out{std::move(amplitudes), std::move(keys)};
  out.validate();
  return out;
}

Ket tensor(std::span<const Ket* const> states) {
  if (states.empty()) fail(ErrorCode::kBadDimension, "tensor of no states");
  std::set<QubitKey> seen;
  for (const Ket* s : states) {
    for (const QubitKey& k : s->keys) {
      if (!seen.insert(k).second) fail(ErrorCode::kDuplicateKey, "key appears in two states: " + k.str());
    }
  }
  Ket acc = *states[0];
  for (std::size_t i = 1; i < states.size(); ++i) {
    const Ket& b = *states[i];
    const std::size_t nb = b.amplitudes.size();
    Amplitudes out(acc.amplitudes.size() * nb);
    for (std::size_t r = 0; r < acc.amplitudes.size(); ++r) {
      kernels::cscale(acc.amplitudes[r], b.amplitudes.data(), out.data() + r * nb, nb);
    }
    acc.amplitudes = std::move(out);
    acc.keys.insert(acc.keys.end(), b.keys.begin(), b.keys.end());
  }
  return acc;
}

Ket tensor(const Ket& a, const Ket& b) {
  const Ket* both[] = {&a, &b};
  return tensor(both);
}

Ket permute(const Ket& state, std::span<const QubitKey> order) {
  const std::size_t n = state.keys.size();
  if (order.size() != n) fail(ErrorCode::kNotAPermutation, "key order has wrong length");
  std::vector<std::size_t> source_wire(n);
  std::vector<bool> used(n, false);
  for (std::size_t p = 0; p < n; ++p) {
    const auto it = std::find(state.keys.begin(), state.keys.end(), order[p]);
    if (it == state.keys.end()) fail(ErrorCode::kNotAPermutation, "key not in state: " + order[p].str());
    const auto q = static_cast<std::size_t>(it - state.keys.begin());
    if (used[q]) fail(ErrorCode::kNotAPermutation, "key repeated in order: " + order[p].str());
    used[q] = true;
    source_wire[p] = q;
  }
  bool identity = true;
  for (std::size_t p = 0; p < n; ++p) identity = identity && source_wire[p] == p;
  if (identity) return state;

  Ket out;
  out.keys.assign(order.begin(), order.end());
  out.amplitudes.resize(state.amplitudes.size());
  for (std::size_t o = 0; o < out.amplitudes.size(); ++o) {
    std::size_t in = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t bit = (o >> (n - 1 - p)) & 1U;
      in |= bit << (n - 1 - source_wire[p]);
    }
    out.amplitudes[o] = state.amplitudes[in];
  }
  return out;
}

double fidelity(const Ket& a, const Ket& b) {
  const Ket aligned = permute(b, a.keys);
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) overlap += std::conj(a.amplitudes[i]) * aligned.amplitudes[i];
  return std::norm(overlap);
}

}  // namespace qpdes::quantum
