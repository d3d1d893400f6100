#include "qpdes/quantum/apply.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qpdes/core/error.hpp"
#include "qpdes/quantum/kernels.hpp"

namespace qpdes::quantum {

std::size_t Measurement::outcome_index() const {
  std::size_t out = 0;
  for (int b : outcome) out = (out << 1) | static_cast<std::size_t>(b);
  return out;
}

Measurement measure(const Ket& state, std::span<const std::size_t> wires, double sample) {
  const std::size_t n = state.width();
  if (!(sample >= 0.0 && sample < 1.0)) fail(ErrorCode::kPrecondition, "prob_sample outside [0, 1)");
  std::vector<bool> is_measured(n, false);
  for (std::size_t w : wires) {
    if (w >= n) fail(ErrorCode::kWireOutOfRange, "measured wire " + std::to_string(w) + " out of range");
    if (is_measured[w]) fail(ErrorCode::kWireOutOfRange, "wire measured twice");
    is_measured[w] = true;
  }
  const std::size_t k = wires.size();
  auto outcome_of = [&](std::size_t index) {
    std::size_t o = 0;
    for (std::size_t w : wires) o = (o << 1) | ((index >> (n - 1 - w)) & 1U);
    return o;
  };

  std::vector<double> prob(std::size_t{1} << k, 0.0);
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) prob[outcome_of(i)] += std::norm(state.amplitudes[i]);

  std::size_t chosen = prob.size();
  std::size_t last_nonzero = prob.size();
  double cumulative = 0.0;
  for (std::size_t o = 0; o < prob.size(); ++o) {
    if (prob[o] > 0.0) last_nonzero = o;
    cumulative += prob[o];
    if (chosen == prob.size() && prob[o] > 0.0 && sample < cumulative) chosen = o;
  }
  // Rounding can leave the total just under 1; the tail goes to the last
  // reachable outcome.
  if (chosen == prob.size()) chosen = last_nonzero;
  if (chosen == prob.size()) fail(ErrorCode::kZeroNormResidual, "state has zero norm");

  Measurement m;
  for (std::size_t b = 0; b < k; ++b) {
    const int bit = static_cast<int>((chosen >> (k - 1 - b)) & 1U);
    m.outcome.push_back(bit);
    m.collapsed.push_back(Ket::basis(state.keys[wires[b]], bit));
  }
  if (k == n) return m;

  Ket residual;
  for (std::size_t w = 0; w < n; ++w) {
    if (!is_measured[w]) residual.keys.push_back(state.keys[w]);
  }
  residual.amplitudes.reserve(std::size_t{1} << residual.keys.size());
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) {
    if (outcome_of(i) != chosen) continue;
    residual.amplitudes.push_back(state.amplitudes[i]);
    norm_sq += std::norm(state.amplitudes[i]);
  }
  if (norm_sq <= 0.0) fail(ErrorCode::kZeroNormResidual, "selected outcome has zero amplitude");
  const double scale = std::sqrt(norm_sq);
  for (cplx& a : residual.amplitudes) a /= scale;
  m.residual = std::move(residual);
  return m;
}

ApplyResult apply(std::span<const Ket> states, const Circuit& circuit, std::span<const QubitKey> keys,
                  std::optional<double> sample, UnitaryMemo* memo) {
  circuit.validate();
  if (keys.size() != circuit.width) fail(ErrorCode::kBadDimension, "key count does not match circuit width");
  if (std::set<QubitKey>(keys.begin(), keys.end()).size() != keys.size()) {
    fail(ErrorCode::kDuplicateKey, "circuit keys repeat");
  }
  if (!circuit.measured.empty() && !sample.has_value()) fail(ErrorCode::kPrecondition, "measurement needs a sample");

  std::vector<const Ket*> touched;
  for (const QubitKey& k : keys) {
    const Ket* owner = nullptr;
    for (const Ket& s : states) {
      if (s.contains(k)) {
        owner = &s;
        break;
      }
    }
    if (owner == nullptr) fail(ErrorCode::kMissingState, "no state holds key " + k.str());
    if (std::find(touched.begin(), touched.end(), owner) == touched.end()) touched.push_back(owner);
  }
  Ket joint = touched.size() == 1 ? *touched[0] : tensor(touched);

  std::vector<QubitKey> order;
  for (const QubitKey& k : joint.keys) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) order.push_back(k);
  }
  const std::size_t others = order.size();
  order.insert(order.end(), keys.begin(), keys.end());
  joint = permute(joint, order);

  if (!circuit.gates.empty()) {
    const auto u = circuit_unitary(circuit, memo);
    const std::size_t block = u->dim;
    Amplitudes out(joint.amplitudes.size());
    for (std::size_t b = 0; b < joint.amplitudes.size(); b += block) {
      kernels::cmatvec(u->data.data(), joint.amplitudes.data() + b, out.data() + b, block);
    }
    joint.amplitudes = std::move(out);
  }

  ApplyResult result;
  if (circuit.measured.empty()) {
    result.states.push_back(std::move(joint));
    return result;
  }
  std::vector<std::size_t> wires;
  wires.reserve(circuit.measured.size());
  for (std::size_t w : circuit.measured) wires.push_back(others + w);
  Measurement m = measure(joint, wires, *sample);
  result.outcome = std::move(m.outcome);
  for (Ket& c : m.collapsed) result.states.push_back(std::move(c));
  if (m.residual) result.states.push_back(std::move(*m.residual));
  return result;
}

}  // namespace qpdes::quantum
