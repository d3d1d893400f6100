#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "oracle.hpp"
#include "qpdes/core/error.hpp"
#include "qpdes/quantum/apply.hpp"

using namespace qpdes;
using namespace qpdes::quantum;

namespace {

std::vector<QubitKey> make_keys(std::size_t n, std::uint32_t entity = 1) {
  KeyFactory f(11, entity);
  std::vector<QubitKey> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(f.next());
  return out;
}

Ket from_oracle(const oracle::Vec& v, std::vector<QubitKey> keys) { return Ket::make(v, std::move(keys)); }

void expect_close(const Amplitudes& got, const oracle::Vec& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_LT(std::abs(got[i] - want[i]), tol) << "index " << i;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kPrecondition;
}

oracle::Mat oracle_gate(const GateOp& op, std::size_t width) {
  switch (op.gate) {
    case Gate::kI: return oracle::lift(oracle::I(), op.wires[0], width);
    case Gate::kX: return oracle::lift(oracle::X(), op.wires[0], width);
    case Gate::kY: return oracle::lift(oracle::Y(), op.wires[0], width);
    case Gate::kZ: return oracle::lift(oracle::Z(), op.wires[0], width);
    case Gate::kH: return oracle::lift(oracle::H(), op.wires[0], width);
    case Gate::kS: return oracle::lift(oracle::S(), op.wires[0], width);
    case Gate::kT: return oracle::lift(oracle::T(), op.wires[0], width);
    case Gate::kCnot: return oracle::cnot(op.wires[0], op.wires[1], width);
    case Gate::kSwap: return oracle::swap(op.wires[0], op.wires[1], width);
  }
  return oracle::Mat(0);
}

Circuit random_circuit(std::mt19937_64& gen, std::size_t width, std::size_t gates) {
  Circuit c(width);
  for (std::size_t g = 0; g < gates; ++g) {
    const auto gate = static_cast<Gate>(gen() % 9);
    if (gate_arity(gate) == 2) {
      if (width < 2) continue;
      const std::size_t a = gen() % width;
      std::size_t b = gen() % (width - 1);
      if (b >= a) ++b;
      c.add(gate, {a, b});
    } else {
      c.add(gate, {gen() % width});
    }
  }
  return c;
}

/// Sample in [0, 1) that selects lexicographic outcome `o` of 2^k equally likely outcomes.
double sample_for(std::size_t o, std::size_t k) { return (static_cast<double>(o) + 0.5) / static_cast<double>(1U << k); }

}  // namespace

TEST(Tensor, BasisStates) {
  const auto k = make_keys(2);
  const Ket t = tensor(Ket::basis(k[0], 0), Ket::basis(k[1], 1));
  expect_close(t.amplitudes, {0, 1, 0, 0});
  EXPECT_EQ(t.keys, k);
}

TEST(Tensor, EprWithZero) {
  const auto k = make_keys(3);
  const Ket t = tensor(Ket::epr(k[0], k[1]), Ket::basis(k[2], 0));
  const double r = 1 / std::sqrt(2.0);
  expect_close(t.amplitudes, {r, 0, 0, 0, 0, 0, r, 0});
}

TEST(Tensor, MatchesNaiveKroneckerAndPreservesNorm) {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t wa = 1 + gen() % 3, wb = 1 + gen() % 3;
    const auto keys = make_keys(wa + wb);
    const auto va = oracle::random_state(gen, wa), vb = oracle::random_state(gen, wb);
    const Ket a = from_oracle(va, {keys.begin(), keys.begin() + wa});
    const Ket b = from_oracle(vb, {keys.begin() + wa, keys.end()});
    const Ket t = tensor(a, b);
    expect_close(t.amplitudes, oracle::kron(va, vb));
    EXPECT_NEAR(t.norm(), 1.0, 1e-12);
  }
}

TEST(Tensor, RejectsSharedKeys) {
  const auto k = make_keys(2);
  EXPECT_EQ(code_of([&] { tensor(Ket::epr(k[0], k[1]), Ket::basis(k[1], 0)); }), ErrorCode::kDuplicateKey);
}

TEST(KetValidation, RejectsMalformedStates) {
  const auto k = make_keys(2);
  EXPECT_EQ(code_of([&] { Ket::make({1, 0, 0}, k); }), ErrorCode::kBadDimension);
  EXPECT_EQ(code_of([&] { Ket::make({1, 1, 0, 0}, k); }), ErrorCode::kNotNormalized);
  EXPECT_EQ(code_of([&] { Ket::make({1, 0, 0, 0}, {k[0], k[0]}); }), ErrorCode::kDuplicateKey);
}

TEST(Permute, SwapsBasisBits) {
  const auto k = make_keys(2);
  const Ket s = tensor(Ket::basis(k[0], 0), Ket::basis(k[1], 1));
  const std::vector<QubitKey> order = {k[1], k[0]};
  const Ket p = permute(s, order);
  expect_close(p.amplitudes, {0, 0, 1, 0});
  EXPECT_EQ(p.keys, order);
}

TEST(Permute, EprIsSymmetric) {
  const auto k = make_keys(2);
  const Ket e = Ket::epr(k[0], k[1]);
  const std::vector<QubitKey> order = {k[1], k[0]};
  EXPECT_EQ(permute(e, order).amplitudes, e.amplitudes);
}

TEST(Permute, InverseRestoresOriginal) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto k = make_keys(3);
    const Ket s = from_oracle(oracle::random_state(gen, 3), k);
    std::vector<QubitKey> order = k;
    std::shuffle(order.begin(), order.end(), gen);
    const Ket back = permute(permute(s, order), k);
    EXPECT_EQ(back, s);
    // Amplitude of basis string under the moved labels agrees with the oracle lift.
    const Ket p = permute(s, order);
    for (std::size_t o = 0; o < 8; ++o) {
      std::size_t in = 0;
      for (std::size_t pos = 0; pos < 3; ++pos) {
        const std::size_t src = s.wire_of(order[pos]);
        in |= ((o >> (2 - pos)) & 1U) << (2 - src);
      }
      EXPECT_EQ(p.amplitudes[o], s.amplitudes[in]);
    }
  }
}

TEST(Permute, RejectsNonPermutations) {
  const auto k = make_keys(3);
  const Ket e = Ket::epr(k[0], k[1]);
  const std::vector<QubitKey> bad1 = {k[0], k[2]};
  const std::vector<QubitKey> bad2 = {k[0], k[0]};
  const std::vector<QubitKey> bad3 = {k[0]};
  EXPECT_EQ(code_of([&] { permute(e, bad1); }), ErrorCode::kNotAPermutation);
  EXPECT_EQ(code_of([&] { permute(e, bad2); }), ErrorCode::kNotAPermutation);
  EXPECT_EQ(code_of([&] { permute(e, bad3); }), ErrorCode::kNotAPermutation);
}

TEST(CircuitUnitary, Hadamard) {
  Circuit c(1);
  c.add(Gate::kH, {0});
  const Matrix m = compute_unitary(c);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(m.at(0, 0) - r), 0, 1e-15);
  EXPECT_NEAR(std::abs(m.at(0, 1) - r), 0, 1e-15);
  EXPECT_NEAR(std::abs(m.at(1, 0) - r), 0, 1e-15);
  EXPECT_NEAR(std::abs(m.at(1, 1) + r), 0, 1e-15);
}

TEST(CircuitUnitary, PreparesEprFromZeros) {
  const auto k = make_keys(2);
  const Ket zeros = tensor(Ket::basis(k[0], 0), Ket::basis(k[1], 0));
  const auto r = apply(std::span(&zeros, 1), circuits::epr_prep(), k, std::nullopt, nullptr);
  ASSERT_EQ(r.states.size(), 1u);
  expect_close(r.states[0].amplitudes, {1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)});
}

TEST(CircuitUnitary, MatchesLiftedGateProductAndIsUnitary) {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t width = 1 + gen() % 4;
    const Circuit c = random_circuit(gen, width, 1 + gen() % 6);
    const Matrix m = compute_unitary(c);
    oracle::Mat ref = oracle::Mat::identity(m.dim);
    for (const GateOp& op : c.gates) ref = oracle::mul(oracle_gate(op, width), ref);
    for (std::size_t i = 0; i < m.dim; ++i) {
      for (std::size_t j = 0; j < m.dim; ++j) {
        EXPECT_LT(std::abs(m.at(i, j) - ref(i, j)), 1e-12) << c.fingerprint();
        cplx udu = 0;
        for (std::size_t r = 0; r < m.dim; ++r) udu += std::conj(m.at(r, i)) * m.at(r, j);
        EXPECT_LT(std::abs(udu - (i == j ? 1.0 : 0.0)), 1e-9);
      }
    }
  }
}

TEST(CircuitUnitary, RejectsBadGates) {
  EXPECT_EQ(code_of([] { parse_gate("TOFFOLI"); }), ErrorCode::kUnknownGate);
  EXPECT_EQ(parse_gate("CNOT"), Gate::kCnot);
  Circuit c(2);
  c.add(Gate::kH, {2});
  EXPECT_EQ(code_of([&] { compute_unitary(c); }), ErrorCode::kWireOutOfRange);
}

TEST(Memo, CachedMatrixEqualsFreshMatrixExactly) {
  UnitaryMemo memo(4);
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 40; ++rep) {
    const Circuit c = random_circuit(gen, 3, 4);
    const auto cached = memo.get(c);
    const auto again = memo.get(c);
    EXPECT_EQ(cached.get(), again.get());
    EXPECT_EQ(cached->data, compute_unitary(c).data);
  }
  EXPECT_LE(memo.size(), 4u);
  EXPECT_GE(memo.hits(), 40u);
}

TEST(Memo, EvictsLeastRecentlyUsed) {
  UnitaryMemo memo(2);
  Circuit a(1), b(1), c(1);
  a.add(Gate::kH, {0});
  b.add(Gate::kX, {0});
  c.add(Gate::kZ, {0});
  memo.get(a);
  memo.get(b);
  memo.get(a);  // b is now least recent
  memo.get(c);  // evicts b
  const auto misses = memo.misses();
  memo.get(a);
  EXPECT_EQ(memo.misses(), misses);
  memo.get(b);
  EXPECT_EQ(memo.misses(), misses + 1);
}

TEST(Measure, EprLowSampleGivesZero) {
  const auto k = make_keys(2);
  const std::size_t wire = 0;
  const Measurement m = measure(Ket::epr(k[0], k[1]), std::span(&wire, 1), 0.3);
  EXPECT_EQ(m.outcome, std::vector<int>{0});
  ASSERT_TRUE(m.residual.has_value());
  EXPECT_EQ(m.residual->keys, std::vector<QubitKey>{k[1]});
  expect_close(m.residual->amplitudes, {1, 0});
  EXPECT_EQ(m.collapsed[0], Ket::basis(k[0], 0));
}

TEST(Measure, BasisOneIsDeterministic) {
  const auto k = make_keys(1);
  const std::size_t wire = 0;
  for (double s : {0.0, 0.25, 0.5, 0.999999}) {
    const Measurement m = measure(Ket::basis(k[0], 1), std::span(&wire, 1), s);
    EXPECT_EQ(m.outcome, std::vector<int>{1});
    EXPECT_FALSE(m.residual.has_value());
  }
}

TEST(Measure, CumulativeInversionIsLexicographic) {
  // Amplitudes sqrt([0.1, 0.2, 0.3, 0.4]); wire 1 listed first, so its bit is the MSB.
  const auto k = make_keys(2);
  const Ket s = Ket::make({std::sqrt(0.1), std::sqrt(0.2), std::sqrt(0.3), std::sqrt(0.4)}, k);
  const std::vector<std::size_t> wires = {1, 0};
  // Outcome (w1,w0) probabilities: 00 -> 0.1, 01 -> 0.3, 10 -> 0.2, 11 -> 0.4.
  EXPECT_EQ(measure(s, wires, 0.05).outcome_index(), 0u);
  EXPECT_EQ(measure(s, wires, 0.35).outcome_index(), 1u);
  EXPECT_EQ(measure(s, wires, 0.45).outcome_index(), 2u);
  EXPECT_EQ(measure(s, wires, 0.65).outcome_index(), 3u);
}

TEST(Measure, BornStatisticsOnEpr) {
  const auto k = make_keys(2);
  const Ket e = Ket::epr(k[0], k[1]);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  int zeros = 0;
  constexpr int kTrials = 10000;
  const std::size_t wire = 0;
  for (int i = 0; i < kTrials; ++i) zeros += measure(e, std::span(&wire, 1), ud(gen)).outcome[0] == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / kTrials, 0.5, 0.02);
}

TEST(Measure, RejectsBadArguments) {
  const auto k = make_keys(2);
  const Ket e = Ket::epr(k[0], k[1]);
  const std::size_t bad = 2, ok = 0;
  EXPECT_EQ(code_of([&] { measure(e, std::span(&bad, 1), 0.1); }), ErrorCode::kWireOutOfRange);
  EXPECT_EQ(code_of([&] { measure(e, std::span(&ok, 1), 1.0); }), ErrorCode::kPrecondition);
}

TEST(Apply, EmptyCircuitLeavesStateUnchanged) {
  const auto k = make_keys(1);
  std::mt19937_64 gen(9);
  const Ket s = from_oracle(oracle::random_state(gen, 1), k);
  const auto r = apply(std::span(&s, 1), Circuit(1), k, std::nullopt, nullptr);
  EXPECT_EQ(r.states.at(0), s);
}

TEST(Apply, TeleportationRecoversInputForEveryOutcome) {
  std::mt19937_64 gen(10);
  for (int rep = 0; rep < 10; ++rep) {
    const auto k = make_keys(3);  // psi, alice half, bob half
    const oracle::Vec psi = oracle::random_state(gen, 1);
    const std::vector<Ket> states = {from_oracle(psi, {k[0]}), Ket::epr(k[1], k[2])};
    const std::vector<QubitKey> bsm_keys = {k[0], k[1]};
    const oracle::Mat u = oracle::mul(oracle::lift(oracle::H(), 0, 3), oracle::cnot(0, 1, 3));
    const double r = 1 / std::sqrt(2.0);
    for (std::size_t o = 0; o < 4; ++o) {
      const auto res = apply(states, circuits::bell_measurement(), bsm_keys, sample_for(o, 2), nullptr);
      ASSERT_EQ(res.outcome.size(), 2u);
      const int m0 = res.outcome[0], m1 = res.outcome[1];
      EXPECT_EQ(static_cast<std::size_t>(m0 * 2 + m1), o);

      // Oracle branch: project, then correct X^m1 Z^m0 on bob.
      oracle::Vec full = oracle::apply(u, oracle::kron(psi, oracle::Vec{r, 0, 0, r}));
      const double p = oracle::project(full, 3, {0, 1}, {m0, m1});
      EXPECT_NEAR(p, 0.25, 1e-12);
      oracle::Mat fix = oracle::Mat::identity(8);
      if (m1) fix = oracle::mul(oracle::lift(oracle::X(), 2, 3), fix);
      if (m0) fix = oracle::mul(oracle::lift(oracle::Z(), 2, 3), fix);
      full = oracle::apply(fix, full);
      const std::size_t base = static_cast<std::size_t>(m0 * 4 + m1 * 2);
      EXPECT_GT(oracle::overlap({full[base], full[base + 1]}, psi), 1 - 1e-12);

      // Library branch.
      const Ket& bob = res.states.back();
      ASSERT_EQ(bob.keys, std::vector<QubitKey>{k[2]});
      const auto fixed =
          apply(std::span(&bob, 1), circuits::pauli_correction(m1, m0), std::vector<QubitKey>{k[2]}, std::nullopt,
                nullptr);
      EXPECT_GT(oracle::overlap(fixed.states[0].amplitudes, psi), 1 - 1e-12);
    }
  }
}

TEST(Apply, EntanglementSwapYieldsEprForEveryOutcome) {
  const auto k = make_keys(4);  // a-b and c-d pairs; BSM on b, c
  const std::vector<Ket> states = {Ket::epr(k[0], k[1]), Ket::epr(k[2], k[3])};
  const double r = 1 / std::sqrt(2.0);
  const oracle::Vec epr = {r, 0, 0, r};
  const oracle::Mat u = oracle::mul(oracle::lift(oracle::H(), 1, 4), oracle::cnot(1, 2, 4));
  for (std::size_t o = 0; o < 4; ++o) {
    const auto res = apply(states, circuits::bell_measurement(), std::vector<QubitKey>{k[1], k[2]}, sample_for(o, 2),
                           nullptr);
    const int m0 = res.outcome[0], m1 = res.outcome[1];

    oracle::Vec full = oracle::apply(u, oracle::kron(epr, epr));
    oracle::project(full, 4, {1, 2}, {m0, m1});
    oracle::Mat fix = oracle::Mat::identity(16);
    if (m1) fix = oracle::mul(oracle::lift(oracle::X(), 3, 4), fix);
    if (m0) fix = oracle::mul(oracle::lift(oracle::Z(), 3, 4), fix);
    full = oracle::apply(fix, full);
    oracle::Vec outer(4);
    for (std::size_t i = 0; i < 16; ++i) {
      if (((i >> 2) & 1U) == static_cast<std::size_t>(m0) && ((i >> 1) & 1U) == static_cast<std::size_t>(m1)) {
        outer[((i >> 3) & 1U) * 2 + (i & 1U)] = full[i];
      }
    }
    EXPECT_GT(oracle::overlap(outer, epr), 1 - 1e-12);

    const Ket& ad = res.states.back();
    ASSERT_EQ(ad.keys, (std::vector<QubitKey>{k[0], k[3]}));
    const auto fixed = apply(std::span(&ad, 1), circuits::pauli_correction(m1, m0), std::vector<QubitKey>{k[3]},
                             std::nullopt, nullptr);
    EXPECT_GT(fidelity(Ket::epr(k[0], k[3]), fixed.states[0]), 1 - 1e-12);
  }
}

TEST(Apply, PurificationKeepsPairOnMatchingOutcomes) {
  const auto k = make_keys(4);  // kept pair (a1, b1), sacrificed pair (a2, b2)
  for (int flipped = 0; flipped < 2; ++flipped) {
    std::vector<Ket> states = {Ket::epr(k[0], k[1]), Ket::epr(k[2], k[3])};
    if (flipped) {
      states[1] =
          apply(states, Circuit(1).add(Gate::kX, {0}), std::vector<QubitKey>{k[3]}, std::nullopt, nullptr).states[0];
    }
    for (double s1 : {0.1, 0.6}) {
      for (double s2 : {0.2, 0.9}) {
        auto a_side = apply(states, circuits::purification_half(), std::vector<QubitKey>{k[0], k[2]}, s1, nullptr);
        auto b_side =
            apply(a_side.states, circuits::purification_half(), std::vector<QubitKey>{k[1], k[3]}, s2, nullptr);
        const bool equal = a_side.outcome[0] == b_side.outcome[0];
        EXPECT_EQ(equal, flipped == 0);
        if (equal) EXPECT_GT(fidelity(Ket::epr(k[0], k[1]), b_side.states.back()), 1 - 1e-12);
      }
    }
  }
}

TEST(Apply, MemoIsTransparent) {
  std::mt19937_64 gen(12);
  UnitaryMemo memo(8);
  for (int rep = 0; rep < 30; ++rep) {
    const auto k = make_keys(4);
    const std::vector<Ket> states = {from_oracle(oracle::random_state(gen, 2), {k[0], k[1]}),
                                     from_oracle(oracle::random_state(gen, 2), {k[2], k[3]})};
    Circuit c = random_circuit(gen, 3, 5);
    c.measure({1});
    const std::vector<QubitKey> keys = {k[3], k[0], k[1]};
    const auto a = apply(states, c, keys, 0.37, &memo);
    const auto b = apply(states, c, keys, 0.37, nullptr);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      EXPECT_EQ(a.states[i].keys, b.states[i].keys);
      EXPECT_EQ(0, std::memcmp(a.states[i].amplitudes.data(), b.states[i].amplitudes.data(),
                               a.states[i].amplitudes.size() * sizeof(cplx)));
    }
    EXPECT_EQ(a.outcome, b.outcome);
  }
}

TEST(Apply, DisjointCircuitsCommute) {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto k = make_keys(4);
    const Ket s1 = from_oracle(oracle::random_state(gen, 2), {k[0], k[1]});
    const Ket s2 = from_oracle(oracle::random_state(gen, 2), {k[2], k[3]});
    const Circuit c1 = random_circuit(gen, 2, 4), c2 = random_circuit(gen, 2, 4);
    const std::vector<QubitKey> k1 = {k[1], k[0]}, k2 = {k[2], k[3]};
    const Ket a1 = apply(std::span(&s1, 1), c1, k1, std::nullopt, nullptr).states[0];
    const Ket a2 = apply(std::span(&s2, 1), c2, k2, std::nullopt, nullptr).states[0];
    const Ket b2 = apply(std::span(&s2, 1), c2, k2, std::nullopt, nullptr).states[0];
    const Ket b1 = apply(std::span(&s1, 1), c1, k1, std::nullopt, nullptr).states[0];
    EXPECT_EQ(a1, b1);
    EXPECT_EQ(a2, b2);
  }
}

TEST(Apply, NormPreservedWithoutMeasurement) {
  std::mt19937_64 gen(14);
  for (int rep = 0; rep < 30; ++rep) {
    const auto k = make_keys(5);
    const std::vector<Ket> states = {from_oracle(oracle::random_state(gen, 3), {k[0], k[1], k[2]}),
                                     from_oracle(oracle::random_state(gen, 2), {k[3], k[4]})};
    const auto r = apply(states, random_circuit(gen, 2, 6), std::vector<QubitKey>{k[4], k[1]}, std::nullopt, nullptr);
    EXPECT_NEAR(r.states[0].norm(), 1.0, 1e-9);
    EXPECT_EQ(r.states[0].width(), 5u);
  }
}

TEST(Apply, MatchesOracleOnCarriedStates) {
  // Circuit on (k3, k0) with k1, k2 carried along; compare against the lifted oracle.
  std::mt19937_64 gen(15);
  for (int rep = 0; rep < 20; ++rep) {
    const auto k = make_keys(4);
    const oracle::Vec v1 = oracle::random_state(gen, 2), v2 = oracle::random_state(gen, 2);
    const std::vector<Ket> states = {from_oracle(v1, {k[0], k[1]}), from_oracle(v2, {k[2], k[3]})};
    const Circuit c = random_circuit(gen, 2, 5);
    const auto r = apply(states, c, std::vector<QubitKey>{k[3], k[0]}, std::nullopt, nullptr);
    // Oracle over wire order [k0, k1, k2, k3]; circuit wire 0 -> k3 (wire 3), wire 1 -> k0 (wire 0).
    oracle::Mat u = oracle::Mat::identity(16);
    const std::size_t map[2] = {3, 0};
    for (const GateOp& op : c.gates) {
      GateOp lifted = op;
      for (auto& w : lifted.wires) w = map[w];
      u = oracle::mul(oracle_gate(lifted, 4), u);
    }
    const oracle::Vec want = oracle::apply(u, oracle::kron(v1, v2));
    const Ket aligned = permute(r.states[0], k);
    expect_close(aligned.amplitudes, want);
  }
}
