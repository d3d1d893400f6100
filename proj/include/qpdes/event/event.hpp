#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qpdes/core/error.hpp"
#include "qpdes/core/qubit_key.hpp"
#include "qpdes/core/sim_time.hpp"

namespace qpdes {

using EntityId = std::uint32_t;
using WorkerId = std::uint32_t;
using Amplitudes = std::vector<std::complex<double>>;

/// Total order over events. Ties on time break by source entity, then by the
/// source's own monotonic counter, so the order never depends on how entities
/// are spread over workers.
struct SortKey {
  SimTime time;
  EntityId source = 0;
  std::uint64_t seq = 0;

  friend constexpr auto operator<=>(const SortKey&, const SortKey&) = default;
};

using Value = std::variant<std::int64_t, double, std::string, QubitKey, Amplitudes>;

/// Small ordered field map carried by an event.
class Payload {
 public:
  Payload() = default;

  Payload& set(std::string name, Value v);
  bool has(std::string_view name) const { return find(name) != nullptr; }

  std::int64_t integer(std::string_view name) const { return get<std::int64_t>(name); }
  double real(std::string_view name) const { return get<double>(name); }
  const std::string& text(std::string_view name) const { return get<std::string>(name); }
  const QubitKey& key(std::string_view name) const { return get<QubitKey>(name); }
  const Amplitudes& amplitudes(std::string_view name) const { return get<Amplitudes>(name); }

  const std::vector<std::pair<std::string, Value>>& fields() const { return fields_; }
  bool operator==(const Payload&) const = default;

 private:
  const Value* find(std::string_view name) const;

  template <typename T>
  const T& get(std::string_view name) const {
    const Value* v = find(name);
    if (v == nullptr) fail(ErrorCode::kPrecondition, "payload field missing: " + std::string(name));
    const T* typed = std::get_if<T>(v);
    if (typed == nullptr) fail(ErrorCode::kPrecondition, "payload field has wrong type: " + std::string(name));
    return *typed;
  }

  std::vector<std::pair<std::string, Value>> fields_;
};

struct Event {
  SortKey key;
  EntityId target = 0;
  std::string handler;
  Payload payload;
  WorkerId dest_worker = 0;

  SimTime time() const { return key.time; }
  bool operator==(const Event&) const = default;
};

std::string describe(const Event& e);

/// Stable 64-bit digest of an event's identity and payload. Complex
/// amplitude fields are excluded; they carry quantum state, not control flow.
/// Fields named with a leading '_' are excluded too: they carry bookkeeping
/// that depends on the partition (e.g. a qubit handed to another worker).
std::uint64_t digest(const Event& e);

}  // namespace qpdes
