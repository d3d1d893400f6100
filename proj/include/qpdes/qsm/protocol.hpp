#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpdes/event/event.hpp"
#include "qpdes/quantum/circuit.hpp"

// Messages between local QSMs and the global QSM. Each message is one JSON
// object; on a stream it is framed by a 4-byte big-endian length. The format
// is documented in docs/qsm-wire-protocol.md.

namespace qpdes::qsm {

enum class Kind { kSet, kGet, kRun, kTransferIn, kSync, kTerminate, kBatch };

std::string_view kind_name(Kind k);

struct Request {
  Kind kind = Kind::kSync;
  std::uint64_t id = 0;
  WorkerId worker = 0;
  std::vector<QubitKey> keys;
  quantum::Amplitudes amplitudes;
  /// SET: drop the keys from the server instead of binding them.
  /// RUN: hand measured keys back to the caller.
  bool release = false;
  std::optional<quantum::Circuit> circuit;
  std::optional<double> sample;
  /// RUN, debug only: expected digest of the state holding each listed key.
  std::vector<std::pair<QubitKey, std::uint64_t>> expect;
  /// BATCH only.
  std::vector<Request> items;

  bool needs_reply_data() const;
};

struct Response {
  std::uint64_t id = 0;
  bool ok = true;
  std::string error;
  std::string message;
  /// BATCH failures: index of the failing item.
  std::optional<std::size_t> index;
  std::vector<int> outcome;
  /// Measured keys handed back to the caller as single-qubit states.
  std::vector<quantum::Ket> released;
  /// GET result.
  std::optional<quantum::Ket> state;
};

std::string encode(const Request& r);
std::string encode(const Response& r);
/// Both throw MalformedMessage.
Request decode_request(std::string_view text);
Response decode_response(std::string_view text);

/// Best-effort request id from a possibly malformed message; 0 if absent.
std::uint64_t peek_id(std::string_view text) noexcept;

/// Digest over a state's keys and amplitude bits.
std::uint64_t state_digest(const quantum::Ket& k);

/// Stream framing: 4-byte big-endian length followed by the message text.
std::string frame(std::string_view text);
inline constexpr std::size_t kMaxFrameBytes = 64u << 20;

}  // namespace qpdes::qsm
