#pragma once

#include <span>
#include <string>
#include <vector>

#include "qpdes/net/model.hpp"
#include "qpdes/server/server_core.hpp"

namespace qpdes::net {

struct AuditReport {
  std::uint64_t passes = 0;
  std::uint64_t violations = 0;
  /// First few violation descriptions.
  std::vector<std::string> samples;

  void flag(std::string what);
};

/// Checks quantum-state ownership across all workers and the server at a
/// quiescent point (every buffer flushed):
///  - single authority: each key's state is held by exactly one registry;
///  - no mixed ownership: a state never mixes keys held in different places,
///    and every key a worker tags GLOBAL is held by the server;
///  - every ENTANGLED memory has a state, and with `check_partners` that
///    state holds a memory of the same flow (a source memory may already be
///    reset by its delivery). Expiry does not notify the far end, so partner
///    checks only hold when no memory can expire during the run.
void audit_state(const Layout& layout, const std::vector<WorkerId>& owner, std::span<qsm::LocalQsm* const> qsms,
                 std::span<const QuantumNetwork* const> models, const server::ServerCore* core, bool check_partners,
                 AuditReport& out);

}  // namespace qpdes::net
