#pragma once

#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qpdes/qsm/protocol.hpp"
#include "qpdes/quantum/apply.hpp"
#include "qpdes/server/channel.hpp"

namespace qpdes::qsm {

struct QsmOptions {
  /// Buffer SET, TRANSFER_IN and non-measuring RUN until a reply is needed.
  bool batching = true;
  /// Measured or reset keys come back under local management.
  bool offload = true;
  /// Forwarded RUNs carry digests of the states pushed for them.
  bool check_consistency = false;
};

struct QsmCounters {
  /// set/get/run/discard calls.
  std::uint64_t requests_total = 0;
  std::uint64_t requests_local = 0;
  std::uint64_t requests_forwarded = 0;
  /// Subset of requests naming a key that was ever under global management here.
  std::uint64_t transferred_requests = 0;
  std::uint64_t transferred_requests_local = 0;
  /// Messages sent to the global QSM; each gets exactly one reply.
  std::uint64_t frames = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  /// Requests that travelled inside a BATCH.
  std::uint64_t batched_items = 0;
  /// States pushed to the server.
  std::uint64_t pushes = 0;
  /// Wall time spent in server round trips, including encoding.
  double socket_seconds = 0;
};

/// A qubit leaving this worker: by value for an unentangled qubit, else by
/// reference to a state the server holds.
struct Transfer {
  QubitKey key;
  std::optional<quantum::Amplitudes> value;
};

/// Per-worker quantum state manager.
///
/// A key is LOCAL when this registry holds its state and GLOBAL when the
/// server does. All keys of one state share the same tag. Keys that leave
/// the worker (photons sent elsewhere) are no longer tracked here.
class LocalQsm {
 public:
  /// `channel` may be null for a single-worker run; any request that would
  /// need the server then fails with ServerUnavailable.
  LocalQsm(WorkerId worker, QsmOptions opts, std::unique_ptr<server::Channel> channel,
           quantum::UnitaryMemo* memo = nullptr);

  /// Binds `keys` to a fresh state. Partners of the keys in their old states
  /// are reset to |0>. Throws BadDimension, NotNormalized, DuplicateKey.
  void set(std::span<const QubitKey> keys, quantum::Amplitudes amplitudes);
  void set(const QubitKey& key, quantum::Amplitudes amplitudes) { set(std::span(&key, 1), std::move(amplitudes)); }
  quantum::Ket get(const QubitKey& key);
  /// Returns the measurement outcome (empty when the circuit measures nothing).
  std::vector<int> run(const quantum::Circuit& circuit, std::span<const QubitKey> keys, std::optional<double> sample);

  Transfer transfer_out(const QubitKey& key, bool cross_worker);
  void adopt(const Transfer& t);
  /// Resets the key to |0> and stops tracking it.
  void discard(const QubitKey& key);

  /// Sends buffered requests as one BATCH if any are pending.
  void flush();
  /// flush(), then a SYNC round trip.
  void sync_barrier();
  /// End-of-window notification. Every message is acknowledged after it is
  /// applied, so flushing the buffer is enough to make the server current.
  void window_barrier() { flush(); }
  void terminate_server();

  bool is_local(const QubitKey& k) const { return registry_.count(k) != 0; }
  bool is_global(const QubitKey& k) const { return global_.count(k) != 0; }
  std::vector<quantum::Ket> local_states() const;
  std::vector<QubitKey> global_keys() const;
  std::size_t pending() const { return buffer_.size(); }
  bool has_server() const { return channel_ != nullptr; }

  const QsmCounters& counters() const { return counters_; }
  WorkerId worker() const { return worker_; }

 private:
  using KetPtr = std::shared_ptr<quantum::Ket>;

  void note_request(std::span<const QubitKey> keys, bool local);
  void detach_local(std::span<const QubitKey> keys);
  void bind_local(quantum::Ket k);
  void mark_global(const std::vector<QubitKey>& keys);
  void push_state(const KetPtr& state, std::vector<std::pair<QubitKey, std::uint64_t>>* expect);
  void enqueue(Request r);
  Response send_now(Request r);
  Response call(const Request& r);

  WorkerId worker_;
  QsmOptions opts_;
  std::unique_ptr<server::Channel> channel_;
  quantum::UnitaryMemo* memo_;
  std::unordered_map<QubitKey, KetPtr> registry_;
  std::unordered_set<QubitKey> global_;
  std::unordered_set<QubitKey> transferred_;
  std::vector<Request> buffer_;
  std::uint64_t next_id_ = 0;
  QsmCounters counters_;
};

}  // namespace qpdes::qsm
