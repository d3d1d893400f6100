#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qpdes/qsm/protocol.hpp"
#include "qpdes/server/lock_table.hpp"

namespace qpdes::server {

/// Global QSM state and request handlers, shared by every session.
///
/// Requests touching a key lock the entanglement closure of the listed keys
/// (every key of every state that holds one of them), in ascending key order.
/// Requests on disjoint closures proceed in parallel.
class ServerCore {
 public:
  struct Options {
    bool use_memo = true;
    std::size_t memo_capacity = quantum::UnitaryMemo::kDefaultCapacity;
    /// Records every applied request with a sequence number taken under its locks.
    bool record_log = false;
  };

  ServerCore() : ServerCore(Options{}) {}
  explicit ServerCore(Options opts);

  /// Never throws; failures become error responses.
  qsm::Response handle(const qsm::Request& r);
  /// Decodes, handles and encodes. Malformed text yields an error response
  /// carrying whatever request id could be recovered.
  std::string handle_text(std::string_view text);

  /// All states with keys in ascending order, sorted by first key.
  std::vector<quantum::Ket> snapshot() const;
  bool holds(const QubitKey& k) const;
  std::size_t key_count() const;
  std::vector<QubitKey> keys() const;

  bool terminated() const { return terminated_.load(); }
  std::uint64_t requests_handled() const { return handled_.load(); }

  struct LogEntry {
    std::uint64_t seq;
    qsm::Request request;
  };
  /// Applied requests in sequence order (BATCH items appear individually).
  std::vector<LogEntry> log() const;

 private:
  struct Record {
    quantum::Ket ket;
  };
  using RecordPtr = std::shared_ptr<Record>;

  qsm::Response dispatch(const qsm::Request& r);
  void handle_set(const qsm::Request& r);
  void handle_transfer_in(const qsm::Request& r);
  void handle_run(const qsm::Request& r, qsm::Response& out);
  void handle_get(const qsm::Request& r, qsm::Response& out);
  void handle_batch(const qsm::Request& r, qsm::Response& out);

  LockTable::Guard lock_closure(const std::vector<QubitKey>& keys);
  RecordPtr find(const QubitKey& k) const;
  void bind(const quantum::Ket& k);
  void erase(const std::vector<QubitKey>& keys);
  void append_log(const qsm::Request& r);

  Options opts_;
  quantum::UnitaryMemo memo_;
  LockTable locks_;
  mutable std::mutex map_mu_;
  std::unordered_map<QubitKey, RecordPtr> map_;
  std::atomic<bool> terminated_{false};
  std::atomic<std::uint64_t> handled_{0};
  mutable std::mutex log_mu_;
  std::uint64_t next_seq_ = 0;
  std::vector<LogEntry> log_;
};

}  // namespace qpdes::server
