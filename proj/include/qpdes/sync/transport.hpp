#pragma once

#include <barrier>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qpdes/core/sim_time.hpp"
#include "qpdes/event/event.hpp"

namespace qpdes::sync {

struct ExchangeResult {
  /// incoming[w] = bytes worker w addressed to this worker.
  std::vector<std::string> incoming;
  /// mins[w] = worker w's local minimum.
  std::vector<SimTime> mins;
  /// Time spent blocked on peers.
  double wait_seconds = 0;
  /// Time spent moving bytes.
  double transfer_seconds = 0;
};

/// Collective exchange among a fixed set of workers. Every call is a barrier:
/// nobody returns until all workers have contributed.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual WorkerId rank() const = 0;
  virtual std::size_t size() const = 0;
  /// outgoing[w] goes to worker w; outgoing[rank()] is ignored.
  virtual ExchangeResult exchange(std::vector<std::string> outgoing, SimTime local_min) = 0;
  /// Plain barrier; returns seconds waited.
  virtual double barrier() = 0;
};

/// Shared state for workers running as threads of one process.
class InHostHub {
 public:
  explicit InHostHub(std::size_t workers);
  std::size_t size() const { return n_; }

 private:
  friend class InHostTransport;
  std::size_t n_;
  std::barrier<> gate_;
  std::vector<std::vector<std::string>> slots_;  // [from][to]
  std::vector<SimTime> mins_;
};

class InHostTransport final : public Transport {
 public:
  InHostTransport(InHostHub& hub, WorkerId rank) : hub_(hub), rank_(rank) {}
  WorkerId rank() const override { return rank_; }
  std::size_t size() const override { return hub_.size(); }
  ExchangeResult exchange(std::vector<std::string> outgoing, SimTime local_min) override;
  double barrier() override;

 private:
  InHostHub& hub_;
  WorkerId rank_;
};

/// Full mesh of TCP connections on loopback, one per worker pair. Each
/// exchange sends one frame (local min + payload) to every peer and reads
/// one from every peer.
class SocketTransport final : public Transport {
 public:
  /// Collective constructor: every rank must call it with the same base port
  /// (0 lets ranks coordinate through `ports`, a shared vector of listen ports).
  SocketTransport(WorkerId rank, std::size_t size, std::vector<std::uint16_t>& ports, std::barrier<>& startup);
  ~SocketTransport() override;
  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  WorkerId rank() const override { return rank_; }
  std::size_t size() const override { return n_; }
  ExchangeResult exchange(std::vector<std::string> outgoing, SimTime local_min) override;
  double barrier() override;

 private:
  void all_to_all(std::vector<std::string>& send, std::vector<std::string>& recv);

  WorkerId rank_;
  std::size_t n_;
  std::vector<int> peers_;  // fd per rank, -1 for self
};

}  // namespace qpdes::sync
