#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "qpdes/core/qubit_key.hpp"

namespace qpdes::server {

/// One mutex per qubit key. Callers lock sets of keys in ascending key order,
/// which rules out lock-order cycles between sessions. Tokens are never
/// dropped: a key can leave the server and return later, and a session may
/// still be blocked on the token it looked up earlier.
class LockTable {
 public:
  class Guard {
   public:
    Guard() = default;
    Guard(Guard&&) noexcept = default;
    Guard& operator=(Guard&&) noexcept = default;
    ~Guard() { release(); }

    void release();
    const std::vector<QubitKey>& keys() const { return keys_; }

   private:
    friend class LockTable;
    std::vector<QubitKey> keys_;
    std::vector<std::shared_ptr<std::mutex>> held_;
  };

  /// Sorts and deduplicates `keys`, then locks them in ascending order.
  Guard acquire(std::vector<QubitKey> keys);

  std::size_t size() const;

 private:
  std::shared_ptr<std::mutex> token(const QubitKey& key);

  mutable std::mutex mu_;
  std::unordered_map<QubitKey, std::shared_ptr<std::mutex>> tokens_;
};

}  // namespace qpdes::server
