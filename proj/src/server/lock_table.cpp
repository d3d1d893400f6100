#include "qpdes/server/lock_table.hpp"

#include <algorithm>

namespace qpdes::server {

void LockTable::Guard::release() {
  for (auto it = held_.rbegin(); it != held_.rend(); ++it) (*it)->unlock();
  held_.clear();
  keys_.clear();
}

std::shared_ptr<std::mutex> LockTable::token(const QubitKey& key) {
  std::lock_guard lock(mu_);
  auto& slot = tokens_[key];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

LockTable::Guard LockTable::acquire(std::vector<QubitKey> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  Guard g;
  g.held_.reserve(keys.size());
  for (const QubitKey& k : keys) {
    auto t = token(k);
    t->lock();
    g.held_.push_back(std::move(t));
  }
  g.keys_ = std::move(keys);
  return g;
}

std::size_t LockTable::size() const {
  std::lock_guard lock(mu_);
  return tokens_.size();
}

}  // namespace qpdes::server
