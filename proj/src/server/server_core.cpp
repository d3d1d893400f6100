#include "qpdes/server/server_core.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "qpdes/core/error.hpp"
#include "qpdes/quantum/apply.hpp"

namespace qpdes::server {

using qsm::Kind;
using qsm::Request;
using qsm::Response;
using quantum::Ket;

namespace {

constexpr int kClosureRetries = 64;

}  // namespace

ServerCore::ServerCore(Options opts) : opts_(opts), memo_(opts.memo_capacity) {}

ServerCore::RecordPtr ServerCore::find(const QubitKey& k) const {
  std::lock_guard lock(map_mu_);
  const auto it = map_.find(k);
  return it == map_.end() ? nullptr : it->second;
}

void ServerCore::bind(const Ket& k) {
  auto rec = std::make_shared<Record>(Record{k});
  std::lock_guard lock(map_mu_);
  for (const QubitKey& key : k.keys) map_[key] = rec;
}

void ServerCore::erase(const std::vector<QubitKey>& keys) {
  std::lock_guard lock(map_mu_);
  for (const QubitKey& key : keys) map_.erase(key);
}

LockTable::Guard ServerCore::lock_closure(const std::vector<QubitKey>& keys) {
  std::set<QubitKey> want(keys.begin(), keys.end());
  for (int attempt = 0; attempt < kClosureRetries; ++attempt) {
    LockTable::Guard guard = locks_.acquire({want.begin(), want.end()});
    // A state can only be rebound by a holder of all its keys, so once the
    // listed keys are held their states are stable and the closure is exact.
    bool grew = false;
    for (const QubitKey& k : keys) {
      const RecordPtr rec = find(k);
      if (!rec) continue;
      for (const QubitKey& partner : rec->ket.keys) grew = want.insert(partner).second || grew;
    }
    if (!grew) return guard;
  }
  fail(ErrorCode::kPrecondition, "entanglement closure did not stabilize");
}

void ServerCore::append_log(const Request& r) {
  if (!opts_.record_log) return;
  std::lock_guard lock(log_mu_);
  log_.push_back(LogEntry{next_seq_++, r});
}

void ServerCore::handle_set(const Request& r) {
  if (r.keys.empty()) fail(ErrorCode::kBadDimension, "SET without keys");
  if (!r.release) Ket::make(r.amplitudes, r.keys);
  if (std::set<QubitKey>(r.keys.begin(), r.keys.end()).size() != r.keys.size()) {
    fail(ErrorCode::kDuplicateKey, "SET keys repeat");
  }
  auto guard = lock_closure(r.keys);
  std::vector<RecordPtr> touched;
  for (const QubitKey& k : r.keys) {
    RecordPtr rec = find(k);
    if (rec && std::find(touched.begin(), touched.end(), rec) == touched.end()) touched.push_back(std::move(rec));
  }
  for (const RecordPtr& rec : touched) {
    for (const QubitKey& partner : rec->ket.keys) {
      if (std::find(r.keys.begin(), r.keys.end(), partner) == r.keys.end()) bind(Ket::basis(partner, 0));
    }
  }
  erase(r.keys);
  if (!r.release) bind(Ket{r.amplitudes, r.keys});
  append_log(r);
}

void ServerCore::handle_transfer_in(const Request& r) {
  Ket k = Ket::make(r.amplitudes, r.keys);
  auto guard = locks_.acquire(r.keys);
  for (const QubitKey& key : r.keys) {
    if (find(key)) fail(ErrorCode::kDuplicateKey, "server already holds " + key.str());
  }
  bind(k);
  append_log(r);
}

void ServerCore::handle_run(const Request& r, Response& out) {
  const quantum::Circuit& c = *r.circuit;
  auto guard = lock_closure(r.keys);
  std::vector<RecordPtr> touched;
  for (const QubitKey& k : r.keys) {
    RecordPtr rec = find(k);
    if (!rec) fail(ErrorCode::kMissingState, "server holds no state for " + k.str());
    if (std::find(touched.begin(), touched.end(), rec) == touched.end()) touched.push_back(std::move(rec));
  }
  for (const auto& [key, digest] : r.expect) {
    const RecordPtr rec = find(key);
    if (!rec || qsm::state_digest(rec->ket) != digest) {
      fail(ErrorCode::kInconsistentState, "server copy differs from the pushed state of " + key.str());
    }
  }
  std::vector<Ket> states;
  states.reserve(touched.size());
  for (const RecordPtr& rec : touched) states.push_back(rec->ket);
  auto result = quantum::apply(states, c, r.keys, r.sample, opts_.use_memo ? &memo_ : nullptr);

  std::vector<QubitKey> old_keys;
  for (const Ket& s : states) old_keys.insert(old_keys.end(), s.keys.begin(), s.keys.end());
  erase(old_keys);
  const std::size_t measured = c.measured.size();
  for (std::size_t i = 0; i < result.states.size(); ++i) {
    if (r.release && i < measured) {
      out.released.push_back(std::move(result.states[i]));
    } else {
      bind(result.states[i]);
    }
  }
  out.outcome = std::move(result.outcome);
  append_log(r);
}

void ServerCore::handle_get(const Request& r, Response& out) {
  if (r.keys.size() != 1) fail(ErrorCode::kMalformedMessage, "GET takes one key");
  auto guard = lock_closure(r.keys);
  const RecordPtr rec = find(r.keys[0]);
  if (!rec) fail(ErrorCode::kUnknownKey, "server holds no state for " + r.keys[0].str());
  out.state = rec->ket;
}

void ServerCore::handle_batch(const Request& r, Response& out) {
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    const Request& item = r.items[i];
    const bool allowed = item.kind == Kind::kSet || item.kind == Kind::kTransferIn ||
                         (item.kind == Kind::kRun && !item.needs_reply_data());
    Response sub;
    if (!allowed) {
      sub.ok = false;
      sub.error = std::string(to_string(ErrorCode::kMalformedMessage));
      sub.message = "BATCH item of kind " + std::string(qsm::kind_name(item.kind)) + " expects a reply";
    } else {
      sub = dispatch(item);
    }
    if (!sub.ok) {
      out.ok = false;
      out.error = sub.error;
      out.message = "batch item " + std::to_string(i) + ": " + sub.message;
      out.index = i;
      return;
    }
  }
}

Response ServerCore::dispatch(const Request& r) {
  Response out;
  out.id = r.id;
  try {
    switch (r.kind) {
      case Kind::kSet: handle_set(r); break;
      case Kind::kTransferIn: handle_transfer_in(r); break;
      case Kind::kRun: handle_run(r, out); break;
      case Kind::kGet: handle_get(r, out); break;
      case Kind::kBatch: handle_batch(r, out); break;
      case Kind::kSync: break;
      case Kind::kTerminate: terminated_.store(true); break;
    }
  } catch (const Error& e) {
    out = Response{};
    out.id = r.id;
    out.ok = false;
    out.error = std::string(to_string(e.code()));
    out.message = e.what();
  } catch (const std::exception& e) {
    out = Response{};
    out.id = r.id;
    out.ok = false;
    out.error = std::string(to_string(ErrorCode::kPrecondition));
    out.message = e.what();
  }
  return out;
}

Response ServerCore::handle(const Request& r) {
  handled_.fetch_add(1);
  return dispatch(r);
}

std::string ServerCore::handle_text(std::string_view text) {
  Request r;
  try {
    r = qsm::decode_request(text);
  } catch (const Error& e) {
    Response out;
    out.id = qsm::peek_id(text);
    out.ok = false;
    out.error = std::string(to_string(e.code()));
    out.message = e.what();
    return qsm::encode(out);
  }
  return qsm::encode(handle(r));
}

std::vector<Ket> ServerCore::snapshot() const {
  std::vector<RecordPtr> recs;
  {
    std::lock_guard lock(map_mu_);
    std::unordered_set<const Record*> seen;
    for (const auto& [k, rec] : map_) {
      if (seen.insert(rec.get()).second) recs.push_back(rec);
    }
  }
  std::vector<Ket> out;
  for (const RecordPtr& rec : recs) {
    std::vector<QubitKey> sorted = rec->ket.keys;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(quantum::permute(rec->ket, sorted));
  }
  std::sort(out.begin(), out.end(), [](const Ket& a, const Ket& b) { return a.keys.front() < b.keys.front(); });
  return out;
}

bool ServerCore::holds(const QubitKey& k) const { return find(k) != nullptr; }

std::size_t ServerCore::key_count() const {
  std::lock_guard lock(map_mu_);
  return map_.size();
}

std::vector<QubitKey> ServerCore::keys() const {
  std::lock_guard lock(map_mu_);
  std::vector<QubitKey> out;
  out.reserve(map_.size());
  for (const auto& [k, rec] : map_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ServerCore::LogEntry> ServerCore::log() const {
  std::lock_guard lock(log_mu_);
  return log_;
}

}  // namespace qpdes::server
