#include "qpdes/qsm/local_qsm.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "qpdes/core/error.hpp"

namespace qpdes::qsm {

using quantum::Ket;

LocalQsm::LocalQsm(WorkerId worker, QsmOptions opts, std::unique_ptr<server::Channel> channel,
                   quantum::UnitaryMemo* memo)
    : worker_(worker), opts_(opts), channel_(std::move(channel)), memo_(memo) {}

void LocalQsm::note_request(std::span<const QubitKey> keys, bool local) {
  ++counters_.requests_total;
  ++(local ? counters_.requests_local : counters_.requests_forwarded);
  const bool touched = std::any_of(keys.begin(), keys.end(), [&](const QubitKey& k) { return transferred_.count(k); });
  if (touched) {
    ++counters_.transferred_requests;
    if (local) ++counters_.transferred_requests_local;
  }
}

void LocalQsm::detach_local(std::span<const QubitKey> keys) {
  std::vector<KetPtr> touched;
  for (const QubitKey& k : keys) {
    const auto it = registry_.find(k);
    if (it != registry_.end() && std::find(touched.begin(), touched.end(), it->second) == touched.end()) {
      touched.push_back(it->second);
    }
  }
  for (const KetPtr& state : touched) {
    for (const QubitKey& partner : state->keys) {
      if (std::find(keys.begin(), keys.end(), partner) == keys.end()) {
        registry_[partner] = std::make_shared<Ket>(Ket::basis(partner, 0));
      }
    }
  }
  for (const QubitKey& k : keys) registry_.erase(k);
}

void LocalQsm::bind_local(Ket k) {
  auto state = std::make_shared<Ket>(std::move(k));
  for (const QubitKey& key : state->keys) {
    global_.erase(key);
    registry_[key] = state;
  }
}

void LocalQsm::mark_global(const std::vector<QubitKey>& keys) {
  for (const QubitKey& k : keys) {
    registry_.erase(k);
    global_.insert(k);
    transferred_.insert(k);
  }
}

void LocalQsm::push_state(const KetPtr& state, std::vector<std::pair<QubitKey, std::uint64_t>>* expect) {
  Request r;
  r.kind = Kind::kTransferIn;
  r.keys = state->keys;
  r.amplitudes = state->amplitudes;
  if (expect != nullptr) expect->emplace_back(state->keys.front(), state_digest(*state));
  ++counters_.pushes;
  mark_global(state->keys);
  enqueue(std::move(r));
}

void LocalQsm::set(std::span<const QubitKey> keys, quantum::Amplitudes amplitudes) {
  Ket fresh = Ket::make(std::move(amplitudes), {keys.begin(), keys.end()});
  std::vector<QubitKey> global_part;
  for (const QubitKey& k : keys) {
    if (global_.count(k)) global_part.push_back(k);
  }
  const bool local = global_part.empty();
  note_request(keys, local);
  detach_local(keys);
  if (local) {
    bind_local(std::move(fresh));
    return;
  }
  Request r;
  r.kind = Kind::kSet;
  if (opts_.offload) {
    r.keys = std::move(global_part);
    r.release = true;
    bind_local(std::move(fresh));
  } else {
    r.keys = fresh.keys;
    r.amplitudes = fresh.amplitudes;
    mark_global(fresh.keys);
  }
  enqueue(std::move(r));
}

Ket LocalQsm::get(const QubitKey& key) {
  const auto it = registry_.find(key);
  if (it != registry_.end()) {
    note_request(std::span(&key, 1), true);
    return *it->second;
  }
  if (!global_.count(key)) fail(ErrorCode::kUnknownKey, "unknown qubit key " + key.str());
  note_request(std::span(&key, 1), false);
  Request r;
  r.kind = Kind::kGet;
  r.keys = {key};
  Response resp = send_now(std::move(r));
  if (!resp.state) fail(ErrorCode::kMalformedMessage, "GET reply without state");
  return std::move(*resp.state);
}

std::vector<int> LocalQsm::run(const quantum::Circuit& circuit, std::span<const QubitKey> keys,
                               std::optional<double> sample) {
  circuit.validate();
  if (!circuit.measured.empty() && !sample) fail(ErrorCode::kPrecondition, "measuring circuit needs prob_sample");
  bool any_global = false;
  for (const QubitKey& k : keys) {
    if (global_.count(k)) {
      any_global = true;
    } else if (!registry_.count(k)) {
      fail(ErrorCode::kUnknownKey, "unknown qubit key " + k.str());
    }
  }

  if (!any_global) {
    note_request(keys, true);
    std::vector<KetPtr> touched;
    for (const QubitKey& k : keys) {
      const KetPtr& s = registry_.at(k);
      if (std::find(touched.begin(), touched.end(), s) == touched.end()) touched.push_back(s);
    }
    std::vector<Ket> states;
    states.reserve(touched.size());
    for (const KetPtr& s : touched) states.push_back(*s);
    auto result = quantum::apply(states, circuit, keys, sample, memo_);
    for (Ket& s : result.states) bind_local(std::move(s));
    return result.outcome;
  }

  note_request(keys, false);
  Request r;
  r.kind = Kind::kRun;
  r.keys.assign(keys.begin(), keys.end());
  r.circuit = circuit;
  r.sample = sample;
  r.release = opts_.offload;
  std::vector<KetPtr> pushed;
  for (const QubitKey& k : keys) {
    const auto it = registry_.find(k);
    if (it == registry_.end() || std::find(pushed.begin(), pushed.end(), it->second) != pushed.end()) continue;
    pushed.push_back(it->second);
  }
  for (const KetPtr& s : pushed) push_state(s, opts_.check_consistency ? &r.expect : nullptr);
  if (!r.needs_reply_data()) {
    enqueue(std::move(r));
    return {};
  }
  Response resp = send_now(std::move(r));
  for (Ket& k : resp.released) bind_local(std::move(k));
  return resp.outcome;
}

Transfer LocalQsm::transfer_out(const QubitKey& key, bool cross_worker) {
  Transfer t{key, std::nullopt};
  if (!cross_worker) return t;
  const auto it = registry_.find(key);
  if (it != registry_.end()) {
    const KetPtr state = it->second;
    if (state->width() == 1) {
      t.value = state->amplitudes;
      registry_.erase(key);
      return t;
    }
    push_state(state, nullptr);
    global_.erase(key);
    return t;
  }
  if (!global_.erase(key)) fail(ErrorCode::kUnknownKey, "unknown qubit key " + key.str());
  return t;
}

void LocalQsm::adopt(const Transfer& t) {
  if (t.value) {
    bind_local(Ket::make(*t.value, {t.key}));
    return;
  }
  global_.insert(t.key);
  transferred_.insert(t.key);
}

void LocalQsm::discard(const QubitKey& key) {
  if (registry_.count(key)) {
    note_request(std::span(&key, 1), true);
    detach_local(std::span(&key, 1));
    return;
  }
  if (!global_.count(key)) fail(ErrorCode::kUnknownKey, "unknown qubit key " + key.str());
  note_request(std::span(&key, 1), false);
  global_.erase(key);
  Request r;
  r.kind = Kind::kSet;
  r.keys = {key};
  r.release = true;
  enqueue(std::move(r));
}

void LocalQsm::enqueue(Request r) {
  if (opts_.batching && !r.needs_reply_data()) {
    r.id = ++next_id_;
    r.worker = worker_;
    buffer_.push_back(std::move(r));
    return;
  }
  send_now(std::move(r));
}

Response LocalQsm::send_now(Request r) {
  flush();
  r.id = ++next_id_;
  r.worker = worker_;
  return call(r);
}

void LocalQsm::flush() {
  if (buffer_.empty()) return;
  Request batch;
  batch.kind = Kind::kBatch;
  batch.id = ++next_id_;
  batch.worker = worker_;
  counters_.batched_items += buffer_.size();
  batch.items = std::move(buffer_);
  buffer_.clear();
  call(batch);
}

void LocalQsm::sync_barrier() {
  Request r;
  r.kind = Kind::kSync;
  send_now(std::move(r));
}

void LocalQsm::terminate_server() {
  Request r;
  r.kind = Kind::kTerminate;
  send_now(std::move(r));
}

Response LocalQsm::call(const Request& r) {
  if (!channel_) fail(ErrorCode::kServerUnavailable, "no global QSM configured for this run");
  const auto start = std::chrono::steady_clock::now();
  struct Timer {
    std::chrono::steady_clock::time_point t0;
    double& acc;
    ~Timer() { acc += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
  } timer{start, counters_.socket_seconds};
  const std::string text = encode(r);
  ++counters_.frames;
  counters_.bytes_sent += text.size() + 4;
  const std::string reply = channel_->roundtrip(text);
  counters_.bytes_received += reply.size() + 4;
  Response resp = decode_response(reply);
  if (resp.id != r.id) fail(ErrorCode::kMalformedMessage, "reply id does not match request");
  if (!resp.ok) fail(error_code_from(resp.error), "global QSM: " + resp.message);
  return resp;
}

std::vector<Ket> LocalQsm::local_states() const {
  std::vector<Ket> out;
  std::unordered_set<const Ket*> seen;
  for (const auto& [k, state] : registry_) {
    if (seen.insert(state.get()).second) out.push_back(*state);
  }
  return out;
}

std::vector<QubitKey> LocalQsm::global_keys() const {
  std::vector<QubitKey> out(global_.begin(), global_.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qpdes::qsm
