#include "qpdes/qsm/protocol.hpp"

#include <cstring>

#include "json.hpp"
#include "qpdes/core/error.hpp"

namespace qpdes::qsm {

using nlohmann::json;

namespace {

constexpr std::string_view kKindNames[] = {"SET", "GET", "RUN", "TRANSFER_IN", "SYNC", "TERMINATE", "BATCH"};

Kind parse_kind(const std::string& s) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == s) return static_cast<Kind>(i);
  }
  fail(ErrorCode::kMalformedMessage, "unknown message kind: " + s);
}

json keys_json(const std::vector<QubitKey>& keys) {
  json out = json::array();
  for (const QubitKey& k : keys) out.push_back(k.str());
  return out;
}

std::vector<QubitKey> keys_from(const json& j) {
  std::vector<QubitKey> out;
  for (const json& e : j) {
    const auto k = QubitKey::parse(e.get<std::string>());
    if (!k) fail(ErrorCode::kMalformedMessage, "bad qubit key: " + e.get<std::string>());
    out.push_back(*k);
  }
  return out;
}

json amps_json(const quantum::Amplitudes& a) {
  json out = json::array();
  for (const auto& c : a) out.push_back(json::array({c.real(), c.imag()}));
  return out;
}

quantum::Amplitudes amps_from(const json& j) {
  quantum::Amplitudes out;
  out.reserve(j.size());
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 2) fail(ErrorCode::kMalformedMessage, "complex value must be [re, im]");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

json ket_json(const quantum::Ket& k) { return json{{"keys", keys_json(k.keys)}, {"amplitudes", amps_json(k.amplitudes)}}; }

quantum::Ket ket_from(const json& j) { return quantum::Ket{amps_from(j.at("amplitudes")), keys_from(j.at("keys"))}; }

json circuit_json(const quantum::Circuit& c) {
  json gates = json::array();
  for (const auto& g : c.gates) {
    json op = json::array({std::string(quantum::gate_name(g.gate))});
    for (std::size_t w : g.wires) op.push_back(w);
    gates.push_back(std::move(op));
  }
  return json{{"width", c.width}, {"gates", gates}, {"measure", c.measured}};
}

quantum::Circuit circuit_from(const json& j) {
  quantum::Circuit c(j.at("width").get<std::size_t>());
  for (const json& op : j.at("gates")) {
    if (!op.is_array() || op.empty()) fail(ErrorCode::kMalformedMessage, "gate must be [name, wires...]");
    std::vector<std::size_t> wires;
    for (std::size_t i = 1; i < op.size(); ++i) wires.push_back(op[i].get<std::size_t>());
    c.add(quantum::parse_gate(op[0].get<std::string>()), std::move(wires));
  }
  c.measure(j.at("measure").get<std::vector<std::size_t>>());
  return c;
}

json request_json(const Request& r) {
  json j{{"kind", kind_name(r.kind)}, {"id", r.id}, {"worker", r.worker}};
  switch (r.kind) {
    case Kind::kSet:
    case Kind::kTransferIn:
      j["keys"] = keys_json(r.keys);
      if (!r.release) j["amplitudes"] = amps_json(r.amplitudes);
      if (r.kind == Kind::kSet) j["release"] = r.release;
      break;
    case Kind::kGet: j["keys"] = keys_json(r.keys); break;
    case Kind::kRun:
      j["keys"] = keys_json(r.keys);
      j["circuit"] = circuit_json(*r.circuit);
      if (r.sample) j["sample"] = *r.sample;
      j["release"] = r.release;
      if (!r.expect.empty()) {
        json e = json::array();
        for (const auto& [k, h] : r.expect) e.push_back(json::array({k.str(), h}));
        j["expect"] = std::move(e);
      }
      break;
    case Kind::kBatch: {
      json items = json::array();
      for (const Request& item : r.items) items.push_back(request_json(item));
      j["items"] = std::move(items);
      break;
    }
    case Kind::kSync:
    case Kind::kTerminate: break;
  }
  return j;
}

Request request_from(const json& j) {
  Request r;
  r.kind = parse_kind(j.at("kind").get<std::string>());
  r.id = j.at("id").get<std::uint64_t>();
  r.worker = j.at("worker").get<WorkerId>();
  if (j.contains("keys")) r.keys = keys_from(j.at("keys"));
  if (j.contains("amplitudes")) r.amplitudes = amps_from(j.at("amplitudes"));
  if (j.contains("release")) r.release = j.at("release").get<bool>();
  if (j.contains("circuit")) r.circuit = circuit_from(j.at("circuit"));
  if (j.contains("sample")) r.sample = j.at("sample").get<double>();
  if (j.contains("expect")) {
    for (const json& e : j.at("expect")) {
      const auto k = QubitKey::parse(e.at(0).get<std::string>());
      if (!k) fail(ErrorCode::kMalformedMessage, "bad qubit key in expect");
      r.expect.emplace_back(*k, e.at(1).get<std::uint64_t>());
    }
  }
  if (r.kind == Kind::kBatch) {
    for (const json& item : j.at("items")) r.items.push_back(request_from(item));
  }
  if (r.kind == Kind::kRun && !r.circuit) fail(ErrorCode::kMalformedMessage, "RUN without circuit");
  return r;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedMessage, e.what());
  }
}

}  // namespace

std::string_view kind_name(Kind k) { return kKindNames[static_cast<std::size_t>(k)]; }

bool Request::needs_reply_data() const {
  switch (kind) {
    case Kind::kGet: return true;
    case Kind::kRun: return circuit && !circuit->measured.empty();
    default: return false;
  }
}

std::string encode(const Request& r) { return request_json(r).dump(); }

std::string encode(const Response& r) {
  json j{{"id", r.id}, {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = r.error;
    j["message"] = r.message;
    if (r.index) j["index"] = *r.index;
  }
  if (!r.outcome.empty()) j["outcome"] = r.outcome;
  if (!r.released.empty()) {
    json rel = json::array();
    for (const auto& k : r.released) rel.push_back(ket_json(k));
    j["released"] = std::move(rel);
  }
  if (r.state) j["state"] = ket_json(*r.state);
  return j.dump();
}

Request decode_request(std::string_view text) {
  return guarded([&] { return request_from(json::parse(text)); });
}

Response decode_response(std::string_view text) {
  return guarded([&] {
    const json j = json::parse(text);
    Response r;
    r.id = j.at("id").get<std::uint64_t>();
    r.ok = j.at("ok").get<bool>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    if (j.contains("message")) r.message = j.at("message").get<std::string>();
    if (j.contains("index")) r.index = j.at("index").get<std::size_t>();
    if (j.contains("outcome")) r.outcome = j.at("outcome").get<std::vector<int>>();
    if (j.contains("released")) {
      for (const json& k : j.at("released")) r.released.push_back(ket_from(k));
    }
    if (j.contains("state")) r.state = ket_from(j.at("state"));
    return r;
  });
}

std::uint64_t peek_id(std::string_view text) noexcept {
  try {
    const json j = json::parse(text);
    if (j.is_object() && j.contains("id") && j.at("id").is_number_unsigned()) return j.at("id").get<std::uint64_t>();
  } catch (...) {
  }
  return 0;
}

std::uint64_t state_digest(const quantum::Ket& k) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFFU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const QubitKey& key : k.keys) {
    mix(key.hi);
    mix(key.lo);
  }
  for (const auto& a : k.amplitudes) {
    std::uint64_t bits = 0;
    double re = a.real(), im = a.imag();
    std::memcpy(&bits, &re, 8);
    mix(bits);
    std::memcpy(&bits, &im, 8);
    mix(bits);
  }
  return h;
}

std::string frame(std::string_view text) {
  if (text.size() > kMaxFrameBytes) fail(ErrorCode::kMalformedMessage, "frame too large");
  std::string out(4, '\0');
  const auto n = static_cast<std::uint32_t>(text.size());
  out[0] = static_cast<char>((n >> 24) & 0xFF);
  out[1] = static_cast<char>((n >> 16) & 0xFF);
  out[2] = static_cast<char>((n >> 8) & 0xFF);
  out[3] = static_cast<char>(n & 0xFF);
  out.append(text);
  return out;
}

}  // namespace qpdes::qsm
