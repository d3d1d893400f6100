#include "qpdes/bench/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qpdes/core/error.hpp"

namespace qpdes::bench {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  fail(ErrorCode::kValidationError, path + ": " + why);
}

// Walks one JSON object, reading known fields and rejecting the rest.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void num(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) invalid(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) invalid(at(key), "must be finite");
    }
  }
  template <typename U>
  void uint(const std::string& key, U& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) invalid(at(key), "expected a non-negative integer");
      out = static_cast<U>(v->get<std::uint64_t>());
    }
  }
  void flag(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) invalid(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) invalid(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (seen_.count(k) == 0) invalid(at(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(const std::string& path, double v) {
  if (!(v > 0)) invalid(path, "must be positive");
}
void non_negative(const std::string& path, double v) {
  if (v < 0) invalid(path, "must not be negative");
}
void probability(const std::string& path, double v) {
  if (v < 0 || v > 1) invalid(path, "must lie in [0, 1]");
}

json hardware_json(const net::HardwareParams& h) {
  return json{{"memory_efficiency", h.memory_efficiency},
              {"memory_frequency_hz", h.memory_frequency_hz},
              {"coherence_time_s", h.coherence_time_s},
              {"raw_fidelity", h.raw_fidelity},
              {"detector_efficiency", h.detector_efficiency},
              {"count_rate_hz", h.count_rate_hz},
              {"dark_count_hz", h.dark_count_hz},
              {"resolution_s", h.resolution_s},
              {"attenuation_db_per_km", h.attenuation_db_per_km},
              {"light_speed_m_per_s", h.light_speed_m_per_s},
              {"tdm_frame_s", h.tdm_frame_s},
              {"gate_fidelity", h.gate_fidelity},
              {"swap_success", h.swap_success},
              {"qc_length_km", h.qc_length_km},
              {"cc_latency_s", h.cc_latency_s},
              {"bsm_intrinsic_success", h.bsm_intrinsic_success}};
}

json topology_json(const TopologyConfig& t) {
  json j{{"kind", t.kind},   {"routers", t.routers}, {"caves", t.caves},
         {"cave_size", t.cave_size}, {"attach", t.attach}, {"seed", t.seed}};
  j["link_km"] = t.link_km ? json(*t.link_km) : json(nullptr);
  return j;
}

json simulation_json(const RunConfig& c) {
  return json{{"topology", topology_json(c.topology)},
              {"flows", c.flows},
              {"flow_seed", c.flow_seed},
              {"memories_per_router", c.memories_per_router},
              {"hardware", hardware_json(c.hardware)},
              {"seed", c.seed},
              {"end_time_ms", c.end_time_ms},
              {"purification", c.features.purification},
              {"stagger", c.features.stagger}};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  RunConfig c;
  Block b(root, "");

  if (const json* t = b.take("topology")) {
    Block tb(*t, "topology");
    tb.text("kind", c.topology.kind);
    tb.uint("routers", c.topology.routers);
    tb.uint("caves", c.topology.caves);
    tb.uint("cave_size", c.topology.cave_size);
    tb.uint("attach", c.topology.attach);
    tb.uint("seed", c.topology.seed);
    if (tb.has("link_km")) {
      double v = 0;
      tb.num("link_km", v);
      positive("topology.link_km", v);
      c.topology.link_km = v;
    }
    tb.finish();
    if (c.topology.kind != "linear" && c.topology.kind != "caveman" && c.topology.kind != "as_like") {
      invalid("topology.kind", "expected linear, caveman or as_like");
    }
  }
  b.text("flows", c.flows);
  if (c.flows != "end_to_end" && c.flows != "random") invalid("flows", "expected end_to_end or random");
  b.uint("flow_seed", c.flow_seed);
  b.uint("memories_per_router", c.memories_per_router);

  if (const json* h = b.take("hardware")) {
    Block hb(*h, "hardware");
    net::HardwareParams& p = c.hardware;
    hb.num("memory_efficiency", p.memory_efficiency);
    hb.num("memory_frequency_hz", p.memory_frequency_hz);
    hb.num("coherence_time_s", p.coherence_time_s);
    hb.num("raw_fidelity", p.raw_fidelity);
    hb.num("detector_efficiency", p.detector_efficiency);
    hb.num("count_rate_hz", p.count_rate_hz);
    hb.num("dark_count_hz", p.dark_count_hz);
    hb.num("resolution_s", p.resolution_s);
    hb.num("attenuation_db_per_km", p.attenuation_db_per_km);
    hb.num("light_speed_m_per_s", p.light_speed_m_per_s);
    hb.num("tdm_frame_s", p.tdm_frame_s);
    hb.num("gate_fidelity", p.gate_fidelity);
    hb.num("swap_success", p.swap_success);
    hb.num("qc_length_km", p.qc_length_km);
    hb.num("cc_latency_s", p.cc_latency_s);
    hb.num("bsm_intrinsic_success", p.bsm_intrinsic_success);
    hb.finish();
    for (auto [name, v] : {std::pair{"memory_efficiency", p.memory_efficiency},
                           {"raw_fidelity", p.raw_fidelity},
                           {"detector_efficiency", p.detector_efficiency},
                           {"gate_fidelity", p.gate_fidelity},
                           {"swap_success", p.swap_success},
                           {"bsm_intrinsic_success", p.bsm_intrinsic_success}}) {
      probability(std::string("hardware.") + name, v);
    }
    for (auto [name, v] : {std::pair{"memory_frequency_hz", p.memory_frequency_hz},
                           {"coherence_time_s", p.coherence_time_s},
                           {"light_speed_m_per_s", p.light_speed_m_per_s},
                           {"qc_length_km", p.qc_length_km},
                           {"cc_latency_s", p.cc_latency_s}}) {
      positive(std::string("hardware.") + name, v);
    }
    for (auto [name, v] : {std::pair{"count_rate_hz", p.count_rate_hz},
                           {"dark_count_hz", p.dark_count_hz},
                           {"resolution_s", p.resolution_s},
                           {"attenuation_db_per_km", p.attenuation_db_per_km},
                           {"tdm_frame_s", p.tdm_frame_s}}) {
      non_negative(std::string("hardware.") + name, v);
    }
  }
  b.uint("seed", c.seed);
  b.num("end_time_ms", c.end_time_ms);
  positive("end_time_ms", c.end_time_ms);
  b.uint("workers", c.workers);
  if (c.workers == 0) invalid("workers", "must be at least 1");

  if (const json* p = b.take("partition")) {
    Block pb(*p, "partition");
    pb.text("method", c.partition.method);
    pb.uint("iterations", c.partition.iterations);
    pb.num("cooling", c.partition.cooling);
    pb.uint("seed", c.partition.seed);
    if (const json* m = pb.take("map")) {
      if (!m->is_array()) invalid("partition.map", "expected an array of worker ids");
      for (std::size_t i = 0; i < m->size(); ++i) {
        if (!(*m)[i].is_number_unsigned()) invalid("partition.map[" + std::to_string(i) + "]", "expected a worker id");
        c.partition.map.push_back((*m)[i].get<std::uint32_t>());
      }
    }
    pb.finish();
    static const std::set<std::string> methods{"blocks", "caveman", "anneal-P1", "anneal-P2", "anneal-P3", "explicit"};
    if (methods.count(c.partition.method) == 0) invalid("partition.method", "unknown method '" + c.partition.method + "'");
    if (c.partition.cooling <= 0 || c.partition.cooling >= 1) invalid("partition.cooling", "must lie in (0, 1)");
  }
  if (b.has("lookahead")) {
    std::string mode;
    b.text("lookahead", mode);
    if (mode != "baseline" && mode != "half_classical") invalid("lookahead", "expected baseline or half_classical");
    c.lookahead = sync::parse_lookahead_mode(mode);
  }
  if (b.has("transport")) {
    std::string t;
    b.text("transport", t);
    if (t != "inhost" && t != "socket") invalid("transport", "expected inhost or socket");
    c.transport = sync::parse_transport(t);
  }
  if (const json* f = b.take("features")) {
    Block fb(*f, "features");
    fb.flag("batching", c.features.batching);
    fb.flag("offload", c.features.offload);
    fb.flag("purification", c.features.purification);
    fb.uint("duplication_factor", c.features.duplication_factor);
    fb.flag("stagger", c.features.stagger);
    fb.flag("verify_pairs", c.features.verify_pairs);
    fb.flag("audit", c.features.audit);
    fb.flag("trace", c.features.trace);
    fb.finish();
    if (c.features.duplication_factor > 8) invalid("features.duplication_factor", "must lie in 0..8");
  }
  if (const json* s = b.take("server")) {
    Block sb(*s, "server");
    sb.text("endpoint", c.server_endpoint);
    sb.finish();
  }
  b.finish();

  // Cross-field checks that need the whole config.
  topo::NetworkSpec spec;
  try {
    spec = build_network(c);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidSize) throw;
    invalid("topology", e.what());
  }
  if (c.partition.method == "explicit") {
    if (c.partition.map.size() != spec.routers) {
      invalid("partition.map", "has " + std::to_string(c.partition.map.size()) + " entries for " +
                                   std::to_string(spec.routers) + " routers");
    }
    for (std::size_t i = 0; i < c.partition.map.size(); ++i) {
      if (c.partition.map[i] >= c.workers) invalid("partition.map[" + std::to_string(i) + "]", "worker out of range");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kParseError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  json j = simulation_json(c);
  j.erase("purification");
  j.erase("stagger");
  j["workers"] = c.workers;
  j["partition"] = json{{"method", c.partition.method},
                        {"iterations", c.partition.iterations},
                        {"cooling", c.partition.cooling},
                        {"seed", c.partition.seed},
                        {"map", c.partition.map}};
  j["lookahead"] = std::string(sync::to_string(c.lookahead));
  j["transport"] = std::string(sync::to_string(c.transport));
  j["features"] = json{{"batching", c.features.batching},
                       {"offload", c.features.offload},
                       {"purification", c.features.purification},
                       {"duplication_factor", c.features.duplication_factor},
                       {"stagger", c.features.stagger},
                       {"verify_pairs", c.features.verify_pairs},
                       {"audit", c.features.audit},
                       {"trace", c.features.trace}};
  j["server"] = json{{"endpoint", c.server_endpoint}};
  if (!c.topology.link_km) j["topology"].erase("link_km");
  return j.dump(2);
}

std::string config_hash(const RunConfig& c) {
  const std::string text = simulation_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

topo::NetworkSpec build_network(const RunConfig& c) {
  const double km = c.topology.link_km.value_or(c.hardware.qc_length_km);
  topo::NetworkSpec spec;
  if (c.topology.kind == "linear") {
    spec = topo::gen_linear(c.topology.routers, km);
  } else if (c.topology.kind == "caveman") {
    spec = topo::gen_caveman(c.topology.caves, c.topology.cave_size, km);
  } else {
    spec = topo::gen_as_like(c.topology.routers, c.topology.seed, c.topology.attach, km);
  }
  spec.flows = c.flows == "end_to_end" ? topo::end_to_end_flow(spec) : topo::gen_flows(spec, c.flow_seed);
  spec.memories_per_router = c.memories_per_router;
  return spec;
}

topo::PartitionMap build_partition(const RunConfig& c, const topo::NetworkSpec& spec) {
  const std::string& m = c.partition.method;
  if (m == "blocks") return topo::partition_blocks(spec, c.workers);
  if (m == "caveman") return topo::partition_caveman(spec, c.workers);
  if (m == "explicit") return topo::PartitionMap{c.workers, c.partition.map};
  topo::AnnealConfig a;
  a.iterations = c.partition.iterations;
  a.cooling = c.partition.cooling;
  a.seed = c.partition.seed;
  a.energy = m == "anneal-P1" ? topo::Energy::kP1 : m == "anneal-P2" ? topo::Energy::kP2 : topo::Energy::kP3;
  return topo::anneal_partition(spec, c.workers, a).best;
}

}  // namespace qpdes::bench
