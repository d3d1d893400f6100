#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpdes/net/params.hpp"
#include "qpdes/sync/engine.hpp"
#include "qpdes/sync/lookahead.hpp"
#include "qpdes/topo/partition.hpp"

namespace qpdes::bench {

struct TopologyConfig {
  std::string kind = "linear";  // linear | caveman | as_like
  std::size_t routers = 16;     // linear, as_like
  std::size_t caves = 4;        // caveman
  std::size_t cave_size = 4;    // caveman
  std::size_t attach = 2;       // as_like
  std::uint64_t seed = 0;       // as_like
  /// Unset: hardware.qc_length_km.
  std::optional<double> link_km;
};

struct PartitionConfig {
  /// blocks | caveman | anneal-P1 | anneal-P2 | anneal-P3 | explicit
  std::string method = "blocks";
  std::size_t iterations = 10000;
  double cooling = 0.995;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> map;  // explicit
};

struct Features {
  bool batching = true;
  bool offload = true;
  bool purification = false;
  unsigned duplication_factor = 0;
  bool stagger = true;
  bool verify_pairs = false;
  bool audit = false;
  bool trace = false;
};

struct RunConfig {
  TopologyConfig topology;
  std::string flows = "end_to_end";  // end_to_end | random
  std::uint64_t flow_seed = 0;
  std::size_t memories_per_router = 0;
  net::HardwareParams hardware;
  std::uint64_t seed = 0;
  double end_time_ms = 100.0;
  std::size_t workers = 1;
  PartitionConfig partition;
  sync::LookaheadMode lookahead = sync::LookaheadMode::kHalfClassical;
  sync::TransportKind transport = sync::TransportKind::kInHost;
  Features features;
  std::string server_endpoint = "tcp://127.0.0.1:0";

  SimTime end_time() const { return SimTime::from_seconds(end_time_ms * 1e-3); }
};

/// Parses JSON text. ParseError for malformed text; ValidationError naming
/// the field path for unknown keys, wrong types or out-of-range values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON of every field (defaults filled in).
std::string to_json(const RunConfig& c);
/// Hash over the fields that decide simulation results. Worker count,
/// partition, lookahead, transport, server endpoint and the diagnostic
/// features (batching, offload, duplication, audit, trace, verify) are
/// excluded: runs that differ only there must produce the same results.
std::string config_hash(const RunConfig& c);

/// Network (routers, links, flows) the config describes.
topo::NetworkSpec build_network(const RunConfig& c);
topo::PartitionMap build_partition(const RunConfig& c, const topo::NetworkSpec& spec);

}  // namespace qpdes::bench
