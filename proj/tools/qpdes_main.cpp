// Command-line front end: run a configuration, print its partition, or
// compare a run against a one-worker baseline.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpdes/bench/config.hpp"
#include "qpdes/bench/runner.hpp"
#include "qpdes/core/error.hpp"
#include "qpdes/topo/partition.hpp"

namespace {

using nlohmann::json;
using namespace qpdes;

struct RunOverrides {
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> partition;
  std::optional<std::string> lookahead;
  std::optional<std::string> transport;
  std::optional<unsigned> dup_factor;
  bool no_batching = false;
  bool no_offload = false;
  bool audit = false;
  bool trace = false;
};

/// Applies overrides on the JSON form so they go through the same validation
/// as the file.
bench::RunConfig apply(const bench::RunConfig& base, const RunOverrides& o) {
  json j = json::parse(bench::to_json(base));
  if (o.workers) j["workers"] = *o.workers;
  if (o.seed) j["seed"] = *o.seed;
  if (o.partition) j["partition"]["method"] = *o.partition;
  if (o.lookahead) j["lookahead"] = *o.lookahead;
  if (o.transport) j["transport"] = *o.transport;
  if (o.dup_factor) j["features"]["duplication_factor"] = *o.dup_factor;
  if (o.no_batching) j["features"]["batching"] = false;
  if (o.no_offload) j["features"]["offload"] = false;
  if (o.audit) j["features"]["audit"] = true;
  if (o.trace) j["features"]["trace"] = true;
  return bench::parse_config(j.dump());
}

void print_summary(const bench::RunReport& r) {
  std::printf("workers %zu  windows %llu  events %llu  delivered %llu  wall %.3f s\n", r.workers,
              static_cast<unsigned long long>(r.windows), static_cast<unsigned long long>(r.executed_events),
              static_cast<unsigned long long>(r.metrics.delivered()), r.wall_seconds);
  std::printf("lookahead %s  window %lld ps  server messages %llu  local requests %.3f\n", r.lookahead_mode.c_str(),
              static_cast<long long>(r.window_ps), static_cast<unsigned long long>(r.messages_to_server()),
              r.local_request_fraction());
  if (r.audit_passes > 0) {
    std::printf("audit %llu passes, %llu violations\n", static_cast<unsigned long long>(r.audit_passes),
                static_cast<unsigned long long>(r.audit_violations));
    for (const std::string& s : r.audit_samples) std::printf("  %s\n", s.c_str());
  }
  if (r.speedup) std::printf("speedup %.3f  efficiency %.3f\n", *r.speedup, *r.efficiency);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel discrete-event quantum network simulator"};
  app.require_subcommand(1);

  std::string config_path;
  RunOverrides o;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run a configuration and write a report");
  run->add_option("config", config_path, "JSON configuration file")->required();
  run->add_option("--workers", o.workers, "Worker count");
  run->add_option("--seed", o.seed, "Global seed");
  run->add_option("--partition", o.partition, "blocks | caveman | anneal-P1 | anneal-P2 | anneal-P3 | explicit");
  run->add_option("--lookahead", o.lookahead, "baseline | half_classical");
  run->add_option("--transport", o.transport, "inhost | socket");
  run->add_option("--dup-factor", o.dup_factor, "Extra copies of each exchanged event (0..8)");
  run->add_flag("--no-batching", o.no_batching, "Send every QSM request on its own");
  run->add_flag("--no-offload", o.no_offload, "Keep measured keys on the server");
  run->add_flag("--audit", o.audit, "Check state ownership after every window");
  run->add_flag("--trace", o.trace, "Record the event trace and report its digest");
  run->add_option("--out", out_dir, "Report directory");

  std::string part_config;
  std::optional<std::size_t> part_workers;
  std::optional<std::string> part_method;
  auto* part = app.add_subcommand("partition", "Print the partition map a configuration produces");
  part->add_option("config", part_config, "JSON configuration file")->required();
  part->add_option("--workers", part_workers, "Worker count");
  part->add_option("--partition", part_method, "Partition method");

  std::string report_dir;
  std::string baseline_dir;
  auto* report = app.add_subcommand("report", "Compare a run with a one-worker baseline");
  report->add_option("dir", report_dir, "Report directory of the run")->required();
  report->add_option("--baseline", baseline_dir, "Report directory of the baseline")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const bench::RunConfig cfg = apply(bench::load_config(config_path), o);
      bench::RunReport r = bench::run(cfg);
      print_summary(r);
      if (!out_dir.empty()) bench::write_report(r, out_dir);
      return r.audit_violations == 0 ? 0 : 3;
    }
    if (*part) {
      RunOverrides po;
      po.workers = part_workers;
      po.partition = part_method;
      const bench::RunConfig cfg = apply(bench::load_config(part_config), po);
      const topo::NetworkSpec spec = bench::build_network(cfg);
      const topo::PartitionMap pmap = bench::build_partition(cfg, spec);
      json j = {{"workers", pmap.workers},
                {"method", cfg.partition.method},
                {"map", pmap.owner},
                {"block_sizes", pmap.block_sizes()},
                {"P1", topo::energy(spec, pmap, topo::Energy::kP1)},
                {"P2", topo::energy(spec, pmap, topo::Energy::kP2)},
                {"P3", topo::energy(spec, pmap, topo::Energy::kP3)}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*report) {
      bench::RunReport r = bench::read_report(report_dir);
      const bench::RunReport base = bench::read_report(baseline_dir);
      bench::compare(r, base);
      bench::write_report(r, report_dir);
      print_summary(r);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
