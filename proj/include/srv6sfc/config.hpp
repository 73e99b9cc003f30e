#pragma once

// Line-oriented sectioned scenario files. Grammar in docs/config-format.md.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "srv6sfc/bench.hpp"
#include "srv6sfc/sim.hpp"

namespace srv6sfc {

struct BenchSettings {
  CapacityModel model;
  double hook_overhead = 0.0;  // extra k0 percent in the SR-unaware scenario
  std::vector<double> rates_pps = {1000, 3000, 6000, 9000, 12000, 13000};
  int runs = 30;
  double noise = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t probe_packets = 100;
  std::size_t payload = 1024;
  // default flow for run, trace and bench
  std::string ingress;
  Ipv6Address src;
  Ipv6Address dst;

  FlowSpec flow(std::uint64_t count) const { return {ingress, src, dst, payload, count, 1}; }
};

struct ScenarioConfig {
  NetworkSpec network;
  BenchSettings bench;
};

/// Parse and validation failures, all of them.
class ConfigError : public Error {
 public:
  ConfigError(Errc code, std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// `origin` prefixes ParseError locations ("file:line:col").
ScenarioConfig parse_config(std::string_view text, const std::string& origin = "<config>");
ScenarioConfig load_config(const std::string& path);

std::string serialize_config(const ScenarioConfig& cfg);
void save_config(const ScenarioConfig& cfg, const std::string& path);

/// "passthrough", "filter P", "stamp N", "edit next|at N|replace SIDS".
std::shared_ptr<const VnfBehavior> parse_behavior(std::string_view text);

struct RouteAddResult {
  bool changed = false;
  std::string chain_id;
  std::string fragment;  // the [chains]/[rules] lines now in effect
};

/// `args` after "route add": PREFIX via NEXTHOP encap seg SIDS, or the
/// Linux spelling with "encap seg6 mode encap segs SIDS". `node` may be empty
/// when the config has exactly one ingress edge router.
RouteAddResult cmd_route_add(ScenarioConfig& cfg, const std::string& node,
                             const std::vector<std::string>& args);

}  // namespace srv6sfc
