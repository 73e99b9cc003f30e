#pragma once

// Deterministic packet-at-a-time walk over a static topology of edge
// routers, NFV nodes and plain IPv6 routers.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "srv6sfc/chain.hpp"
#include "srv6sfc/dataplane.hpp"
#include "srv6sfc/error.hpp"
#include "srv6sfc/wire.hpp"

namespace srv6sfc {

enum class NodeRole { IngressEdge, EgressEdge, NfvNode, PlainRouter };

std::string_view to_string(NodeRole r);
std::optional<NodeRole> parse_node_role(std::string_view s);

// ---- declarative description ------------------------------------------------

struct NodeSpec {
  std::string id;
  NodeRole role = NodeRole::PlainRouter;
  std::vector<Ipv6Address> addresses;
};

struct RouteSpec {
  std::string node;
  Prefix prefix;
  std::string next_hop;
};

struct RuleSpec {
  std::string node;
  ClassifierRule rule;
};

struct ChainSpec {
  VnfChain chain;
  std::string peer;  // westbound partner of an eastbound chain
};

struct NetworkSpec {
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<RouteSpec> routes;
  std::vector<Vnf> vnfs;
  std::vector<Sid> sids;
  std::vector<ChainSpec> chains;
  std::vector<RuleSpec> rules;
  UnitCosts units;
};

struct Diagnostic {
  Errc code;
  std::string message;
};

/// Every problem in the description, in a stable order.
std::vector<Diagnostic> validate_network(const NetworkSpec& spec);

// ---- built network ------------------------------------------------------------------

struct Node {
  std::string node_id;
  NodeRole role = NodeRole::PlainRouter;
  std::vector<Ipv6Address> addresses;
  std::vector<ClassifierRule> rules;
  PrefixTable<std::string> routes;
  NfvNode nfv;  // hosted VNFs; registry points at the network's registry

  bool has_address(const Ipv6Address& a) const;
};

class Network {
 public:
  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const Node& node(const std::string& id) const;
  const std::set<std::pair<std::string, std::string>>& links() const { return links_; }
  const ChainRegistry& registry() const { return *registry_; }
  const UnitCosts& units() const { return units_; }
  bool linked(const std::string& a, const std::string& b) const;

 private:
  friend Network build_network(const NetworkSpec& spec);

  std::map<std::string, Node> nodes_;
  std::set<std::pair<std::string, std::string>> links_;  // (min, max)
  std::shared_ptr<ChainRegistry> registry_ = std::make_shared<ChainRegistry>();
  UnitCosts units_;
};

/// Throws the first diagnostic of validate_network.
Network build_network(const NetworkSpec& spec);

// ---- walking packets ---------------------------------------------------------------------

enum class TraceLevel { Terminal, Full, FullWithPackets };

struct TraceEvent {
  std::uint64_t uid = 0;
  std::string node;
  EventKind kind = EventKind::Forwarded;
  std::string detail;
  std::optional<Packet> snapshot;
};

struct InjectResult {
  bool delivered = false;
  std::string node;    // where the packet terminated
  std::string reason;  // drop reason, empty when delivered
  Packet final_packet;
  std::vector<TraceEvent> trace;
  std::map<std::string, OpCounts> costs;  // per node that did work
};

inline constexpr int kMaxHops = 64;

InjectResult inject(const Network& net, const std::string& ingress, const Packet& inner,
                    TraceLevel level = TraceLevel::Full);

struct FlowSpec {
  std::string ingress;
  Ipv6Address src;
  Ipv6Address dst;
  std::size_t payload_size = 1024;
  std::uint64_t count = 1;
  std::uint64_t first_uid = 1;
};

struct FlowSummary {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::map<std::string, std::uint64_t> drop_reasons;
  std::map<std::string, CostLedger> ledgers;
  std::vector<TraceEvent> trace;

  /// All node ledgers merged.
  CostLedger total() const;
};

using FlowObserver = std::function<void(const Packet& injected, const InjectResult&)>;

FlowSummary run_flow(const Network& net, const FlowSpec& flow,
                     TraceLevel level = TraceLevel::Terminal, bool keep_records = true,
                     const FlowObserver& observer = {});

/// One JSON object per line: uid, node, event, detail.
std::string trace_json_line(const TraceEvent& e);

}  // namespace srv6sfc
