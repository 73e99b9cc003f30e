#include "srv6sfc/sim.hpp"

#include <algorithm>
#include <json.hpp>

namespace srv6sfc {

std::string_view to_string(NodeRole r) {
  switch (r) {
    case NodeRole::IngressEdge: return "ingress";
    case NodeRole::EgressEdge: return "egress";
    case NodeRole::NfvNode: return "nfv";
    case NodeRole::PlainRouter: return "router";
  }
  return "?";
}

std::optional<NodeRole> parse_node_role(std::string_view s) {
  if (s == "ingress") return NodeRole::IngressEdge;
  if (s == "egress") return NodeRole::EgressEdge;
  if (s == "nfv") return NodeRole::NfvNode;
  if (s == "router") return NodeRole::PlainRouter;
  return std::nullopt;
}

namespace {

std::pair<std::string, std::string> link_key(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

std::vector<Diagnostic> validate_network(const NetworkSpec& spec) {
  std::vector<Diagnostic> out;
  auto fail = [&](Errc c, std::string m) { out.push_back({c, std::move(m)}); };

  if (spec.nodes.empty()) fail(Errc::EmptyNetwork, "no nodes defined");
  std::map<std::string, const NodeSpec*> nodes;
  for (const auto& n : spec.nodes) {
    if (!nodes.emplace(n.id, &n).second) fail(Errc::ValidationError, "node " + n.id + " defined twice");
  }
  auto known = [&](const std::string& id, const std::string& where) {
    if (nodes.contains(id)) return true;
    fail(Errc::UnknownNodeRef, where + " references unknown node " + id);
    return false;
  };

  std::set<std::pair<std::string, std::string>> links;
  for (const auto& [a, b] : spec.links) {
    const bool ok = known(a, "link") & known(b, "link");
    if (ok && a == b) fail(Errc::ValidationError, "link " + a + " to itself");
    if (ok) links.insert(link_key(a, b));
  }
  for (const auto& r : spec.routes) {
    if (!known(r.node, "route") || !known(r.next_hop, "route on " + r.node)) continue;
    if (!links.contains(link_key(r.node, r.next_hop))) {
      fail(Errc::UnreachableNextHop,
           "route " + r.prefix.to_string() + " on " + r.node + " via unlinked " + r.next_hop);
    }
  }

  std::map<std::string, const Vnf*> vnfs;
  for (const auto& v : spec.vnfs) {
    if (!vnfs.emplace(v.name, &v).second) fail(Errc::ValidationError, "VNF " + v.name + " defined twice");
    if (known(v.host_node, "VNF " + v.name) && nodes[v.host_node]->role != NodeRole::NfvNode) {
      fail(Errc::ValidationError, "VNF " + v.name + " hosted on non-NFV node " + v.host_node);
    }
    if (!v.behavior) fail(Errc::ValidationError, "VNF " + v.name + " has no behaviour");
  }

  ChainRegistry registry;
  std::set<Ipv6Address> sid_addrs;
  for (const auto& s : spec.sids) {
    const std::string name = "SID " + s.address.to_string();
    if (!sid_addrs.insert(s.address).second) {
      fail(Errc::ValidationError, name + " defined twice");
      continue;
    }
    known(s.host_node, name);
    if (s.kind == SidKind::EgressEndpoint) {
      if (!s.vnf.empty()) fail(Errc::ValidationError, name + " is an egress endpoint with a VNF");
    } else {
      auto it = vnfs.find(s.vnf);
      if (it == vnfs.end()) {
        fail(Errc::ValidationError, name + " references unknown VNF '" + s.vnf + "'");
      } else if (it->second->host_node != s.host_node) {
        fail(Errc::ValidationError, name + " is on " + s.host_node + " but VNF " + s.vnf +
                                        " runs on " + it->second->host_node);
      }
    }
    registry.add_sid(s);
  }

  std::map<std::string, const ChainSpec*> by_id;
  for (const auto& c : spec.chains) by_id.emplace(c.chain.chain_id, &c);
  std::set<std::string> chain_ids;
  for (const auto& c : spec.chains) {
    if (!chain_ids.insert(c.chain.chain_id).second) {
      fail(Errc::ValidationError, "chain " + c.chain.chain_id + " defined twice");
      continue;
    }
    try {
      if (c.peer.empty() || c.chain.direction != Direction::Eastbound) {
        registry.register_chain(c.chain);
        continue;
      }
      auto peer = by_id.find(c.peer);
      if (peer == by_id.end()) {
        fail(Errc::ValidationError, "chain " + c.chain.chain_id + " pairs with unknown " + c.peer);
        continue;
      }
      registry.register_bidirectional(c.chain, peer->second->chain);
    } catch (const Error& e) {
      fail(e.code(), "chain " + c.chain.chain_id + ": " + e.what());
    }
  }

  for (const auto& r : spec.rules) {
    if (known(r.node, "rule") && nodes[r.node]->role != NodeRole::IngressEdge) {
      fail(Errc::ValidationError, "classifier rule on non-ingress node " + r.node);
    }
    if (!by_id.contains(r.rule.chain_id)) {
      fail(Errc::ValidationError, "rule " + r.rule.dst_prefix.to_string() +
                                      " references unknown chain " + r.rule.chain_id);
    }
  }
  return out;
}

bool Node::has_address(const Ipv6Address& a) const {
  return std::find(addresses.begin(), addresses.end(), a) != addresses.end();
}

const Node& Network::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::UnknownNodeRef, id);
  return it->second;
}

bool Network::linked(const std::string& a, const std::string& b) const {
  return links_.contains(link_key(a, b));
}

Network build_network(const NetworkSpec& spec) {
  if (auto problems = validate_network(spec); !problems.empty()) {
    throw Error(problems.front().code, problems.front().message);
  }
  Network net;
  net.units_ = spec.units;
  for (const auto& n : spec.nodes) {
    Node node;
    node.node_id = n.id;
    node.role = n.role;
    node.addresses = n.addresses;
    node.nfv.node_id = n.id;
    node.nfv.registry = net.registry_.get();
    net.nodes_.emplace(n.id, std::move(node));
  }
  for (const auto& [a, b] : spec.links) net.links_.insert(link_key(a, b));
  for (const auto& r : spec.routes) net.nodes_.at(r.node).routes.add(r.prefix, r.next_hop);
  for (const auto& v : spec.vnfs) net.nodes_.at(v.host_node).nfv.vnfs[v.name] = v;
  for (const auto& s : spec.sids) net.registry_->add_sid(s);
  std::map<std::string, const ChainSpec*> by_id;
  for (const auto& c : spec.chains) by_id.emplace(c.chain.chain_id, &c);
  for (const auto& c : spec.chains) {
    if (c.peer.empty() || c.chain.direction != Direction::Eastbound) {
      net.registry_->register_chain(c.chain);
    } else {
      net.registry_->register_bidirectional(c.chain, by_id.at(c.peer)->chain);
    }
  }
  for (const auto& r : spec.rules) net.nodes_.at(r.node).rules.push_back(r.rule);
  return net;
}

// ---- walking -------------------------------------------------------------------------

namespace {

class Walk {
 public:
  Walk(const Network& net, TraceLevel level) : net_(net), level_(level) {}

  InjectResult run(const std::string& ingress, Packet p);

 private:
  void event(const std::string& node, EventKind k, std::string detail, const Packet& p) {
    const bool terminal = k == EventKind::Delivered || k == EventKind::Dropped;
    if (level_ == TraceLevel::Terminal && !terminal) return;
    TraceEvent e{p.uid, node, k, std::move(detail), std::nullopt};
    if (level_ == TraceLevel::FullWithPackets) e.snapshot = p;
    result_.trace.push_back(std::move(e));
  }
  InjectResult drop(const std::string& node, Errc why, std::string detail, const Packet& p) {
    return drop(node, std::string(to_string(why)), std::move(detail), p);
  }
  InjectResult drop(const std::string& node, std::string why, std::string detail, const Packet& p) {
    result_.node = node;
    result_.reason = std::move(why);
    result_.final_packet = p;
    event(node, EventKind::Dropped, result_.reason + (detail.empty() ? "" : ": " + detail), p);
    return std::move(result_);
  }
  static bool charges_forwarding(const Node& n) {
    return n.role == NodeRole::NfvNode || n.role == NodeRole::PlainRouter;
  }

  const Network& net_;
  TraceLevel level_;
  InjectResult result_;
};

InjectResult Walk::run(const std::string& ingress, Packet p) {
  const Node* at = &net_.node(ingress);
  const ChainRegistry& reg = net_.registry();

  if (auto chain_id = classify(at->rules, p.header.dst)) {
    event(at->node_id, EventKind::Classified, *chain_id, p);
    p = encapsulate(p, reg.chain(*chain_id));
    event(at->node_id, EventKind::Encapsulated, p.header.dst.to_string(), p);
  }

  int hops = 0;
  for (int local_steps = 0;; ++local_steps) {
    if (local_steps > 4 * kMaxHops) {
      return drop(at->node_id, Errc::RoutingLoop, "too many local steps", p);
    }
    const Ipv6Address dst = p.header.dst;
    bool forward_charged = false;

    if (at->nfv.local_vnf(dst)) {
      if (!p.srh) return drop(at->node_id, Errc::NoSrh, "plain packet to SID " + dst.to_string(), p);
      ConnectorResult r;
      try {
        r = connector_process(at->nfv, p, level_ == TraceLevel::FullWithPackets);
      } catch (const Error& e) {
        return drop(at->node_id, e.code(), e.what(), p);
      }
      for (auto& e : r.events) {
        if (level_ == TraceLevel::Terminal) break;
        TraceEvent te{p.uid, at->node_id, e.kind, std::move(e.detail), std::move(e.snapshot)};
        result_.trace.push_back(std::move(te));
      }
      result_.costs[at->node_id] += r.ops;
      if (r.outputs.empty()) return drop(at->node_id, "VnfDrop", r.dropped_by, p);
      p = std::move(r.outputs.front());
      forward_charged = true;
    } else if (at->has_address(dst) || (reg.find_sid(dst) && reg.sid(dst).host_node == at->node_id)) {
      if (p.srh && p.srh->segments_left > 0) {
        p = advance_segment(p);
        event(at->node_id, EventKind::SegmentAdvanced, p.header.dst.to_string(), p);
        continue;
      }
      if (p.is_encapsulated()) {
        p = egress_process(p);
        event(at->node_id, EventKind::Decapsulated, p.header.dst.to_string(), p);
        continue;
      }
      result_.delivered = true;
      result_.node = at->node_id;
      result_.final_packet = p;
      event(at->node_id, EventKind::Delivered, dst.to_string(), p);
      return std::move(result_);
    }

    const std::string* next = at->routes.lookup(p.header.dst);
    if (!next) return drop(at->node_id, Errc::NoRoute, p.header.dst.to_string(), p);
    if (++hops > kMaxHops || p.header.hop_limit <= 1) {
      return drop(at->node_id, Errc::RoutingLoop, "hop limit exhausted", p);
    }
    --p.header.hop_limit;
    if (!forward_charged && charges_forwarding(*at)) ++result_.costs[at->node_id].f;
    event(at->node_id, EventKind::Forwarded, *next, p);
    at = &net_.node(*next);
  }
}

}  // namespace

InjectResult inject(const Network& net, const std::string& ingress, const Packet& inner,
                    TraceLevel level) {
  return Walk(net, level).run(ingress, inner);
}

CostLedger FlowSummary::total() const {
  CostLedger sum(ledgers.empty() ? UnitCosts{} : ledgers.begin()->second.units());
  for (const auto& [node, l] : ledgers) sum.merge(l);
  return sum;
}

FlowSummary run_flow(const Network& net, const FlowSpec& flow, TraceLevel level,
                     bool keep_records, const FlowObserver& observer) {
  if (flow.count == 0) throw Error(Errc::BadArgument, "flow packet count must be >= 1");
  net.node(flow.ingress);
  FlowSummary s;
  for (std::uint64_t i = 0; i < flow.count; ++i) {
    const Packet in = make_udp_packet(flow.src, flow.dst, flow.payload_size, flow.first_uid + i);
    InjectResult r = inject(net, flow.ingress, in, level);
    ++s.injected;
    if (r.delivered) {
      ++s.delivered;
    } else {
      ++s.dropped;
      ++s.drop_reasons[r.reason];
    }
    for (const auto& [node, ops] : r.costs) {
      auto it = s.ledgers.try_emplace(node, net.units(), keep_records).first;
      it->second.record(in.uid, ops);
    }
    if (observer) observer(in, r);
    std::move(r.trace.begin(), r.trace.end(), std::back_inserter(s.trace));
  }
  return s;
}

std::string trace_json_line(const TraceEvent& e) {
  nlohmann::ordered_json j;
  j["uid"] = e.uid;
  j["node"] = e.node;
  j["event"] = std::string(to_string(e.kind));
  j["detail"] = e.detail;
  return j.dump();
}

}  // namespace srv6sfc
