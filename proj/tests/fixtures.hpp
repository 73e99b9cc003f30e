#pragma once

// Programmatic copy of the three-node testbed: ER1 -- NFV -- ER2.

#include <memory>
#include <string>
#include <vector>

#include "srv6sfc/sim.hpp"

namespace fixtures {

using namespace srv6sfc;

inline Ipv6Address addr(const std::string& s) { return Ipv6Address::parse(s); }

inline NetworkSpec testbed(SidKind kind = SidKind::SrUnaware, int n = 1,
                           std::vector<std::shared_ptr<const VnfBehavior>> behaviors = {}) {
  NetworkSpec s;
  s.nodes = {{"ER1", NodeRole::IngressEdge, {addr("AAAA::2"), addr("EEEE::2")}},
             {"NFV", NodeRole::NfvNode, {addr("AAAA::1"), addr("CCCC::1"), addr("BBBB::1")}},
             {"ER2", NodeRole::EgressEdge, {addr("CCCC::2"), addr("DDDD::2")}}};
  s.links = {{"ER1", "NFV"}, {"NFV", "ER2"}};
  s.routes = {{"ER1", Prefix::parse("::/0"), "NFV"},
              {"NFV", Prefix::parse("CCCC::/64"), "ER2"},
              {"NFV", Prefix::parse("DDDD::/64"), "ER2"},
              {"NFV", Prefix::parse("AAAA::/64"), "ER1"},
              {"NFV", Prefix::parse("EEEE::/64"), "ER1"},
              {"ER2", Prefix::parse("::/0"), "NFV"}};
  VnfChain chain{"c1", {}, addr("AAAA::2"), Direction::Unidirectional};
  for (int i = 0; i < n; ++i) {
    const std::string name = "v" + std::to_string(i + 1);
    auto b = i < static_cast<int>(behaviors.size()) ? behaviors[i]
                                                    : std::make_shared<PassThroughRouter>();
    s.vnfs.push_back(Vnf{name, "NFV", VnfPermission::InsertNextOnly, b});
    const Ipv6Address sid = addr("BBBB::" + std::to_string(i + 2));
    s.sids.push_back(Sid{sid, kind, "NFV", Interface::Single, name});
    chain.segments.push_back(sid);
  }
  s.sids.push_back(Sid{addr("CCCC::2"), SidKind::EgressEndpoint, "ER2", Interface::Single, ""});
  chain.segments.push_back(addr("CCCC::2"));
  s.chains.push_back({chain, ""});
  s.rules.push_back({"ER1", {Prefix::parse("DDDD::/64"), "c1"}});
  return s;
}

inline FlowSpec testbed_flow(std::uint64_t count, std::size_t size = 64) {
  return FlowSpec{"ER1", addr("EEEE::2"), addr("DDDD::2"), size, count, 1};
}

}  // namespace fixtures
