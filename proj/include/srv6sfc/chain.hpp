#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srv6sfc/wire.hpp"

namespace srv6sfc {

enum class SidKind { SrAware, SrUnaware, EgressEndpoint };
/// Which VNF interface the traffic addressed to a SID leaves from.
enum class Interface { Single, West, East };
enum class Direction { Unidirectional, Eastbound, Westbound };

std::string_view to_string(SidKind k);
std::string_view to_string(Interface i);
std::string_view to_string(Direction d);
std::optional<SidKind> parse_sid_kind(std::string_view s);
std::optional<Interface> parse_interface(std::string_view s);
std::optional<Direction> parse_direction(std::string_view s);

struct Sid {
  Ipv6Address address;
  SidKind kind = SidKind::SrUnaware;
  std::string host_node;
  Interface interface = Interface::Single;
  std::string vnf;  // VNF instance behind this SID; empty for egress endpoints

  bool operator==(const Sid&) const = default;
};

/// A rendered service path. `segments` is in forward order and ends with
/// the egress edge router.
struct VnfChain {
  std::string chain_id;
  std::vector<Ipv6Address> segments;
  Ipv6Address ingress_source;
  Direction direction = Direction::Unidirectional;

  bool operator==(const VnfChain&) const = default;
};

struct Prefix {
  Ipv6Address address;  // host bits cleared
  int length = 128;

  /// "DDDD::/64", "DDDD::2/64" (host bits are masked) or a bare address.
  static Prefix parse(std::string_view text);
  static Prefix make(const Ipv6Address& a, int length);
  bool contains(const Ipv6Address& a) const;
  std::string to_string() const;

  bool operator==(const Prefix&) const = default;
};

/// Longest-prefix match; equal lengths resolve to the earliest insertion.
template <typename T>
class PrefixTable {
 public:
  struct Entry {
    Prefix prefix;
    T value;
  };

  void add(const Prefix& prefix, T value) { entries_.push_back({prefix, std::move(value)}); }

  const T* lookup(const Ipv6Address& a) const {
    const Entry* best = nullptr;
    for (const auto& e : entries_) {
      if (e.prefix.contains(a) && (!best || e.prefix.length > best->prefix.length)) best = &e;
    }
    return best ? &best->value : nullptr;
  }

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

struct ClassifierRule {
  Prefix dst_prefix;
  std::string chain_id;

  bool operator==(const ClassifierRule&) const = default;
};

std::optional<std::string> classify(const std::vector<ClassifierRule>& rules,
                                    const Ipv6Address& dst);

Ipv6Address next_after(const VnfChain& chain, const Ipv6Address& sid);

/// Chains, SIDs, and the (SID, interface) -> chain map that makes
/// stateless SR-unaware re-encapsulation possible. Mutators give the strong
/// exception guarantee.
class ChainRegistry {
 public:
  using MappingKey = std::pair<Ipv6Address, Interface>;

  void add_sid(const Sid& sid);
  const Sid* find_sid(const Ipv6Address& a) const;
  const Sid& sid(const Ipv6Address& a) const;

  void register_chain(const VnfChain& chain);
  void register_bidirectional(const VnfChain& east, const VnfChain& west);
  void unregister_chain(const std::string& chain_id);

  const VnfChain* find_chain(const std::string& id) const;
  const VnfChain& chain(const std::string& id) const;
  /// Chain owning the traffic that leaves `sid` through its interface.
  const VnfChain* mapped_chain(const Ipv6Address& sid) const;

  const std::map<std::string, VnfChain>& chains() const { return chains_; }
  const std::map<Ipv6Address, Sid>& sids() const { return sids_; }
  const std::map<MappingKey, std::string>& mapping() const { return mapping_; }

 private:
  void check_chain(const VnfChain& chain) const;
  void insert_chain(const VnfChain& chain);

  std::map<std::string, VnfChain> chains_;
  std::map<Ipv6Address, Sid> sids_;
  std::map<MappingKey, std::string> mapping_;
};

}  // namespace srv6sfc
