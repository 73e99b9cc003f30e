#include "srv6sfc/chain.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "srv6sfc/error.hpp"

namespace srv6sfc {

std::string_view to_string(SidKind k) {
  switch (k) {
    case SidKind::SrAware: return "aware";
    case SidKind::SrUnaware: return "unaware";
    case SidKind::EgressEndpoint: return "egress";
  }
  return "?";
}

std::string_view to_string(Interface i) {
  switch (i) {
    case Interface::Single: return "single";
    case Interface::West: return "west";
    case Interface::East: return "east";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Unidirectional: return "unidirectional";
    case Direction::Eastbound: return "eastbound";
    case Direction::Westbound: return "westbound";
  }
  return "?";
}

std::optional<SidKind> parse_sid_kind(std::string_view s) {
  if (s == "aware") return SidKind::SrAware;
  if (s == "unaware") return SidKind::SrUnaware;
  if (s == "egress") return SidKind::EgressEndpoint;
  return std::nullopt;
}

std::optional<Interface> parse_interface(std::string_view s) {
  if (s == "single") return Interface::Single;
  if (s == "west") return Interface::West;
  if (s == "east") return Interface::East;
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "unidirectional") return Direction::Unidirectional;
  if (s == "eastbound") return Direction::Eastbound;
  if (s == "westbound") return Direction::Westbound;
  return std::nullopt;
}

Prefix Prefix::make(const Ipv6Address& a, int length) {
  if (length < 0 || length > 128) {
    throw Error(Errc::BadPrefix, "prefix length " + std::to_string(length));
  }
  Ipv6Address::Octets o = a.octets();
  for (int i = 0; i < 16; ++i) {
    const int keep = std::clamp(length - 8 * i, 0, 8);
    o[i] &= static_cast<std::uint8_t>(0xff00 >> keep);
  }
  return Prefix{Ipv6Address(o), length};
}

Prefix Prefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  const auto addr = Ipv6Address::try_parse(text.substr(0, slash));
  if (!addr) throw Error(Errc::BadPrefix, std::string(text));
  int length = 128;
  if (slash != std::string_view::npos) {
    const auto len = text.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), length);
    if (ec != std::errc{} || ptr != len.data() + len.size() || len.empty()) {
      throw Error(Errc::BadPrefix, std::string(text));
    }
  }
  return make(*addr, length);
}

bool Prefix::contains(const Ipv6Address& a) const {
  return make(a, length).address == address;
}

std::string Prefix::to_string() const {
  return address.to_string() + "/" + std::to_string(length);
}

std::optional<std::string> classify(const std::vector<ClassifierRule>& rules,
                                    const Ipv6Address& dst) {
  const ClassifierRule* best = nullptr;
  for (const auto& r : rules) {
    if (r.dst_prefix.contains(dst) && (!best || r.dst_prefix.length > best->dst_prefix.length)) {
      best = &r;
    }
  }
  if (!best) return std::nullopt;
  return best->chain_id;
}

Ipv6Address next_after(const VnfChain& chain, const Ipv6Address& sid) {
  auto it = std::find(chain.segments.begin(), chain.segments.end(), sid);
  if (it == chain.segments.end()) {
    throw Error(Errc::SidNotInChain, sid.to_string() + " not in " + chain.chain_id);
  }
  if (std::next(it) == chain.segments.end()) {
    throw Error(Errc::SidIsLast, sid.to_string() + " ends " + chain.chain_id);
  }
  return *std::next(it);
}

void ChainRegistry::add_sid(const Sid& sid) {
  auto [it, inserted] = sids_.emplace(sid.address, sid);
  if (!inserted && it->second != sid) {
    throw Error(Errc::ValidationError, "SID " + sid.address.to_string() + " defined twice");
  }
}

const Sid* ChainRegistry::find_sid(const Ipv6Address& a) const {
  auto it = sids_.find(a);
  return it == sids_.end() ? nullptr : &it->second;
}

const Sid& ChainRegistry::sid(const Ipv6Address& a) const {
  if (const Sid* s = find_sid(a)) return *s;
  throw Error(Errc::UnknownSid, a.to_string());
}

const VnfChain* ChainRegistry::find_chain(const std::string& id) const {
  auto it = chains_.find(id);
  return it == chains_.end() ? nullptr : &it->second;
}

const VnfChain& ChainRegistry::chain(const std::string& id) const {
  if (const VnfChain* c = find_chain(id)) return *c;
  throw Error(Errc::InvalidChain, "unknown chain " + id);
}

const VnfChain* ChainRegistry::mapped_chain(const Ipv6Address& sid) const {
  const Sid* s = find_sid(sid);
  if (!s) return nullptr;
  auto it = mapping_.find({sid, s->interface});
  return it == mapping_.end() ? nullptr : find_chain(it->second);
}

void ChainRegistry::check_chain(const VnfChain& chain) const {
  if (chain.segments.empty()) throw Error(Errc::InvalidChain, chain.chain_id + " is empty");
  std::set<Ipv6Address> seen;
  for (std::size_t i = 0; i < chain.segments.size(); ++i) {
    const auto& a = chain.segments[i];
    if (!seen.insert(a).second) {
      throw Error(Errc::DuplicateSidInChain, a.to_string() + " in " + chain.chain_id);
    }
    const Sid* s = find_sid(a);
    if (!s) throw Error(Errc::UnknownSid, a.to_string() + " in " + chain.chain_id);
    const bool last = i + 1 == chain.segments.size();
    if (last != (s->kind == SidKind::EgressEndpoint)) {
      throw Error(Errc::InvalidChain,
                  chain.chain_id + " must end at, and only at, an egress endpoint");
    }
    if (last) continue;
    const bool mismatch =
        (chain.direction == Direction::Eastbound && s->interface != Interface::East) ||
        (chain.direction == Direction::Westbound && s->interface != Interface::West);
    if (mismatch) {
      throw Error(Errc::InterfaceMismatch,
                  a.to_string() + " exits " + std::string(to_string(s->interface)) + " but " +
                      chain.chain_id + " is " + std::string(to_string(chain.direction)));
    }
    if (s->kind != SidKind::SrUnaware) continue;
    auto m = mapping_.find({a, s->interface});
    if (m != mapping_.end() && m->second != chain.chain_id) {
      throw Error(Errc::UnivocalMappingViolation,
                  a.to_string() + "/" + std::string(to_string(s->interface)) +
                      " already carries " + m->second);
    }
  }
}

void ChainRegistry::insert_chain(const VnfChain& chain) {
  for (const auto& a : chain.segments) {
    const Sid& s = sids_.at(a);
    if (s.kind == SidKind::SrUnaware) mapping_[{a, s.interface}] = chain.chain_id;
  }
  chains_[chain.chain_id] = chain;
}

void ChainRegistry::register_chain(const VnfChain& chain) {
  if (const VnfChain* old = find_chain(chain.chain_id)) {
    if (*old == chain) return;
    ChainRegistry trial = *this;
    trial.unregister_chain(chain.chain_id);
    trial.check_chain(chain);
    trial.insert_chain(chain);
    *this = std::move(trial);
    return;
  }
  check_chain(chain);
  insert_chain(chain);
}

void ChainRegistry::register_bidirectional(const VnfChain& east, const VnfChain& west) {
  if (east.direction != Direction::Eastbound || west.direction != Direction::Westbound) {
    throw Error(Errc::InterfaceMismatch,
                "bidirectional pair needs an eastbound and a westbound chain");
  }
  ChainRegistry trial = *this;
  trial.register_chain(east);
  trial.register_chain(west);
  *this = std::move(trial);
}

void ChainRegistry::unregister_chain(const std::string& chain_id) {
  auto it = chains_.find(chain_id);
  if (it == chains_.end()) throw Error(Errc::InvalidChain, "unknown chain " + chain_id);
  std::erase_if(mapping_, [&](const auto& kv) { return kv.second == chain_id; });
  chains_.erase(it);
}

}  // namespace srv6sfc
