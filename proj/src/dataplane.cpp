#include "srv6sfc/dataplane.hpp"

#include <algorithm>
#include <set>

#include "srv6sfc/error.hpp"

namespace srv6sfc {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Classified: return "Classified";
    case EventKind::Encapsulated: return "Encapsulated";
    case EventKind::SegmentAdvanced: return "SegmentAdvanced";
    case EventKind::VnfDelivered: return "VnfDelivered";
    case EventKind::VnfReturned: return "VnfReturned";
    case EventKind::Decapsulated: return "Decapsulated";
    case EventKind::ReEncapsulated: return "ReEncapsulated";
    case EventKind::Forwarded: return "Forwarded";
    case EventKind::Dropped: return "Dropped";
    case EventKind::Delivered: return "Delivered";
  }
  return "?";
}

std::string_view to_string(VnfPermission p) {
  switch (p) {
    case VnfPermission::InsertNextOnly: return "insert-next";
    case VnfPermission::InsertAnywhere: return "insert-anywhere";
    case VnfPermission::FullRewrite: return "full-rewrite";
  }
  return "?";
}

std::optional<VnfPermission> parse_permission(std::string_view s) {
  if (s == "insert-next") return VnfPermission::InsertNextOnly;
  if (s == "insert-anywhere") return VnfPermission::InsertAnywhere;
  if (s == "full-rewrite") return VnfPermission::FullRewrite;
  return std::nullopt;
}

// ---- edits -----------------------------------------------------------------

std::vector<Ipv6Address> remaining_segments(const SegmentRoutingHeader& srh) {
  std::vector<Ipv6Address> out;
  for (int i = srh.segments_left; i >= 0; --i) out.push_back(srh.segment_list[i]);
  return out;
}

Packet apply_edit(const Packet& p, const SegmentListEdit& edit, VnfPermission perm,
                  const ChainRegistry& registry) {
  if (!p.srh) throw Error(Errc::NoSrh, "edit on a packet without SRH");
  using Kind = SegmentListEdit::Kind;
  const bool allowed =
      edit.kind == Kind::InsertAfterCurrent ||
      (edit.kind == Kind::InsertAt && perm != VnfPermission::InsertNextOnly) ||
      (edit.kind == Kind::Replace && perm == VnfPermission::FullRewrite);
  if (!allowed) {
    throw Error(Errc::EditPermissionDenied,
                "permission " + std::string(to_string(perm)) + " forbids this edit");
  }
  if (edit.sids.empty()) throw Error(Errc::InvalidEdit, "edit names no segments");
  for (const auto& a : edit.sids) {
    if (!registry.find_sid(a)) throw Error(Errc::UnknownSidInEdit, a.to_string());
  }

  std::vector<Ipv6Address> remaining = remaining_segments(*p.srh);
  switch (edit.kind) {
    case Kind::InsertAfterCurrent:
      remaining.insert(remaining.begin(), edit.sids.begin(), edit.sids.end());
      break;
    case Kind::InsertAt:
      // strictly among the remaining segments: never after the egress
      if (edit.position >= remaining.size()) {
        throw Error(Errc::PositionOutOfRange, "position " + std::to_string(edit.position) +
                                                  " of " + std::to_string(remaining.size()));
      }
      remaining.insert(remaining.begin() + static_cast<std::ptrdiff_t>(edit.position),
                       edit.sids.begin(), edit.sids.end());
      break;
    case Kind::Replace:
      remaining = edit.sids;
      break;
  }

  std::set<Ipv6Address> seen;
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    if (!seen.insert(remaining[i]).second) {
      throw Error(Errc::InvalidEdit, remaining[i].to_string() + " would appear twice");
    }
    const bool egress = registry.sid(remaining[i]).kind == SidKind::EgressEndpoint;
    if (egress != (i + 1 == remaining.size())) {
      throw Error(Errc::InvalidEdit, "edited path must end at, and only at, an egress endpoint");
    }
  }

  Packet q = p;
  const auto& old = p.srh->segment_list;
  std::vector<Ipv6Address> list(remaining.rbegin(), remaining.rend());
  list.insert(list.end(), old.begin() + p.srh->segments_left + 1, old.end());
  if (list.size() > 127) throw Error(Errc::InvalidEdit, "segment list too long");
  q.srh->segment_list = std::move(list);
  q.srh->sync_lengths();
  q.srh->segments_left = static_cast<std::uint8_t>(remaining.size() - 1);
  q.header.dst = remaining.front();
  q.sync_lengths();
  return q;
}

// ---- VNF behaviours ------------------------------------------------------------

namespace {

const Packet* original_of(const Packet& p, std::optional<Packet>& storage) {
  if (!p.is_encapsulated()) return &p;
  storage = decapsulate(p);
  return &*storage;
}

std::string join(const std::vector<Ipv6Address>& v) {
  std::string out;
  for (const auto& a : v) out += (out.empty() ? "" : ",") + a.to_string();
  return out;
}

}  // namespace

VnfAction PrefixFilter::process(const Packet& p) const {
  std::optional<Packet> storage;
  return prefix_.contains(original_of(p, storage)->header.dst) ? VnfAction::drop()
                                                               : VnfAction::forward();
}

VnfAction PayloadStamper::process(const Packet& p) const {
  if (!p.is_encapsulated()) {
    if (p.payload.empty()) return VnfAction::forward();
    Packet q = p;
    q.payload[0] = value_;
    return VnfAction::modified(std::move(q));
  }
  Packet inner = decapsulate(p);
  if (inner.payload.empty()) return VnfAction::forward();
  inner.payload[0] = value_;
  Packet q = p;
  q.payload = serialize_packet(inner);
  return VnfAction::modified(std::move(q));
}

std::string ChainEditor::describe() const {
  switch (edit_.kind) {
    case SegmentListEdit::Kind::InsertAfterCurrent: return "edit next " + join(edit_.sids);
    case SegmentListEdit::Kind::InsertAt:
      return "edit at " + std::to_string(edit_.position) + " " + join(edit_.sids);
    case SegmentListEdit::Kind::Replace: return "edit replace " + join(edit_.sids);
  }
  return "edit";
}

// ---- cost model -------------------------------------------------------------------

void CostLedger::record(std::uint64_t uid, const OpCounts& ops) {
  aggregate_ += ops;
  ++packets_;
  if (keep_records_) records_.push_back({uid, ops});
}

void CostLedger::merge(const CostLedger& other) {
  aggregate_ += other.aggregate_;
  packets_ += other.packets_;
  if (keep_records_) {
    records_.insert(records_.end(), other.records_.begin(), other.records_.end());
  }
}

double predicted_cost(int n, SidKind kind, const UnitCosts& u) {
  if (n < 0) throw Error(Errc::BadArgument, "negative VNF count");
  if (n == 0) return u.f;
  if (kind == SidKind::SrAware) return (n + 2) * u.f;
  return u.d + (2 * n + 1) * u.f + u.e;
}

// ---- edge and endpoint operations ----------------------------------------------------

Packet encapsulate(const Packet& inner, const VnfChain& chain) {
  if (chain.segments.empty()) throw Error(Errc::EmptyChain, chain.chain_id);
  Packet outer;
  outer.uid = inner.uid;
  outer.header.src = chain.ingress_source;
  outer.header.dst = chain.segments.front();
  outer.header.next_header = proto::kRouting;
  outer.header.hop_limit = kOuterHopLimit;
  outer.srh = SegmentRoutingHeader::from_path(chain.segments, proto::kIpv6InIpv6);
  outer.payload = serialize_packet(inner);
  outer.sync_lengths();
  return outer;
}

Packet decapsulate(const Packet& outer) {
  if (!outer.is_encapsulated()) {
    throw Error(Errc::NotEncapsulated, "payload protocol " +
                                           std::to_string(outer.payload_protocol()));
  }
  Packet inner = parse_packet(outer.payload);
  inner.uid = outer.uid;
  return inner;
}

Packet advance_segment(const Packet& p) {
  if (!p.srh) throw Error(Errc::NoSrh, "segment advance without SRH");
  if (p.srh->segments_left == 0) {
    throw Error(Errc::AlreadyAtLastSegment, p.header.dst.to_string());
  }
  Packet q = p;
  --q.srh->segments_left;
  q.header.dst = active_segment(*q.srh);
  return q;
}

Packet egress_process(const Packet& p) {
  if (p.srh && p.srh->segments_left > 0) {
    throw Error(Errc::NotLastSegment,
                std::to_string(p.srh->segments_left) + " segments left at " +
                    p.header.dst.to_string());
  }
  return decapsulate(p);
}

Packet reencap_unaware(const ChainRegistry& registry, const Packet& returned,
                       const ChainRegistry::MappingKey& from) {
  auto it = registry.mapping().find(from);
  if (it == registry.mapping().end()) {
    throw Error(Errc::UnivocalMappingMissing, from.first.to_string() + "/" +
                                                  std::string(to_string(from.second)));
  }
  const VnfChain& chain = registry.chain(it->second);
  const Ipv6Address next = next_after(chain, from.first);
  Packet outer = encapsulate(returned, chain);
  const auto pos = std::find(chain.segments.begin(), chain.segments.end(), next);
  outer.srh->segments_left =
      static_cast<std::uint8_t>(chain.segments.end() - pos - 1);
  outer.header.dst = next;
  return outer;
}

// ---- SR/VNF connector ----------------------------------------------------------------------

const Vnf* NfvNode::local_vnf(const Ipv6Address& a) const {
  const Sid* s = registry->find_sid(a);
  if (!s || s->kind == SidKind::EgressEndpoint || s->host_node != node_id) return nullptr;
  auto it = vnfs.find(s->vnf);
  return it == vnfs.end() ? nullptr : &it->second;
}

namespace {

constexpr int kMaxLocalVisits = 64;

class Connector {
 public:
  Connector(const NfvNode& node, bool snapshots) : node_(node), snapshots_(snapshots) {}

  ConnectorResult run(Packet p);

 private:
  void event(EventKind k, std::string detail, const Packet& p) {
    ConnectorEvent e{k, std::move(detail), std::nullopt};
    if (snapshots_) e.snapshot = p;
    result_.events.push_back(std::move(e));
  }
  bool is_local(const Ipv6Address& a, SidKind kind) const {
    return node_.local_vnf(a) && node_.registry->sid(a).kind == kind;
  }

  const NfvNode& node_;
  bool snapshots_;
  ConnectorResult result_;
};

ConnectorResult Connector::run(Packet p) {
  const ChainRegistry& reg = *node_.registry;
  if (!p.srh) throw Error(Errc::NoSrh, "connector expects an SR packet");
  if (!node_.local_vnf(p.header.dst)) {
    throw Error(Errc::UnknownSid, p.header.dst.to_string() + " is not hosted on " + node_.node_id);
  }

  // Either `p` is SR-encapsulated, or `plain` holds the original packet
  // while it moves between SR-unaware VNFs.
  std::optional<Packet> plain;
  Ipv6Address sid = p.header.dst;

  for (int visits = 0;; ++visits) {
    if (visits == kMaxLocalVisits) {
      throw Error(Errc::RoutingLoop, "connector visited " + std::to_string(visits) + " SIDs");
    }
    const Sid& s = reg.sid(sid);
    const Vnf& vnf = *node_.local_vnf(sid);
    const std::string where = sid.to_string();

    if (s.kind == SidKind::SrAware) {
      p = advance_segment(p);
      event(EventKind::SegmentAdvanced, p.header.dst.to_string(), p);
      ++result_.ops.f;
      event(EventKind::VnfDelivered, vnf.name, p);
      VnfAction action = vnf.behavior->process(p);
      switch (action.kind) {
        case VnfAction::Kind::Drop:
          result_.dropped_by = vnf.name;
          return std::move(result_);
        case VnfAction::Kind::Forward:
          break;
        case VnfAction::Kind::Modified:
          if (!action.packet || !action.packet->srh) {
            throw Error(Errc::InvariantViolation, vnf.name + " returned a packet without SRH");
          }
          p = std::move(*action.packet);
          p.sync_lengths();
          break;
        case VnfAction::Kind::EditChain:
          p = apply_edit(*action.packet, *action.edit, vnf.permission, reg);
          break;
      }
      event(EventKind::VnfReturned, vnf.name, p);
      const Ipv6Address next = p.header.dst;
      if (p.srh->segments_left > 0 && is_local(next, SidKind::SrAware)) {
        sid = next;  // direct hand-off, charged as the next delivery
        continue;
      }
      ++result_.ops.f;  // back to the connector
      if (p.srh->segments_left > 0 && is_local(next, SidKind::SrUnaware)) {
        sid = next;
        continue;
      }
      break;
    }

    // SR-unaware
    if (!plain) {
      p = advance_segment(p);
      event(EventKind::SegmentAdvanced, p.header.dst.to_string(), p);
      plain = decapsulate(p);
      ++result_.ops.d;
      event(EventKind::Decapsulated, where, *plain);
    } else {
      event(EventKind::SegmentAdvanced, where, *plain);
    }
    ++result_.ops.f;
    event(EventKind::VnfDelivered, vnf.name, *plain);
    VnfAction action = vnf.behavior->process(*plain);
    switch (action.kind) {
      case VnfAction::Kind::Drop:
        result_.dropped_by = vnf.name;
        return std::move(result_);
      case VnfAction::Kind::Forward:
        break;
      case VnfAction::Kind::Modified:
        plain = std::move(*action.packet);
        plain->sync_lengths();
        break;
      case VnfAction::Kind::EditChain:
        throw Error(Errc::UnawareEditForbidden, vnf.name + " is SR-unaware");
    }
    ++result_.ops.f;
    event(EventKind::VnfReturned, vnf.name, *plain);

    const ChainRegistry::MappingKey key{sid, s.interface};
    auto m = reg.mapping().find(key);
    if (m == reg.mapping().end()) {
      throw Error(Errc::UnivocalMappingMissing, where + " belongs to no registered chain");
    }
    const Ipv6Address next = next_after(reg.chain(m->second), sid);
    if (is_local(next, SidKind::SrUnaware)) {
      sid = next;
      continue;
    }
    const std::uint64_t uid = p.uid;
    p = reencap_unaware(reg, *plain, key);
    p.uid = uid;
    plain.reset();
    ++result_.ops.e;
    event(EventKind::ReEncapsulated, m->second, p);
    if (is_local(next, SidKind::SrAware)) {
      sid = next;
      continue;
    }
    break;
  }

  ++result_.ops.f;  // forward to the next hop
  result_.outputs.push_back(std::move(p));
  return std::move(result_);
}

}  // namespace

ConnectorResult connector_process(const NfvNode& node, const Packet& p, bool snapshots) {
  if (!node.registry) throw Error(Errc::InvariantViolation, "node without registry");
  return Connector(node, snapshots).run(p);
}

}  // namespace srv6sfc
