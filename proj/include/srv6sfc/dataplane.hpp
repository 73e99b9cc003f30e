#pragma once

// Per-node packet processing: edge encapsulation and decapsulation, SR
// endpoint behaviour, the SR/VNF connector for SR-aware and SR-unaware
// VNFs, and f/d/e cost accounting.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srv6sfc/chain.hpp"
#include "srv6sfc/wire.hpp"

namespace srv6sfc {

enum class EventKind {
  Classified,
  Encapsulated,
  SegmentAdvanced,
  VnfDelivered,
  VnfReturned,
  Decapsulated,
  ReEncapsulated,
  Forwarded,
  Dropped,
  Delivered,
};

std::string_view to_string(EventKind k);

// ---- segment list edits --------------------------------------------------

enum class VnfPermission { InsertNextOnly, InsertAnywhere, FullRewrite };

std::string_view to_string(VnfPermission p);
std::optional<VnfPermission> parse_permission(std::string_view s);

/// Positions and lists are in forward path order over the remaining
/// segments, i.e. starting at the currently active segment.
struct SegmentListEdit {
  enum class Kind { InsertAfterCurrent, InsertAt, Replace };

  Kind kind = Kind::InsertAfterCurrent;
  std::size_t position = 0;  // InsertAt only
  std::vector<Ipv6Address> sids;

  static SegmentListEdit insert_after_current(std::vector<Ipv6Address> sids) {
    return {Kind::InsertAfterCurrent, 0, std::move(sids)};
  }
  static SegmentListEdit insert_at(std::size_t position, std::vector<Ipv6Address> sids) {
    return {Kind::InsertAt, position, std::move(sids)};
  }
  static SegmentListEdit replace(std::vector<Ipv6Address> remaining) {
    return {Kind::Replace, 0, std::move(remaining)};
  }

  bool operator==(const SegmentListEdit&) const = default;
};

/// Remaining path (forward order) of an SRH: active segment first.
std::vector<Ipv6Address> remaining_segments(const SegmentRoutingHeader& srh);

Packet apply_edit(const Packet& p, const SegmentListEdit& edit, VnfPermission perm,
                  const ChainRegistry& registry);

// ---- VNFs ------------------------------------------------------------------

struct VnfAction {
  enum class Kind { Forward, Modified, Drop, EditChain };

  Kind kind = Kind::Forward;
  std::optional<Packet> packet;  // Modified and EditChain
  std::optional<SegmentListEdit> edit;

  static VnfAction forward() { return {}; }
  static VnfAction modified(Packet p) { return {Kind::Modified, std::move(p), std::nullopt}; }
  static VnfAction drop() { return {Kind::Drop, std::nullopt, std::nullopt}; }
  static VnfAction edit_chain(Packet p, SegmentListEdit e) {
    return {Kind::EditChain, std::move(p), std::move(e)};
  }
};

/// VNF behaviours are stateless so a configured network can be shared
/// read-only between simulation threads.
class VnfBehavior {
 public:
  virtual ~VnfBehavior() = default;
  virtual VnfAction process(const Packet& p) const = 0;
  /// Config-file spelling, e.g. "filter dddd::/64".
  virtual std::string describe() const = 0;
};

/// Receives and resends unchanged: the routing-only VNF used in the
/// throughput experiments.
class PassThroughRouter final : public VnfBehavior {
 public:
  VnfAction process(const Packet&) const override { return VnfAction::forward(); }
  std::string describe() const override { return "passthrough"; }
};

/// Drops packets whose original destination falls in `prefix`.
class PrefixFilter final : public VnfBehavior {
 public:
  explicit PrefixFilter(Prefix prefix) : prefix_(prefix) {}
  VnfAction process(const Packet& p) const override;
  std::string describe() const override { return "filter " + prefix_.to_string(); }

 private:
  Prefix prefix_;
};

/// Overwrites the first payload byte of the original packet.
class PayloadStamper final : public VnfBehavior {
 public:
  explicit PayloadStamper(std::uint8_t value) : value_(value) {}
  VnfAction process(const Packet& p) const override;
  std::string describe() const override { return "stamp " + std::to_string(value_); }

 private:
  std::uint8_t value_;
};

class ChainEditor final : public VnfBehavior {
 public:
  explicit ChainEditor(SegmentListEdit edit) : edit_(std::move(edit)) {}
  VnfAction process(const Packet& p) const override {
    return VnfAction::edit_chain(p, edit_);
  }
  std::string describe() const override;
  const SegmentListEdit& edit() const { return edit_; }

 private:
  SegmentListEdit edit_;
};

struct Vnf {
  std::string name;
  std::string host_node;
  VnfPermission permission = VnfPermission::InsertNextOnly;
  std::shared_ptr<const VnfBehavior> behavior;
};

// ---- cost model -------------------------------------------------------------

/// f: one pass through the forwarding stack, d: decapsulation, e: re-encapsulation.
struct UnitCosts {
  double f = 1.0;
  double d = 0.5;
  double e = 0.5;

  bool operator==(const UnitCosts&) const = default;
};

struct OpCounts {
  std::uint64_t f = 0;
  std::uint64_t d = 0;
  std::uint64_t e = 0;

  OpCounts& operator+=(const OpCounts& o) {
    f += o.f;
    d += o.d;
    e += o.e;
    return *this;
  }
  double cost(const UnitCosts& u) const { return f * u.f + d * u.d + e * u.e; }
  bool operator==(const OpCounts&) const = default;
};

struct PacketCost {
  std::uint64_t uid = 0;
  OpCounts ops;
};

/// Aggregate counters always equal the sum of the per-packet records (when
/// records are kept).
class CostLedger {
 public:
  explicit CostLedger(UnitCosts units = {}, bool keep_records = true)
      : units_(units), keep_records_(keep_records) {}

  void record(std::uint64_t uid, const OpCounts& ops);
  void merge(const CostLedger& other);

  const UnitCosts& units() const { return units_; }
  const OpCounts& aggregate() const { return aggregate_; }
  std::uint64_t packets() const { return packets_; }
  const std::vector<PacketCost>& records() const { return records_; }
  double total_cost() const { return aggregate_.cost(units_); }
  double mean_cost_per_packet() const {
    return packets_ == 0 ? 0.0 : total_cost() / static_cast<double>(packets_);
  }

 private:
  UnitCosts units_;
  bool keep_records_;
  OpCounts aggregate_;
  std::uint64_t packets_ = 0;
  std::vector<PacketCost> records_;
};

/// n == 0 is a plain router (f); SR-aware (n+2)f; SR-unaware d+(2n+1)f+e.
double predicted_cost(int n, SidKind kind, const UnitCosts& units);

// ---- edge and endpoint operations -------------------------------------------

inline constexpr std::uint8_t kOuterHopLimit = 64;

Packet encapsulate(const Packet& inner, const VnfChain& chain);
Packet decapsulate(const Packet& outer);
Packet advance_segment(const Packet& p);
Packet egress_process(const Packet& p);

/// Rebuilds the outer header and SRH for a packet returned by an SR-unaware
/// VNF, from the chain mapped to the (SID, interface) it left through.
Packet reencap_unaware(const ChainRegistry& registry, const Packet& returned,
                       const ChainRegistry::MappingKey& from);

// ---- SR/VNF connector ----------------------------------------------------------

struct NfvNode {
  std::string node_id;
  const ChainRegistry* registry = nullptr;
  std::map<std::string, Vnf> vnfs;  // by instance name

  /// The SID's VNF if `a` is a VNF SID hosted here.
  const Vnf* local_vnf(const Ipv6Address& a) const;
};

struct ConnectorEvent {
  EventKind kind;
  std::string detail;
  std::optional<Packet> snapshot;
};

struct ConnectorResult {
  std::vector<Packet> outputs;  // empty when a VNF dropped the packet
  std::string dropped_by;
  OpCounts ops;
  std::vector<ConnectorEvent> events;
};

/// Runs every local SID the packet visits before it leaves the node.
/// `snapshots` attaches a copy of the packet to each event.
ConnectorResult connector_process(const NfvNode& node, const Packet& p, bool snapshots = false);

}  // namespace srv6sfc
