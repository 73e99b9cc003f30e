#pragma once

// IPv6 fixed header, the Segment Routing Header (routing type 4) and a
// minimal UDP carrier. All multi-byte fields are big-endian on the wire.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace srv6sfc {

using Bytes = std::vector<std::uint8_t>;

namespace proto {
inline constexpr std::uint8_t kIpv6InIpv6 = 41;
inline constexpr std::uint8_t kRouting = 43;
inline constexpr std::uint8_t kUdp = 17;
inline constexpr std::uint8_t kNoNextHeader = 59;
inline constexpr std::uint8_t kSrhRoutingType = 4;
}  // namespace proto

inline constexpr std::size_t kIpv6HeaderLen = 40;
inline constexpr std::size_t kSrhFixedLen = 8;
inline constexpr std::size_t kUdpHeaderLen = 8;

class Ipv6Address {
 public:
  using Octets = std::array<std::uint8_t, 16>;

  constexpr Ipv6Address() = default;
  constexpr explicit Ipv6Address(const Octets& octets) : octets_(octets) {}

  /// Accepts any RFC 4291 text form, case-insensitively. Throws BadAddress.
  static Ipv6Address parse(std::string_view text);
  static std::optional<Ipv6Address> try_parse(std::string_view text);

  /// Canonical (RFC 5952) lowercase text.
  std::string to_string() const;

  const Octets& octets() const { return octets_; }
  Octets& octets() { return octets_; }

  auto operator<=>(const Ipv6Address&) const = default;

 private:
  Octets octets_{};
};

struct Ipv6Header {
  std::uint8_t version = 6;
  std::uint8_t traffic_class = 0;
  std::uint32_t flow_label = 0;  // 20 bits
  std::uint16_t payload_length = 0;
  std::uint8_t next_header = proto::kNoNextHeader;
  std::uint8_t hop_limit = 64;
  Ipv6Address src;
  Ipv6Address dst;

  bool operator==(const Ipv6Header&) const = default;
};

/// segment_list is stored in reverse path order: segment_list[0] is the
/// final segment and segments_left indexes the active one.
struct SegmentRoutingHeader {
  std::uint8_t next_header = proto::kNoNextHeader;
  std::uint8_t hdr_ext_len = 0;
  std::uint8_t routing_type = proto::kSrhRoutingType;
  std::uint8_t segments_left = 0;
  std::uint8_t last_entry = 0;
  std::uint8_t flags = 0;
  std::uint16_t tag = 0;
  std::vector<Ipv6Address> segment_list;

  /// Builds an SRH from a path in forward order, active segment = first.
  static SegmentRoutingHeader from_path(std::span<const Ipv6Address> path,
                                        std::uint8_t next_header);

  /// Recomputes hdr_ext_len and last_entry from segment_list.
  void sync_lengths();
  std::size_t wire_size() const { return kSrhFixedLen + 16 * segment_list.size(); }

  /// Throws InvariantViolation when any structural invariant fails.
  void validate() const;

  bool operator==(const SegmentRoutingHeader&) const = default;
};

struct Packet {
  Ipv6Header header;
  std::optional<SegmentRoutingHeader> srh;
  Bytes payload;
  std::uint64_t uid = 0;  // simulator bookkeeping, never serialized

  /// Protocol of the payload (after the SRH if any).
  std::uint8_t payload_protocol() const {
    return srh ? srh->next_header : header.next_header;
  }
  bool is_encapsulated() const { return payload_protocol() == proto::kIpv6InIpv6; }

  /// Recomputes header.payload_length (and SRH lengths) from the contents.
  void sync_lengths();
  std::size_t wire_size() const {
    return kIpv6HeaderLen + (srh ? srh->wire_size() : 0) + payload.size();
  }

  /// Equality over serialized content; uid is ignored.
  friend bool operator==(const Packet& a, const Packet& b) {
    return a.header == b.header && a.srh == b.srh && a.payload == b.payload;
  }
};

Packet parse_packet(std::span<const std::uint8_t> bytes);
Bytes serialize_packet(const Packet& p);

const Ipv6Address& active_segment(const SegmentRoutingHeader& srh);

/// Plain IPv6/UDP packet with `data_size` bytes of deterministic filler.
Packet make_udp_packet(const Ipv6Address& src, const Ipv6Address& dst,
                       std::size_t data_size, std::uint64_t uid = 0,
                       std::uint16_t src_port = 5001, std::uint16_t dst_port = 5001);

/// Offset, 16 hex bytes, ASCII gutter; one line per 16 bytes.
std::string hex_dump(std::span<const std::uint8_t> bytes);

}  // namespace srv6sfc
