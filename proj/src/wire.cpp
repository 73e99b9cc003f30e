#include "srv6sfc/wire.hpp"

#include <arpa/inet.h>

#include <cstdio>

#include "srv6sfc/error.hpp"

namespace srv6sfc {

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return data_[pos_++]; }
  std::uint16_t u16() {
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  Ipv6Address addr() {
    Ipv6Address::Octets o{};
    for (auto& b : o) b = data_[pos_++];
    return Ipv6Address(o);
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::span<const std::uint8_t> rest() const { return data_.subspan(pos_); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_addr(Bytes& out, const Ipv6Address& a) {
  out.insert(out.end(), a.octets().begin(), a.octets().end());
}

[[noreturn]] void violation(const std::string& what) {
  throw Error(Errc::InvariantViolation, what);
}

}  // namespace

Ipv6Address Ipv6Address::parse(std::string_view text) {
  if (auto a = try_parse(text)) return *a;
  throw Error(Errc::BadAddress, std::string(text));
}

std::optional<Ipv6Address> Ipv6Address::try_parse(std::string_view text) {
  std::string s(text);
  Octets o{};
  if (inet_pton(AF_INET6, s.c_str(), o.data()) != 1) return std::nullopt;
  return Ipv6Address(o);
}

std::string Ipv6Address::to_string() const {
  char buf[INET6_ADDRSTRLEN];
  inet_ntop(AF_INET6, octets_.data(), buf, sizeof buf);
  return buf;
}

SegmentRoutingHeader SegmentRoutingHeader::from_path(std::span<const Ipv6Address> path,
                                                     std::uint8_t next_header) {
  SegmentRoutingHeader srh;
  srh.next_header = next_header;
  srh.segment_list.assign(path.rbegin(), path.rend());
  srh.sync_lengths();
  srh.segments_left = srh.last_entry;
  return srh;
}

void SegmentRoutingHeader::sync_lengths() {
  hdr_ext_len = static_cast<std::uint8_t>(2 * segment_list.size());
  last_entry = static_cast<std::uint8_t>(segment_list.empty() ? 0 : segment_list.size() - 1);
}

void SegmentRoutingHeader::validate() const {
  if (routing_type != proto::kSrhRoutingType) violation("routing_type must be 4");
  if (segment_list.empty()) violation("empty segment list");
  if (segment_list.size() > 127) violation("segment list longer than 127 entries");
  if (hdr_ext_len != 2 * segment_list.size()) violation("hdr_ext_len != 2 * segments");
  if (last_entry != segment_list.size() - 1) violation("last_entry != segments - 1");
  if (segments_left > last_entry) violation("segments_left > last_entry");
}

void Packet::sync_lengths() {
  if (srh) srh->sync_lengths();
  header.payload_length = static_cast<std::uint16_t>(wire_size() - kIpv6HeaderLen);
}

Packet parse_packet(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kIpv6HeaderLen) {
    throw Error(Errc::TruncatedPacket, "need 40 bytes, have " + std::to_string(bytes.size()));
  }
  Reader r(bytes);
  Packet p;
  const std::uint8_t b0 = r.u8();
  const std::uint8_t b1 = r.u8();
  const std::uint16_t b23 = r.u16();
  p.header.version = b0 >> 4;
  if (p.header.version != 6) {
    throw Error(Errc::BadVersion, "version " + std::to_string(p.header.version));
  }
  p.header.traffic_class = static_cast<std::uint8_t>((b0 & 0x0f) << 4 | b1 >> 4);
  p.header.flow_label = static_cast<std::uint32_t>(b1 & 0x0f) << 16 | b23;
  p.header.payload_length = r.u16();
  p.header.next_header = r.u8();
  p.header.hop_limit = r.u8();
  p.header.src = r.addr();
  p.header.dst = r.addr();

  const std::size_t declared = p.header.payload_length;
  if (r.remaining() < declared) {
    throw Error(Errc::TruncatedPacket, "payload_length " + std::to_string(declared) +
                                           " exceeds " + std::to_string(r.remaining()));
  }
  if (r.remaining() > declared) {
    throw Error(Errc::TrailingBytes,
                std::to_string(r.remaining() - declared) + " bytes past payload_length");
  }

  if (p.header.next_header == proto::kRouting) {
    if (r.remaining() < kSrhFixedLen) throw Error(Errc::TruncatedPacket, "routing header");
    SegmentRoutingHeader srh;
    srh.next_header = r.u8();
    srh.hdr_ext_len = r.u8();
    srh.routing_type = r.u8();
    srh.segments_left = r.u8();
    srh.last_entry = r.u8();
    srh.flags = r.u8();
    srh.tag = r.u16();
    if (srh.routing_type != proto::kSrhRoutingType) {
      throw Error(Errc::BadRoutingType, "routing_type " + std::to_string(srh.routing_type));
    }
    if (srh.hdr_ext_len == 0 || srh.hdr_ext_len % 2 != 0) {
      throw Error(Errc::MalformedSrh, "hdr_ext_len " + std::to_string(srh.hdr_ext_len));
    }
    const std::size_t entries = srh.hdr_ext_len / 2u;
    if (srh.last_entry + 1u != entries) {
      throw Error(Errc::MalformedSrh, "last_entry inconsistent with hdr_ext_len");
    }
    if (srh.segments_left > srh.last_entry) {
      throw Error(Errc::MalformedSrh, "segments_left > last_entry");
    }
    if (r.remaining() < 16 * entries) throw Error(Errc::TruncatedPacket, "segment list");
    srh.segment_list.reserve(entries);
    for (std::size_t i = 0; i < entries; ++i) srh.segment_list.push_back(r.addr());
    p.srh = std::move(srh);
  }

  auto rest = r.rest();
  p.payload.assign(rest.begin(), rest.end());
  return p;
}

Bytes serialize_packet(const Packet& p) {
  const Ipv6Header& h = p.header;
  if (h.version != 6) violation("version must be 6");
  if (h.flow_label > 0xfffff) violation("flow_label exceeds 20 bits");
  if (p.srh) {
    p.srh->validate();
    if (h.next_header != proto::kRouting) violation("SRH present but next_header != 43");
  } else if (h.next_header == proto::kRouting) {
    violation("next_header 43 without SRH");
  }
  const std::size_t total = p.wire_size();
  if (total - kIpv6HeaderLen > 0xffff) violation("packet exceeds 65535-byte payload");
  if (h.payload_length != total - kIpv6HeaderLen) {
    violation("payload_length " + std::to_string(h.payload_length) + " != " +
              std::to_string(total - kIpv6HeaderLen));
  }

  Bytes out;
  out.reserve(total);
  out.push_back(static_cast<std::uint8_t>(6 << 4 | h.traffic_class >> 4));
  out.push_back(static_cast<std::uint8_t>((h.traffic_class & 0x0f) << 4 | h.flow_label >> 16));
  put16(out, static_cast<std::uint16_t>(h.flow_label & 0xffff));
  put16(out, h.payload_length);
  out.push_back(h.next_header);
  out.push_back(h.hop_limit);
  put_addr(out, h.src);
  put_addr(out, h.dst);
  if (const auto& s = p.srh) {
    out.push_back(s->next_header);
    out.push_back(s->hdr_ext_len);
    out.push_back(s->routing_type);
    out.push_back(s->segments_left);
    out.push_back(s->last_entry);
    out.push_back(s->flags);
    put16(out, s->tag);
    for (const auto& a : s->segment_list) put_addr(out, a);
  }
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

const Ipv6Address& active_segment(const SegmentRoutingHeader& srh) {
  if (srh.segments_left >= srh.segment_list.size()) violation("segments_left out of range");
  return srh.segment_list[srh.segments_left];
}

Packet make_udp_packet(const Ipv6Address& src, const Ipv6Address& dst, std::size_t data_size,
                       std::uint64_t uid, std::uint16_t src_port, std::uint16_t dst_port) {
  Packet p;
  p.uid = uid;
  p.header.src = src;
  p.header.dst = dst;
  p.header.next_header = proto::kUdp;
  const std::size_t udp_len = kUdpHeaderLen + data_size;
  p.payload.reserve(udp_len);
  put16(p.payload, src_port);
  put16(p.payload, dst_port);
  put16(p.payload, static_cast<std::uint16_t>(udp_len));
  put16(p.payload, 0);  // checksum not computed
  for (std::size_t i = 0; i < data_size; ++i) {
    p.payload.push_back(static_cast<std::uint8_t>(i + uid));
  }
  p.sync_lengths();
  return p;
}

std::string hex_dump(std::span<const std::uint8_t> bytes) {
  std::string out;
  char buf[16];
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    std::snprintf(buf, sizeof buf, "%08zx  ", off);
    out += buf;
    std::string ascii;
    for (std::size_t i = 0; i < 16; ++i) {
      if (off + i < bytes.size()) {
        const std::uint8_t b = bytes[off + i];
        std::snprintf(buf, sizeof buf, "%02x ", b);
        out += buf;
        ascii += (b >= 0x20 && b < 0x7f) ? static_cast<char>(b) : '.';
      } else {
        out += "   ";
      }
    }
    out += " |" + ascii + "|\n";
  }
  return out;
}

}  // namespace srv6sfc
