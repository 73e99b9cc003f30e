#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "srv6sfc/dataplane.hpp"
#include "srv6sfc/error.hpp"

using namespace srv6sfc;

namespace {

Ipv6Address A(const std::string& s) { return Ipv6Address::parse(s); }

template <typename F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

VnfChain testbed_chain() {
  return VnfChain{"C1", {A("BBBB::2"), A("CCCC::2")}, A("AAAA::2"), Direction::Unidirectional};
}

/// One NFV node hosting `n` VNFs of one kind, chained in order, then egress.
struct SingleNode {
  ChainRegistry registry;
  NfvNode node;
  VnfChain chain;

  SingleNode(int n, SidKind kind, std::vector<std::shared_ptr<const VnfBehavior>> behaviors = {},
             VnfPermission perm = VnfPermission::InsertNextOnly) {
    chain.chain_id = "chain";
    chain.ingress_source = A("AAAA::2");
    for (int i = 0; i < n; ++i) {
      const std::string name = "v" + std::to_string(i + 1);
      const Ipv6Address addr = A("bbbb::" + std::to_string(i + 2));
      registry.add_sid(Sid{addr, kind, "NFV", Interface::Single, name});
      auto b = i < static_cast<int>(behaviors.size()) ? behaviors[i]
                                                      : std::make_shared<PassThroughRouter>();
      node.vnfs[name] = Vnf{name, "NFV", perm, b};
      chain.segments.push_back(addr);
    }
    registry.add_sid(Sid{A("CCCC::2"), SidKind::EgressEndpoint, "ER2", Interface::Single, ""});
    registry.add_sid(Sid{A("CCCC::9"), SidKind::EgressEndpoint, "ER2", Interface::Single, ""});
    chain.segments.push_back(A("CCCC::2"));
    registry.register_chain(chain);
    node.node_id = "NFV";
    node.registry = &registry;
  }

  Packet arriving(std::uint64_t uid = 1) const {
    return encapsulate(make_udp_packet(A("EEEE::2"), A("DDDD::2"), 32, uid), chain);
  }
};

}  // namespace

TEST_CASE("encapsulate: testbed packet") {
  Packet inner = make_udp_packet(A("EEEE::2"), A("DDDD::2"), 4, 7);
  Packet outer = encapsulate(inner, testbed_chain());
  CHECK(outer.header.src == A("AAAA::2"));
  CHECK(outer.header.dst == A("BBBB::2"));
  CHECK(outer.header.next_header == proto::kRouting);
  CHECK(outer.header.hop_limit == 64);
  REQUIRE(outer.srh);
  CHECK(outer.srh->segment_list == std::vector{A("CCCC::2"), A("BBBB::2")});
  CHECK(outer.srh->segments_left == 1);
  CHECK(outer.srh->last_entry == 1);
  CHECK(outer.srh->next_header == proto::kIpv6InIpv6);
  CHECK(outer.payload == serialize_packet(inner));
  CHECK(outer.uid == 7);

  // against the independent byte oracle
  Bytes expect = oracle::ipv6_header(static_cast<std::uint16_t>(40 + 52), 43, 64, A("AAAA::2"),
                                     A("BBBB::2"));
  Bytes srh = oracle::srh(41, 1, {A("CCCC::2"), A("BBBB::2")});
  expect.insert(expect.end(), srh.begin(), srh.end());
  Bytes in = serialize_packet(inner);
  expect.insert(expect.end(), in.begin(), in.end());
  CHECK(serialize_packet(outer) == expect);
}

TEST_CASE("encapsulate: degenerate and empty chains") {
  Packet inner = make_udp_packet(A("EEEE::2"), A("DDDD::2"), 4);
  VnfChain one{"one", {A("CCCC::2")}, A("AAAA::2"), Direction::Unidirectional};
  Packet outer = encapsulate(inner, one);
  CHECK(outer.header.dst == A("CCCC::2"));
  CHECK(outer.srh->segments_left == 0);
  VnfChain none{"none", {}, A("AAAA::2"), Direction::Unidirectional};
  CHECK(error_of([&] { encapsulate(inner, none); }) == Errc::EmptyChain);
}

TEST_CASE("decapsulate inverts encapsulate") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Packet inner = oracle::random_packet(rng);
    VnfChain c;
    c.chain_id = "r";
    c.ingress_source = oracle::random_address(rng);
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) c.segments.push_back(oracle::random_address(rng));
    Packet back = decapsulate(encapsulate(inner, c));
    CHECK(back == inner);
    CHECK(serialize_packet(back) == serialize_packet(inner));
  }
}

TEST_CASE("decapsulate errors and single-layer contract") {
  Packet plain = make_udp_packet(A("EEEE::2"), A("DDDD::2"), 4);
  CHECK(error_of([&] { decapsulate(plain); }) == Errc::NotEncapsulated);

  Packet once = encapsulate(plain, testbed_chain());
  Packet twice = encapsulate(once, VnfChain{"o", {A("9::9")}, A("8::8"), {}});
  CHECK(decapsulate(twice) == once);
  CHECK(decapsulate(decapsulate(twice)) == plain);
}

TEST_CASE("advance_segment") {
  Packet p = encapsulate(make_udp_packet(A("EEEE::2"), A("DDDD::2"), 16), testbed_chain());
  Packet q = advance_segment(p);
  CHECK(q.srh->segments_left == 0);
  CHECK(q.header.dst == A("CCCC::2"));
  CHECK(q.payload == p.payload);
  CHECK(q.header.src == p.header.src);
  CHECK(error_of([&] { advance_segment(q); }) == Errc::AlreadyAtLastSegment);
  CHECK(error_of([] { advance_segment(make_udp_packet(A("1::1"), A("2::2"), 1)); }) ==
        Errc::NoSrh);
}

TEST_CASE("egress_process") {
  Packet inner = make_udp_packet(A("EEEE::2"), A("DDDD::2"), 16);
  Packet at_nfv = encapsulate(inner, testbed_chain());
  CHECK(error_of([&] { egress_process(at_nfv); }) == Errc::NotLastSegment);
  Packet out = egress_process(advance_segment(at_nfv));
  CHECK(out.header.dst == A("DDDD::2"));
  CHECK(serialize_packet(out) == serialize_packet(inner));
}

TEST_CASE("reencap_unaware") {
  SingleNode env(1, SidKind::SrUnaware);
  Packet inner = make_udp_packet(A("EEEE::2"), A("DDDD::2"), 8);
  Packet out = reencap_unaware(env.registry, inner, {A("bbbb::2"), Interface::Single});
  CHECK(out.header.dst == A("CCCC::2"));
  CHECK(out.header.src == A("AAAA::2"));
  CHECK(out.srh->segments_left == 0);
  CHECK(out.srh->segment_list == std::vector{A("CCCC::2"), A("bbbb::2")});
  CHECK(decapsulate(out) == inner);

  CHECK(error_of([&] {
          reencap_unaware(env.registry, inner, {A("bbbb::99"), Interface::Single});
        }) == Errc::UnivocalMappingMissing);
  CHECK(error_of([&] {
          reencap_unaware(env.registry, inner, {A("bbbb::2"), Interface::East});
        }) == Errc::UnivocalMappingMissing);
}

TEST_CASE("apply_edit: permission cases") {
  ChainRegistry reg;
  for (const char* s : {"1::a", "1::c", "1::b"}) {
    reg.add_sid(Sid{A(s), SidKind::SrAware, "NFV", Interface::Single, s});
  }
  reg.add_sid(Sid{A("e::1"), SidKind::EgressEndpoint, "ER", Interface::Single, ""});
  VnfChain c{"c", {A("1::b"), A("1::a"), A("e::1")}, A("AAAA::2"), {}};
  // packet as seen by 1::b after the segment advanced: remaining <1::a, ER>
  Packet p = advance_segment(encapsulate(make_udp_packet(A("5::5"), A("6::6"), 4), c));
  REQUIRE(remaining_segments(*p.srh) == std::vector{A("1::a"), A("e::1")});

  SUBCASE("case 1: insert next") {
    Packet q = apply_edit(p, SegmentListEdit::insert_after_current({A("1::c")}),
                          VnfPermission::InsertNextOnly, reg);
    CHECK(remaining_segments(*q.srh) == std::vector{A("1::c"), A("1::a"), A("e::1")});
    CHECK(q.header.dst == A("1::c"));
    CHECK(q.srh->segment_list.back() == A("1::b"));  // history kept
    CHECK_NOTHROW(serialize_packet(q));
  }
  SUBCASE("InsertAt denied at InsertNextOnly") {
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::insert_at(1, {A("1::c")}),
                       VnfPermission::InsertNextOnly, reg);
          }) == Errc::EditPermissionDenied);
  }
  SUBCASE("case 2: insert anywhere") {
    Packet q = apply_edit(p, SegmentListEdit::insert_at(1, {A("1::c")}),
                          VnfPermission::InsertAnywhere, reg);
    CHECK(remaining_segments(*q.srh) == std::vector{A("1::a"), A("1::c"), A("e::1")});
    CHECK(q.header.dst == A("1::a"));
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::insert_at(2, {A("1::c")}),
                       VnfPermission::InsertAnywhere, reg);
          }) == Errc::PositionOutOfRange);
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::replace({A("e::1")}), VnfPermission::InsertAnywhere,
                       reg);
          }) == Errc::EditPermissionDenied);
  }
  SUBCASE("case 3: full rewrite") {
    Packet q = apply_edit(p, SegmentListEdit::replace({A("e::1")}), VnfPermission::FullRewrite,
                          reg);
    CHECK(remaining_segments(*q.srh) == std::vector{A("e::1")});
    CHECK(q.header.dst == A("e::1"));
    CHECK(q.srh->segments_left == 0);
    CHECK_NOTHROW(serialize_packet(q));
  }
  SUBCASE("invalid edits") {
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::insert_after_current({A("7::7")}),
                       VnfPermission::FullRewrite, reg);
          }) == Errc::UnknownSidInEdit);
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::replace({A("1::c")}), VnfPermission::FullRewrite, reg);
          }) == Errc::InvalidEdit);
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::insert_after_current({A("1::a")}),
                       VnfPermission::FullRewrite, reg);
          }) == Errc::InvalidEdit);
    CHECK(error_of([&] {
            apply_edit(p, SegmentListEdit::insert_after_current({}), VnfPermission::FullRewrite,
                       reg);
          }) == Errc::InvalidEdit);
  }
}

TEST_CASE("property: permission lattice is monotone and edits keep SRH invariants") {
  ChainRegistry reg;
  std::vector<Ipv6Address> pool;
  for (int i = 1; i <= 6; ++i) {
    auto a = A("2::" + std::to_string(i));
    pool.push_back(a);
    reg.add_sid(Sid{a, SidKind::SrAware, "NFV", Interface::Single, a.to_string()});
  }
  reg.add_sid(Sid{A("e::1"), SidKind::EgressEndpoint, "ER", Interface::Single, ""});
  const std::vector<VnfPermission> levels{VnfPermission::InsertNextOnly,
                                          VnfPermission::InsertAnywhere,
                                          VnfPermission::FullRewrite};
  std::mt19937_64 rng(3);
  int accepted_total = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Ipv6Address> shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t len = 1 + rng() % 3;
    VnfChain c{"c", {shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(len)},
               A("AAAA::2"), {}};
    c.segments.push_back(A("e::1"));
    Packet p = advance_segment(encapsulate(make_udp_packet(A("5::5"), A("6::6"), 4), c));

    SegmentListEdit edit;
    std::vector<Ipv6Address> extra{shuffled[len + rng() % (shuffled.size() - len)]};
    switch (rng() % 3) {
      case 0: edit = SegmentListEdit::insert_after_current(extra); break;
      case 1: edit = SegmentListEdit::insert_at(rng() % 4, extra); break;
      default: {
        std::vector<Ipv6Address> full = extra;
        if (rng() % 2) full.push_back(A("e::1"));
        edit = SegmentListEdit::replace(full);
      }
    }
    bool prev = false;
    for (auto level : levels) {
      bool ok = true;
      try {
        Packet q = apply_edit(p, edit, level, reg);
        q.srh->validate();
        CHECK(q.header.payload_length == q.wire_size() - 40);
        CHECK(q.header.dst == active_segment(*q.srh));
        CHECK(remaining_segments(*q.srh).back() == A("e::1"));
        ++accepted_total;
      } catch (const Error&) {
        ok = false;
      }
      CHECK((!prev || ok));
      prev = ok;
    }
  }
  CHECK(accepted_total > 0);
}

TEST_CASE("predicted_cost") {
  const UnitCosts u{};
  CHECK(predicted_cost(1, SidKind::SrAware, u) == 3 * u.f);
  CHECK(predicted_cost(1, SidKind::SrUnaware, u) == u.d + 3 * u.f + u.e);
  CHECK(predicted_cost(3, SidKind::SrAware, UnitCosts{1.0, 0.0, 0.0}) == 5.0);
  CHECK(predicted_cost(0, SidKind::SrUnaware, u) == u.f);
  CHECK(predicted_cost(0, SidKind::SrAware, UnitCosts{2.0, 9, 9}) == 2.0);
}

TEST_CASE("connector: n=1 counters match the cost statements") {
  SUBCASE("SR-unaware: d + 3f + e") {
    SingleNode env(1, SidKind::SrUnaware);
    auto r = connector_process(env.node, env.arriving());
    CHECK(r.ops == OpCounts{3, 1, 1});
    REQUIRE(r.outputs.size() == 1);
    CHECK(r.outputs[0].header.dst == A("CCCC::2"));
    std::vector<EventKind> kinds;
    for (const auto& e : r.events) kinds.push_back(e.kind);
    CHECK(kinds == std::vector{EventKind::SegmentAdvanced, EventKind::Decapsulated,
                               EventKind::VnfDelivered, EventKind::VnfReturned,
                               EventKind::ReEncapsulated});
  }
  SUBCASE("SR-aware: 3f") {
    SingleNode env(1, SidKind::SrAware);
    Packet in = env.arriving();
    auto r = connector_process(env.node, in);
    CHECK(r.ops == OpCounts{3, 0, 0});
    REQUIRE(r.outputs.size() == 1);
    // non-interference: only the segment advance differs
    CHECK(serialize_packet(r.outputs[0]) == serialize_packet(advance_segment(in)));
  }
}

TEST_CASE("connector: counter/formula agreement for n VNFs of one kind") {
  for (int n : {1, 2, 3, 4, 8}) {
    for (SidKind kind : {SidKind::SrAware, SidKind::SrUnaware}) {
      SingleNode env(n, kind);
      Packet in = env.arriving();
      auto r = connector_process(env.node, in);
      const OpCounts expect = kind == SidKind::SrAware
                                  ? OpCounts{static_cast<std::uint64_t>(n + 2), 0, 0}
                                  : OpCounts{static_cast<std::uint64_t>(2 * n + 1), 1, 1};
      CHECK(r.ops == expect);
      CHECK(r.ops.cost(UnitCosts{}) == predicted_cost(n, kind, UnitCosts{}));
      REQUIRE(r.outputs.size() == 1);
      CHECK(r.outputs[0].header.dst == A("CCCC::2"));
      CHECK(decapsulate(r.outputs[0]) == decapsulate(in));
      int delivered = 0;
      for (const auto& e : r.events) delivered += e.kind == EventKind::VnfDelivered;
      CHECK(delivered == n);
    }
  }
}

TEST_CASE("connector: drop short-circuits re-encapsulation") {
  auto filter = std::make_shared<PrefixFilter>(Prefix::parse("DDDD::/64"));
  for (SidKind kind : {SidKind::SrAware, SidKind::SrUnaware}) {
    SingleNode env(2, kind, {std::make_shared<PassThroughRouter>(), filter});
    auto r = connector_process(env.node, env.arriving());
    CHECK(r.outputs.empty());
    CHECK(r.dropped_by == "v2");
    CHECK(r.ops.e == 0);
    CHECK(r.ops.f == 2 + (kind == SidKind::SrUnaware ? 1 : 0));
  }
  SingleNode miss(1, SidKind::SrUnaware,
                  {std::make_shared<PrefixFilter>(Prefix::parse("FFFF::/16"))});
  CHECK(connector_process(miss.node, miss.arriving()).outputs.size() == 1);
}

TEST_CASE("connector: modified packets survive stateless re-encapsulation") {
  for (SidKind kind : {SidKind::SrAware, SidKind::SrUnaware}) {
    SingleNode env(1, kind, {std::make_shared<PayloadStamper>(0xAB)});
    Packet in = env.arriving();
    auto r = connector_process(env.node, in);
    REQUIRE(r.outputs.size() == 1);
    Packet inner = decapsulate(r.outputs[0]);
    Packet original = decapsulate(in);
    CHECK(inner.payload[0] == 0xAB);
    inner.payload[0] = original.payload[0];
    CHECK(inner == original);
  }
}

TEST_CASE("connector: mixed kinds on one node") {
  ChainRegistry reg;
  reg.add_sid(Sid{A("b::1"), SidKind::SrAware, "NFV", Interface::Single, "a1"});
  reg.add_sid(Sid{A("b::2"), SidKind::SrUnaware, "NFV", Interface::Single, "u1"});
  reg.add_sid(Sid{A("b::3"), SidKind::SrUnaware, "NFV", Interface::Single, "u2"});
  reg.add_sid(Sid{A("b::4"), SidKind::SrAware, "NFV", Interface::Single, "a2"});
  reg.add_sid(Sid{A("c::2"), SidKind::EgressEndpoint, "ER2", Interface::Single, ""});
  VnfChain c{"mix", {A("b::1"), A("b::2"), A("b::3"), A("b::4"), A("c::2")}, A("a::2"), {}};
  reg.register_chain(c);
  NfvNode node{"NFV", &reg, {}};
  for (const char* n : {"a1", "u1", "u2", "a2"}) {
    node.vnfs[n] = Vnf{n, "NFV", VnfPermission::InsertNextOnly,
                       std::make_shared<PassThroughRouter>()};
  }
  auto r = connector_process(node, encapsulate(make_udp_packet(A("e::2"), A("d::2"), 8), c));
  // a1: deliver + return; u1,u2: d, 2x(deliver + return), e; a2: deliver + return; forward
  CHECK(r.ops == OpCounts{2 + 4 + 2 + 1, 1, 1});
  REQUIRE(r.outputs.size() == 1);
  CHECK(r.outputs[0].header.dst == A("c::2"));
  CHECK(r.outputs[0].srh->segments_left == 0);
}

TEST_CASE("connector: SR-aware chain editing") {
  ChainRegistry reg;
  reg.add_sid(Sid{A("b::1"), SidKind::SrAware, "NFV", Interface::Single, "editor"});
  reg.add_sid(Sid{A("b::2"), SidKind::SrAware, "NFV", Interface::Single, "extra"});
  reg.add_sid(Sid{A("c::2"), SidKind::EgressEndpoint, "ER2", Interface::Single, ""});
  VnfChain c{"c", {A("b::1"), A("c::2")}, A("a::2"), {}};
  reg.register_chain(c);
  NfvNode node{"NFV", &reg, {}};
  node.vnfs["editor"] =
      Vnf{"editor", "NFV", VnfPermission::InsertNextOnly,
          std::make_shared<ChainEditor>(SegmentListEdit::insert_after_current({A("b::2")}))};
  node.vnfs["extra"] =
      Vnf{"extra", "NFV", VnfPermission::InsertNextOnly, std::make_shared<PassThroughRouter>()};
  auto r = connector_process(node, encapsulate(make_udp_packet(A("e::2"), A("d::2"), 8), c));
  REQUIRE(r.outputs.size() == 1);
  CHECK(r.ops == OpCounts{4, 0, 0});
  CHECK(r.outputs[0].header.dst == A("c::2"));
  CHECK(r.outputs[0].srh->segment_list.size() == 3);

  node.vnfs["editor"].permission = VnfPermission::InsertNextOnly;
  node.vnfs["editor"].behavior =
      std::make_shared<ChainEditor>(SegmentListEdit::replace({A("c::2")}));
  CHECK(error_of([&] {
          connector_process(node, encapsulate(make_udp_packet(A("e::2"), A("d::2"), 8), c));
        }) == Errc::EditPermissionDenied);
}

TEST_CASE("connector: SR-unaware VNF may not edit the chain") {
  SingleNode env(1, SidKind::SrUnaware,
                 {std::make_shared<ChainEditor>(SegmentListEdit::replace({A("CCCC::2")}))},
                 VnfPermission::FullRewrite);
  CHECK(error_of([&] { connector_process(env.node, env.arriving()); }) ==
        Errc::UnawareEditForbidden);
}

TEST_CASE("connector: precondition errors") {
  SingleNode env(1, SidKind::SrUnaware);
  Packet p = env.arriving();
  p.header.dst = A("bbbb::77");
  CHECK(error_of([&] { connector_process(env.node, p); }) == Errc::UnknownSid);
  CHECK(error_of([&] {
          connector_process(env.node, make_udp_packet(A("1::1"), A("bbbb::2"), 4));
        }) == Errc::NoSrh);

  // SR-unaware SID reached by a chain that was never registered
  ChainRegistry reg;
  reg.add_sid(Sid{A("b::1"), SidKind::SrUnaware, "NFV", Interface::Single, "u"});
  reg.add_sid(Sid{A("c::2"), SidKind::EgressEndpoint, "ER2", Interface::Single, ""});
  NfvNode node{"NFV", &reg, {}};
  node.vnfs["u"] = Vnf{"u", "NFV", VnfPermission::InsertNextOnly,
                       std::make_shared<PassThroughRouter>()};
  VnfChain c{"ghost", {A("b::1"), A("c::2")}, A("a::2"), {}};
  CHECK(error_of([&] {
          connector_process(node, encapsulate(make_udp_packet(A("e::2"), A("d::2"), 8), c));
        }) == Errc::UnivocalMappingMissing);
}

TEST_CASE("cost ledger aggregates and merges") {
  CostLedger a;
  a.record(1, {3, 1, 1});
  a.record(2, {3, 0, 0});
  CHECK(a.aggregate() == OpCounts{6, 1, 1});
  CHECK(a.packets() == 2);
  CHECK(a.total_cost() == doctest::Approx(7.0));
  CostLedger b;
  b.record(3, {1, 0, 0});
  a.merge(b);
  OpCounts sum;
  for (const auto& r : a.records()) sum += r.ops;
  CHECK(sum == a.aggregate());
  CHECK(a.packets() == 3);
  CostLedger lean(UnitCosts{}, false);
  lean.record(1, {1, 0, 0});
  CHECK(lean.records().empty());
  CHECK(lean.aggregate().f == 1);
}
