#include "srv6sfc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace srv6sfc {

namespace {

std::string join_msgs(const std::vector<Diagnostic>& ds) {
  std::string out = std::to_string(ds.size()) + (ds.size() == 1 ? " problem" : " problems");
  for (const auto& d : ds) out += "\n  " + d.message;
  return out;
}

struct Token {
  std::string text;
  int col = 1;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
    out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.emplace_back(s.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<Ipv6Address> parse_sid_list(std::string_view s) {
  std::vector<Ipv6Address> out;
  for (const auto& part : split_commas(s)) out.push_back(Ipv6Address::parse(part));
  return out;
}

std::string join_addrs(const std::vector<Ipv6Address>& xs) {
  std::string out;
  for (const auto& a : xs) out += (out.empty() ? "" : ",") + a.to_string();
  return out;
}

// Thrown inside line handlers; caught and turned into a positioned diagnostic.
struct LineError {
  int col;
  std::string msg;
};

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  ScenarioConfig run(std::string_view text);

 private:
  void line(const std::vector<Token>& t);
  void node(const std::vector<Token>& t);
  void link(const std::vector<Token>& t);
  void route(const std::vector<Token>& t);
  void vnf(const std::vector<Token>& t);
  void sid(const std::vector<Token>& t);
  void chain(const std::vector<Token>& t);
  void rule(const std::vector<Token>& t);
  void bench(const std::vector<Token>& t);

  static void arity(const std::vector<Token>& t, std::size_t lo, std::size_t hi, const char* shape) {
    if (t.size() < lo || t.size() > hi) {
      throw LineError{t.front().col, std::string("expected '") + shape + "'"};
    }
  }
  static Ipv6Address addr(const Token& t) {
    auto a = Ipv6Address::try_parse(t.text);
    if (!a) throw LineError{t.col, "bad IPv6 address '" + t.text + "'"};
    return *a;
  }
  static Prefix prefix(const Token& t) {
    try {
      return Prefix::parse(t.text);
    } catch (const Error&) {
      throw LineError{t.col, "bad prefix '" + t.text + "'"};
    }
  }
  template <typename T>
  static T number(const Token& t) {
    T v{};
    if (!parse_number(t.text, v)) throw LineError{t.col, "bad number '" + t.text + "'"};
    return v;
  }

  std::string origin_;
  std::string section_;
  int lineno_ = 0;
  ScenarioConfig cfg_;
  std::vector<Diagnostic> errors_;
};

ScenarioConfig Parser::run(std::string_view text) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    ++lineno_;
    auto toks = tokenize(raw);
    if (!toks.empty()) {
      try {
        line(toks);
      } catch (const LineError& e) {
        errors_.push_back({Errc::ParseError, origin_ + ":" + std::to_string(lineno_) + ":" +
                                                 std::to_string(e.col) + ": " + e.msg});
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (!errors_.empty()) throw ConfigError(Errc::ParseError, errors_);
  return std::move(cfg_);
}

void Parser::line(const std::vector<Token>& t) {
  const std::string& head = t.front().text;
  if (head.front() == '[') {
    static const std::vector<std::string> known = {"nodes", "links", "routes", "vnfs",
                                                   "sids",  "chains", "rules", "bench"};
    if (t.size() != 1 || head.back() != ']') throw LineError{t.front().col, "bad section header"};
    const std::string name = head.substr(1, head.size() - 2);
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw LineError{t.front().col + 1, "unknown section '" + name + "'"};
    }
    section_ = name;
    return;
  }
  if (section_.empty()) throw LineError{t.front().col, "entry before any [section]"};
  if (section_ == "nodes") return node(t);
  if (section_ == "links") return link(t);
  if (section_ == "routes") return route(t);
  if (section_ == "vnfs") return vnf(t);
  if (section_ == "sids") return sid(t);
  if (section_ == "chains") return chain(t);
  if (section_ == "rules") return rule(t);
  bench(t);
}

void Parser::node(const std::vector<Token>& t) {
  arity(t, 2, 64, "ID ROLE [ADDRESS...]");
  auto role = parse_node_role(t[1].text);
  if (!role) throw LineError{t[1].col, "unknown role '" + t[1].text + "' (ingress|egress|nfv|router)"};
  NodeSpec n{t[0].text, *role, {}};
  for (std::size_t i = 2; i < t.size(); ++i) n.addresses.push_back(addr(t[i]));
  cfg_.network.nodes.push_back(std::move(n));
}

void Parser::link(const std::vector<Token>& t) {
  arity(t, 2, 2, "NODE NODE");
  cfg_.network.links.emplace_back(t[0].text, t[1].text);
}

void Parser::route(const std::vector<Token>& t) {
  arity(t, 3, 3, "NODE PREFIX NEXT_NODE");
  cfg_.network.routes.push_back({t[0].text, prefix(t[1]), t[2].text});
}

void Parser::vnf(const std::vector<Token>& t) {
  arity(t, 4, 64, "NAME NODE PERMISSION BEHAVIOUR...");
  auto perm = parse_permission(t[2].text);
  if (!perm) {
    throw LineError{t[2].col, "unknown permission '" + t[2].text +
                                  "' (insert-next|insert-anywhere|full-rewrite)"};
  }
  std::string behaviour;
  for (std::size_t i = 3; i < t.size(); ++i) behaviour += (i == 3 ? "" : " ") + t[i].text;
  try {
    cfg_.network.vnfs.push_back(Vnf{t[0].text, t[1].text, *perm, parse_behavior(behaviour)});
  } catch (const Error& e) {
    throw LineError{t[3].col, e.what()};
  }
}

void Parser::sid(const std::vector<Token>& t) {
  arity(t, 3, 5, "ADDRESS KIND NODE [INTERFACE] [VNF]");
  auto kind = parse_sid_kind(t[1].text);
  if (!kind) throw LineError{t[1].col, "unknown SID kind '" + t[1].text + "' (aware|unaware|egress)"};
  Sid s{addr(t[0]), *kind, t[2].text, Interface::Single, ""};
  if (t.size() >= 4) {
    auto iface = parse_interface(t[3].text);
    if (!iface) throw LineError{t[3].col, "unknown interface '" + t[3].text + "' (single|west|east)"};
    s.interface = *iface;
  }
  if (*kind == SidKind::EgressEndpoint) {
    if (t.size() == 5) throw LineError{t[4].col, "egress SIDs take no VNF"};
  } else {
    if (t.size() != 5) throw LineError{t.back().col, "expected 'ADDRESS KIND NODE INTERFACE VNF'"};
    s.vnf = t[4].text;
  }
  cfg_.network.sids.push_back(std::move(s));
}

void Parser::chain(const std::vector<Token>& t) {
  arity(t, 4, 5, "ID DIRECTION SOURCE SID,SID,... [peer=ID]");
  auto dir = parse_direction(t[1].text);
  if (!dir) {
    throw LineError{t[1].col, "unknown direction '" + t[1].text +
                                  "' (unidirectional|eastbound|westbound)"};
  }
  ChainSpec c;
  c.chain.chain_id = t[0].text;
  c.chain.direction = *dir;
  c.chain.ingress_source = addr(t[2]);
  int col = t[3].col;
  for (const auto& part : split_commas(t[3].text)) {
    auto a = Ipv6Address::try_parse(part);
    if (!a) throw LineError{col, "bad segment '" + part + "'"};
    c.chain.segments.push_back(*a);
    col += static_cast<int>(part.size()) + 1;
  }
  if (t.size() == 5) {
    if (t[4].text.rfind("peer=", 0) != 0 || t[4].text.size() == 5) {
      throw LineError{t[4].col, "expected peer=ID"};
    }
    c.peer = t[4].text.substr(5);
  }
  cfg_.network.chains.push_back(std::move(c));
}

void Parser::rule(const std::vector<Token>& t) {
  arity(t, 3, 3, "NODE PREFIX CHAIN");
  cfg_.network.rules.push_back({t[0].text, {prefix(t[1]), t[2].text}});
}

void Parser::bench(const std::vector<Token>& t) {
  const std::string& key = t[0].text;
  BenchSettings& b = cfg_.bench;
  auto one = [&]() -> const Token& {
    arity(t, 2, 2, (key + " VALUE").c_str());
    return t[1];
  };
  if (key == "capacity") {
    b.model.capacity = number<double>(one());
  } else if (key == "k0") {
    b.model.k0 = number<double>(one());
  } else if (key == "hook_overhead") {
    b.hook_overhead = number<double>(one());
  } else if (key == "rates") {
    const Token& v = one();
    b.rates_pps.clear();
    for (const auto& part : split_commas(v.text)) b.rates_pps.push_back(number<double>({part, v.col}));
  } else if (key == "runs") {
    b.runs = number<int>(one());
  } else if (key == "noise") {
    b.noise = number<double>(one());
  } else if (key == "seed") {
    b.seed = number<std::uint64_t>(one());
  } else if (key == "probe_packets") {
    b.probe_packets = number<std::uint64_t>(one());
  } else if (key == "payload") {
    b.payload = number<std::size_t>(one());
  } else if (key == "flow") {
    arity(t, 4, 4, "flow INGRESS SRC DST");
    b.ingress = t[1].text;
    b.src = addr(t[2]);
    b.dst = addr(t[3]);
  } else if (key == "units") {
    arity(t, 4, 4, "units F D E");
    cfg_.network.units = {number<double>(t[1]), number<double>(t[2]), number<double>(t[3])};
  } else {
    throw LineError{t[0].col, "unknown bench key '" + key + "'"};
  }
}

std::vector<Diagnostic> validate_bench(const ScenarioConfig& cfg) {
  std::vector<Diagnostic> out;
  const BenchSettings& b = cfg.bench;
  auto fail = [&](std::string m) { out.push_back({Errc::ValidationError, "bench: " + std::move(m)}); };
  try {
    b.model.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (b.hook_overhead < 0 || b.model.k0 + b.hook_overhead >= 100) fail("hook_overhead out of range");
  for (double r : b.rates_pps) {
    if (!(r > 0)) fail("rates must be > 0");
  }
  if (b.runs < 1) fail("runs must be >= 1");
  if (b.noise < 0) fail("noise must be >= 0");
  if (b.probe_packets < 1) fail("probe_packets must be >= 1");
  const UnitCosts& u = cfg.network.units;
  if (u.f < 0 || u.d < 0 || u.e < 0) fail("unit costs must be >= 0");
  if (!b.ingress.empty()) {
    auto& nodes = cfg.network.nodes;
    if (std::none_of(nodes.begin(), nodes.end(), [&](const NodeSpec& n) { return n.id == b.ingress; })) {
      out.push_back({Errc::UnknownNodeRef, "bench: flow ingress " + b.ingress + " is not a node"});
    }
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(Errc code, std::vector<Diagnostic> diagnostics)
    : Error(code, join_msgs(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::shared_ptr<const VnfBehavior> parse_behavior(std::string_view text) {
  auto t = tokenize(text);
  auto bad = [&](const std::string& why) {
    return Error(Errc::ParseError, "behaviour '" + std::string(text) + "': " + why);
  };
  if (t.empty()) throw bad("empty");
  const std::string& head = t[0].text;
  try {
    if (head == "passthrough" && t.size() == 1) return std::make_shared<PassThroughRouter>();
    if (head == "filter" && t.size() == 2) return std::make_shared<PrefixFilter>(Prefix::parse(t[1].text));
    if (head == "stamp" && t.size() == 2) {
      unsigned v = 0;
      if (!parse_number(t[1].text, v) || v > 255) throw bad("stamp value must be 0..255");
      return std::make_shared<PayloadStamper>(static_cast<std::uint8_t>(v));
    }
    if (head == "edit" && t.size() == 3 && t[1].text == "next") {
      return std::make_shared<ChainEditor>(SegmentListEdit::insert_after_current(parse_sid_list(t[2].text)));
    }
    if (head == "edit" && t.size() == 3 && t[1].text == "replace") {
      return std::make_shared<ChainEditor>(SegmentListEdit::replace(parse_sid_list(t[2].text)));
    }
    if (head == "edit" && t.size() == 4 && t[1].text == "at") {
      std::size_t pos = 0;
      if (!parse_number(t[2].text, pos)) throw bad("bad position");
      return std::make_shared<ChainEditor>(SegmentListEdit::insert_at(pos, parse_sid_list(t[3].text)));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) throw;
    throw bad(e.what());
  }
  throw bad("expected passthrough | filter PREFIX | stamp N | edit next|replace SIDS | edit at N SIDS");
}

ScenarioConfig parse_config(std::string_view text, const std::string& origin) {
  ScenarioConfig cfg = Parser(origin).run(text);
  std::vector<Diagnostic> problems = validate_network(cfg.network);
  auto bench = validate_bench(cfg);
  problems.insert(problems.end(), bench.begin(), bench.end());
  if (!problems.empty()) throw ConfigError(Errc::ValidationError, std::move(problems));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(Errc::ParseError, {{Errc::IoError, path + ": cannot open"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

std::string chain_line(const ChainSpec& c) {
  std::string out = c.chain.chain_id + " " + std::string(to_string(c.chain.direction)) + " " +
                    c.chain.ingress_source.to_string() + " " + join_addrs(c.chain.segments);
  if (!c.peer.empty()) out += " peer=" + c.peer;
  return out;
}

std::string rule_line(const RuleSpec& r) {
  return r.node + " " + r.rule.dst_prefix.to_string() + " " + r.rule.chain_id;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
  const NetworkSpec& n = cfg.network;
  std::ostringstream o;
  o << "[nodes]\n";
  for (const auto& x : n.nodes) {
    o << x.id << ' ' << to_string(x.role);
    for (const auto& a : x.addresses) o << ' ' << a.to_string();
    o << '\n';
  }
  o << "\n[links]\n";
  for (const auto& [a, b] : n.links) o << a << ' ' << b << '\n';
  o << "\n[routes]\n";
  for (const auto& r : n.routes) o << r.node << ' ' << r.prefix.to_string() << ' ' << r.next_hop << '\n';
  o << "\n[vnfs]\n";
  for (const auto& v : n.vnfs) {
    o << v.name << ' ' << v.host_node << ' ' << to_string(v.permission) << ' '
      << (v.behavior ? v.behavior->describe() : "passthrough") << '\n';
  }
  o << "\n[sids]\n";
  for (const auto& s : n.sids) {
    o << s.address.to_string() << ' ' << to_string(s.kind) << ' ' << s.host_node << ' '
      << to_string(s.interface);
    if (s.kind != SidKind::EgressEndpoint) o << ' ' << s.vnf;
    o << '\n';
  }
  o << "\n[chains]\n";
  for (const auto& c : n.chains) o << chain_line(c) << '\n';
  o << "\n[rules]\n";
  for (const auto& r : n.rules) o << rule_line(r) << '\n';

  const BenchSettings& b = cfg.bench;
  o << "\n[bench]\n";
  o << "capacity " << fmt_double(b.model.capacity) << '\n';
  o << "k0 " << fmt_double(b.model.k0) << '\n';
  o << "hook_overhead " << fmt_double(b.hook_overhead) << '\n';
  std::string rates;
  for (double r : b.rates_pps) rates += (rates.empty() ? "" : ",") + fmt_double(r);
  if (!rates.empty()) o << "rates " << rates << '\n';
  o << "runs " << b.runs << '\n';
  o << "noise " << fmt_double(b.noise) << '\n';
  o << "seed " << b.seed << '\n';
  o << "probe_packets " << b.probe_packets << '\n';
  o << "payload " << b.payload << '\n';
  if (!b.ingress.empty()) {
    o << "flow " << b.ingress << ' ' << b.src.to_string() << ' ' << b.dst.to_string() << '\n';
  }
  o << "units " << fmt_double(n.units.f) << ' ' << fmt_double(n.units.d) << ' '
    << fmt_double(n.units.e) << '\n';
  return o.str();
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, path + ": cannot write");
  out << serialize_config(cfg);
  if (!out.flush()) throw Error(Errc::IoError, path + ": write failed");
}

// ---- route add -------------------------------------------------------------------------

RouteAddResult cmd_route_add(ScenarioConfig& cfg, const std::string& node_arg,
                             const std::vector<std::string>& args) {
  const std::string usage =
      "expected: PREFIX via NEXTHOP encap seg SID,SID,... "
      "(or: encap seg6 mode encap segs SID,SID,...)";
  if (args.empty()) throw Error(Errc::ParseError, usage);
  const Prefix prefix = Prefix::parse(args[0]);

  std::vector<std::string> tail(args.begin() + 1, args.end());
  std::string segs_text;
  const bool short_form = tail.size() == 5 && tail[2] == "encap" && tail[3] == "seg";
  const bool linux_form = tail.size() == 8 && tail[2] == "encap" && tail[3] == "seg6" &&
                          tail[4] == "mode" && tail[5] == "encap" && tail[6] == "segs";
  if (tail.size() < 2 || tail[0] != "via" || !(short_form || linux_form)) {
    throw Error(Errc::ParseError, usage);
  }
  segs_text = tail.back();

  NetworkSpec& net = cfg.network;
  std::string node = node_arg;
  if (node.empty()) {
    std::vector<std::string> ingress;
    for (const auto& n : net.nodes) {
      if (n.role == NodeRole::IngressEdge) ingress.push_back(n.id);
    }
    if (ingress.size() != 1) {
      throw Error(Errc::ValidationError, "config has " + std::to_string(ingress.size()) +
                                             " ingress routers; pick one with --node");
    }
    node = ingress.front();
  }
  auto self = std::find_if(net.nodes.begin(), net.nodes.end(),
                           [&](const NodeSpec& n) { return n.id == node; });
  if (self == net.nodes.end()) throw Error(Errc::UnknownNodeRef, node);
  if (self->addresses.empty()) throw Error(Errc::ValidationError, node + " has no address");

  auto via = Ipv6Address::try_parse(tail[1]);
  if (!via) throw Error(Errc::BadNextHop, "'" + tail[1] + "' is not an IPv6 address");
  bool neighbour = false;
  for (const auto& n : net.nodes) {
    if (n.id == node || std::find(n.addresses.begin(), n.addresses.end(), *via) == n.addresses.end()) continue;
    for (const auto& [a, b] : net.links) neighbour |= (a == node && b == n.id) || (b == node && a == n.id);
  }
  if (!neighbour) throw Error(Errc::BadNextHop, tail[1] + " is not an address of a neighbour of " + node);

  std::vector<Ipv6Address> segs;
  for (const auto& part : split_commas(segs_text)) {
    auto a = Ipv6Address::try_parse(part);
    if (!a) throw Error(Errc::UnknownSegment, "'" + part + "' is not an IPv6 address");
    if (std::none_of(net.sids.begin(), net.sids.end(), [&](const Sid& s) { return s.address == *a; })) {
      throw Error(Errc::UnknownSegment, a->to_string() + " is not a defined SID");
    }
    segs.push_back(*a);
  }

  ScenarioConfig next = cfg;
  NetworkSpec& nn = next.network;
  RouteAddResult res;
  auto rule = std::find_if(nn.rules.begin(), nn.rules.end(), [&](const RuleSpec& r) {
    return r.node == node && r.rule.dst_prefix == prefix;
  });
  const std::string id = rule != nn.rules.end() ? rule->rule.chain_id : node + "@" + prefix.to_string();
  auto chain = std::find_if(nn.chains.begin(), nn.chains.end(),
                            [&](const ChainSpec& c) { return c.chain.chain_id == id; });
  const Ipv6Address source = self->addresses.front();
  if (chain == nn.chains.end()) {
    nn.chains.push_back({VnfChain{id, segs, source, Direction::Unidirectional}, ""});
    chain = std::prev(nn.chains.end());
    res.changed = true;
  } else if (chain->chain.segments != segs || chain->chain.ingress_source != source) {
    chain->chain.segments = segs;
    chain->chain.ingress_source = source;
    res.changed = true;
  }
  if (rule == nn.rules.end()) {
    nn.rules.push_back({node, {prefix, id}});
    rule = std::prev(nn.rules.end());
    res.changed = true;
  }

  if (auto problems = validate_network(nn); !problems.empty()) {
    throw Error(problems.front().code, problems.front().message);
  }
  res.chain_id = id;
  res.fragment = "[chains]\n" + chain_line(*chain) + "\n\n[rules]\n" + rule_line(*rule) + "\n";
  cfg = std::move(next);
  return res;
}

}  // namespace srv6sfc
