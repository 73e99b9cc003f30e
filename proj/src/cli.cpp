#include "srv6sfc/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "srv6sfc/bench.hpp"
#include "srv6sfc/config.hpp"

namespace srv6sfc {

int exit_code_for(Errc code) {
  using namespace exit_code;
  switch (code) {
    case Errc::IoError: return kIo;
    case Errc::ParseError: return kParse;
    case Errc::BadPrefix: return kBadPrefix;
    case Errc::UnknownSegment: return kUnknownSegment;
    case Errc::BadNextHop: return kBadNextHop;
    case Errc::InsufficientPoints: return kInsufficientPoints;
    case Errc::DegenerateX: return kDegenerateX;
    case Errc::EmptySweep: return kEmptySweep;
    case Errc::BadArgument: return kBadArgument;
    case Errc::ValidationError:
    case Errc::UnknownNodeRef:
    case Errc::UnreachableNextHop:
    case Errc::EmptyNetwork:
    case Errc::DuplicateSidInChain:
    case Errc::UnivocalMappingViolation:
    case Errc::UnknownSid:
    case Errc::InterfaceMismatch:
    case Errc::InvalidChain:
      return kValidation;
    default: return kSimulation;
  }
}

namespace {

struct FlowOpts {
  std::string ingress, src, dst;
  std::size_t payload = 0;
};

void add_flow_opts(CLI::App* c, FlowOpts& f) {
  c->add_option("--ingress", f.ingress, "Ingress node (default from [bench] flow)");
  c->add_option("--src", f.src, "Inner source address");
  c->add_option("--dst", f.dst, "Inner destination address");
  c->add_option("--payload", f.payload, "UDP payload bytes");
}

FlowSpec resolve_flow(const ScenarioConfig& cfg, const FlowOpts& o, std::uint64_t count) {
  FlowSpec f = cfg.bench.flow(count);
  if (!o.ingress.empty()) f.ingress = o.ingress;
  if (!o.src.empty()) f.src = Ipv6Address::parse(o.src);
  if (!o.dst.empty()) f.dst = Ipv6Address::parse(o.dst);
  if (o.payload) f.payload_size = o.payload;
  if (f.ingress.empty()) throw Error(Errc::ValidationError, "no flow: set [bench] flow or --ingress");
  return f;
}

std::vector<double> parse_rates(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(Errc::BadArgument, "bad rate '" + part + "'");
    }
  }
  if (out.empty()) throw Error(Errc::EmptySweep, "--rates is empty");
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f || !(f << body) || !f.flush()) throw Error(Errc::IoError, p.string() + ": cannot write");
}

int cmd_validate(const std::string& path, bool print, std::ostream& out) {
  ScenarioConfig cfg = load_config(path);
  const NetworkSpec& n = cfg.network;
  out << "ok: " << n.nodes.size() << " nodes, " << n.links.size() << " links, " << n.sids.size()
      << " sids, " << n.vnfs.size() << " vnfs, " << n.chains.size() << " chains, "
      << n.rules.size() << " rules\n";
  if (print) out << serialize_config(cfg);
  return exit_code::kOk;
}

int cmd_route(const std::string& path, const std::string& node, bool write,
              const std::vector<std::string>& args, std::ostream& out) {
  ScenarioConfig cfg = load_config(path);
  RouteAddResult r = cmd_route_add(cfg, node, args);
  out << "# " << (r.changed ? "installed" : "unchanged") << " chain " << r.chain_id << '\n'
      << r.fragment;
  if (write && r.changed) save_config(cfg, path);
  return exit_code::kOk;
}

int cmd_run(const std::string& path, const FlowOpts& fo, std::uint64_t count,
            const std::string& trace, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_config(path);
  Network net = build_network(cfg.network);
  const FlowSpec flow = resolve_flow(cfg, fo, count);
  const TraceLevel level = trace == "terminal" ? TraceLevel::Terminal : TraceLevel::Full;
  FlowSummary s = run_flow(net, flow, level, false);
  for (const auto& e : s.trace) out << trace_json_line(e) << '\n';

  nlohmann::ordered_json sum;
  sum["injected"] = s.injected;
  sum["delivered"] = s.delivered;
  sum["dropped"] = s.dropped;
  sum["drop_reasons"] = nlohmann::ordered_json::object();
  for (const auto& [why, n] : s.drop_reasons) sum["drop_reasons"][why] = n;
  sum["ledgers"] = nlohmann::ordered_json::object();
  for (const auto& [node, l] : s.ledgers) {
    nlohmann::ordered_json j;
    j["packets"] = l.packets();
    j["f"] = l.aggregate().f;
    j["d"] = l.aggregate().d;
    j["e"] = l.aggregate().e;
    j["cost"] = l.total_cost();
    j["cost_per_packet"] = l.mean_cost_per_packet();
    sum["ledgers"][node] = j;
  }
  nlohmann::ordered_json wrap;
  wrap["summary"] = sum;
  out << wrap.dump() << '\n';

  if (s.dropped == 0) return exit_code::kOk;
  err << "error: PacketsDropped: " << s.dropped << " of " << s.injected;
  for (const auto& [why, n] : s.drop_reasons) err << ' ' << why << '=' << n;
  err << '\n';
  return exit_code::kPacketsDropped;
}

int cmd_trace(const std::string& path, const FlowOpts& fo, std::ostream& out) {
  ScenarioConfig cfg = load_config(path);
  Network net = build_network(cfg.network);
  const FlowSpec flow = resolve_flow(cfg, fo, 1);
  const Packet in = make_udp_packet(flow.src, flow.dst, flow.payload_size, flow.first_uid);
  out << "injected at " << flow.ingress << '\n' << hex_dump(serialize_packet(in));
  InjectResult r = inject(net, flow.ingress, in, TraceLevel::FullWithPackets);
  for (const auto& e : r.trace) {
    out << '\n' << e.node << ' ' << to_string(e.kind);
    if (!e.detail.empty()) out << ' ' << e.detail;
    out << '\n';
    if (e.snapshot) out << hex_dump(serialize_packet(*e.snapshot));
  }
  return r.delivered ? exit_code::kOk : exit_code::kPacketsDropped;
}

struct BenchOpts {
  std::string scenario = "both";
  std::string rates;
  int runs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double noise = -1;
  std::string out_dir = ".";
};

int cmd_bench(const std::string& path, const BenchOpts& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_config(path);
  const BenchSettings& b = cfg.bench;
  std::vector<SidKind> kinds;
  if (o.scenario == "aware" || o.scenario == "both") kinds.push_back(SidKind::SrAware);
  if (o.scenario == "unaware" || o.scenario == "both") kinds.push_back(SidKind::SrUnaware);

  SweepConfig sc;
  sc.rates_pps = o.rates.empty() ? b.rates_pps : parse_rates(o.rates);
  sc.runs = o.runs > 0 ? o.runs : b.runs;
  sc.noise = o.noise >= 0 ? o.noise : b.noise;
  sc.seed = o.seed_set ? o.seed : b.seed;
  sc.probe_packets = b.probe_packets;
  const FlowSpec flow = resolve_flow(cfg, {}, 1);

  std::vector<SweepReport> reports;
  for (SidKind kind : kinds) {
    Network net = build_network(with_vnf_kind(cfg.network, kind));
    SweepConfig k = sc;
    k.model = b.model;
    if (kind == SidKind::SrUnaware) k.model.k0 += b.hook_overhead;
    reports.push_back(run_sweep(net, flow, scenario_label(kind), k));
  }

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) throw Error(Errc::IoError, o.out_dir + ": " + ec.message());
  std::ostringstream pts, reg;
  write_points_csv(pts, reports);
  write_regression_csv(reg, reports);
  const std::filesystem::path dir(o.out_dir);
  write_file(dir / "bench_points.csv", pts.str());
  write_file(dir / "bench_regression.csv", reg.str());
  write_summary_table(out, reports);

  int rc = exit_code::kOk;
  for (const auto& r : reports) {
    if (r.regression) continue;
    err << "error: regression refused for " << r.scenario << ": " << r.regression_error << '\n';
    rc = exit_code::kInsufficientPoints;
  }
  return rc;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SRv6 service function chaining simulator", "srv6sfc"};
  app.require_subcommand(1);
  std::string config;

  auto* validate = app.add_subcommand("validate", "Load and cross-check a scenario file");
  validate->add_option("config", config, "Scenario file")->required();
  bool print = false;
  validate->add_flag("--print", print, "Print the normalised config");

  auto* route = app.add_subcommand("route", "Edit classifier routes");
  route->require_subcommand(1);
  auto* route_add = route->add_subcommand("add", "PREFIX via NEXTHOP encap seg SID,SID,...");
  std::string node;
  bool write = false;
  std::vector<std::string> route_args;
  route_add->add_option("--config", config, "Scenario file")->required();
  route_add->add_option("--node", node, "Ingress edge router (default: the only one)");
  route_add->add_flag("--write", write, "Save the updated config back to the file");
  route_add->add_option("spec", route_args, "Route specification")->required();

  FlowOpts flow;
  auto* run = app.add_subcommand("run", "Inject packets and print the trace");
  run->add_option("--config", config, "Scenario file")->required();
  std::uint64_t count = 1;
  std::string trace_level = "full";
  run->add_option("--count", count, "Packets to inject")->check(CLI::PositiveNumber);
  run->add_option("--trace", trace_level, "Trace detail")->check(CLI::IsMember({"full", "terminal"}));
  add_flow_opts(run, flow);

  auto* trace = app.add_subcommand("trace", "Hex dump one packet at every step");
  trace->add_option("--config", config, "Scenario file")->required();
  add_flow_opts(trace, flow);

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "Rate sweep over the capacity model");
  bench->add_option("--config", config, "Scenario file")->required();
  bench->add_option("--scenario", bo.scenario, "aware|unaware|both")
      ->check(CLI::IsMember({"aware", "unaware", "both"}));
  bench->add_option("--rates", bo.rates, "Comma separated rates in pps");
  bench->add_option("--runs", bo.runs, "Runs per rate")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bo.seed, "Noise seed")->each([&](const std::string&) { bo.seed_set = true; });
  bench->add_option("--noise", bo.noise, "Relative noise on utilization")->check(CLI::NonNegativeNumber);
  bench->add_option("--out", bo.out_dir, "Output directory for the CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (*validate) return cmd_validate(config, print, out);
    if (*route_add) return cmd_route(config, node, write, route_args, out);
    if (*run) return cmd_run(config, flow, count, trace_level, out, err);
    if (*trace) return cmd_trace(config, flow, out);
    if (*bench) return cmd_bench(config, bo, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return exit_code::kInternal;
  }
  return exit_code::kUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"srv6sfc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace srv6sfc
