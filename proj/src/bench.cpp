#include "srv6sfc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace srv6sfc {

void CapacityModel::validate() const {
  if (!(capacity > 0)) throw Error(Errc::BadArgument, "capacity must be > 0");
  if (!(k0 >= 0 && k0 < 100)) throw Error(Errc::BadArgument, "k0 must be in [0, 100)");
}

namespace {

double half_width(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

RatePoint evaluate_point(const CapacityModel& model, double per_packet_cost, double rate_pps,
                         double noise, int runs, std::uint64_t seed) {
  model.validate();
  if (!(rate_pps > 0)) throw Error(Errc::BadArgument, "rate must be > 0");
  if (runs < 1) throw Error(Errc::BadArgument, "runs must be >= 1");
  if (per_packet_cost < 0 || noise < 0) throw Error(Errc::BadArgument, "negative cost or noise");

  const double demand = per_packet_cost * rate_pps;
  const double u_model = std::min(100.0, model.k0 + 100.0 * demand / model.capacity);
  const double s = demand <= 0 ? 1.0 : std::min(1.0, model.available() / demand);

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(std::llround(rate_pps))};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> jitter(0.0, noise);

  std::vector<double> us;
  us.reserve(runs);
  for (int i = 0; i < runs; ++i) {
    double u = u_model;
    if (noise > 0) u = std::clamp(u_model * (1.0 + jitter(rng)), 0.0, 100.0);
    us.push_back(u);
  }
  double mean = 0;
  for (double u : us) mean += u;
  mean /= runs;

  RatePoint p;
  p.rate_pps = rate_pps;
  p.success = s;
  p.utilization = noise > 0 ? mean : u_model;
  p.runs = runs;
  p.success_ci = 0.0;  // S has no noise term
  p.utilization_ci = noise > 0 ? half_width(us) : 0.0;
  return p;
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::NoLoss: return "no-loss";
    case Region::Transition: return "transition";
    case Region::Saturation: return "saturation";
  }
  return "?";
}

Region classify_point(const RatePoint& p, double s_threshold, double u_threshold) {
  if (p.success >= s_threshold && p.utilization < u_threshold) return Region::NoLoss;
  if (p.success < s_threshold && p.utilization >= u_threshold) return Region::Saturation;
  return Region::Transition;
}

std::vector<Region> classify_regions(const std::vector<RatePoint>& points, double s_threshold,
                                     double u_threshold) {
  if (points.empty()) throw Error(Errc::EmptySweep, "no rate points to classify");
  std::vector<Region> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(classify_point(p, s_threshold, u_threshold));
  return out;
}

RegressionResult fit_linear(const std::vector<RatePoint>& points) {
  if (points.size() < 2) {
    throw Error(Errc::InsufficientPoints,
                "linear fit needs at least 2 no-loss points, got " + std::to_string(points.size()));
  }
  const double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.rate_pps / 1000.0;
    my += p.utilization;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : points) {
    const double dx = p.rate_pps / 1000.0 - mx;
    const double dy = p.utilization - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) throw Error(Errc::DegenerateX, "all rates are equal");
  RegressionResult r;
  r.m = sxy / sxx;
  r.k = my - r.m * mx;
  double sse = 0;
  for (const auto& p : points) {
    const double e = p.utilization - (r.m * p.rate_pps / 1000.0 + r.k);
    sse += e * e;
  }
  r.r_squared = syy == 0 ? 1.0 : 1.0 - sse / syy;
  r.points_used = points.size();
  return r;
}

// ---- sweeps -------------------------------------------------------------------------

std::string scenario_label(SidKind kind) {
  return kind == SidKind::SrUnaware ? "SR kernel + hook" : "SR kernel";
}

NetworkSpec with_vnf_kind(const NetworkSpec& spec, SidKind kind) {
  NetworkSpec out = spec;
  for (auto& s : out.sids) {
    if (s.kind != SidKind::EgressEndpoint) s.kind = kind;
  }
  return out;
}

std::optional<double> SweepReport::first_loaded_rate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (regions[i] != Region::NoLoss) return points[i].rate_pps;
  }
  return std::nullopt;
}

SweepReport run_sweep(const Network& net, const FlowSpec& flow, const std::string& scenario,
                      const SweepConfig& cfg) {
  if (cfg.rates_pps.empty()) throw Error(Errc::EmptySweep, "no rates given");
  cfg.model.validate();
  std::vector<double> rates = cfg.rates_pps;
  std::sort(rates.begin(), rates.end());

  SweepReport rep;
  rep.scenario = scenario;
  rep.model = cfg.model;
  for (double rate : rates) {
    FlowSpec probe = flow;
    probe.count = cfg.probe_packets;
    const FlowSummary fs = run_flow(net, probe, TraceLevel::Terminal, false);
    const CostLedger total = fs.total();
    // every probe packet enters the ledgers, including the ones a VNF drops
    const double cost = total.total_cost() / static_cast<double>(fs.injected);
    rep.per_packet_cost = cost;
    rep.points.push_back(evaluate_point(cfg.model, cost, rate, cfg.noise, cfg.runs, cfg.seed));
  }
  rep.regions = classify_regions(rep.points);

  std::vector<RatePoint> calm;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    if (rep.regions[i] == Region::NoLoss) calm.push_back(rep.points[i]);
  }
  try {
    rep.regression = fit_linear(calm);
  } catch (const Error& e) {
    rep.regression_error = e.what();
  }
  return rep;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_rate(double r) {
  return r == std::floor(r) ? fmt("%.0f", r) : fmt("%.3f", r);
}

}  // namespace

void write_points_csv(std::ostream& out, const std::vector<SweepReport>& reports) {
  out << "scenario,rate_pps,success_ratio,success_ci,utilization_pct,utilization_ci,region\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      const RatePoint& p = r.points[i];
      out << r.scenario << ',' << fmt_rate(p.rate_pps) << ',' << fmt("%.6f", p.success) << ','
          << fmt("%.6f", p.success_ci) << ',' << fmt("%.4f", p.utilization) << ','
          << fmt("%.4f", p.utilization_ci) << ',' << to_string(r.regions[i]) << '\n';
    }
  }
}

void write_regression_csv(std::ostream& out, const std::vector<SweepReport>& reports) {
  out << "scenario,m,k,r_squared,n_points\n";
  for (const auto& r : reports) {
    if (!r.regression) continue;
    out << r.scenario << ',' << fmt("%.6f", r.regression->m) << ',' << fmt("%.6f", r.regression->k)
        << ',' << fmt("%.6f", r.regression->r_squared) << ',' << r.regression->points_used << '\n';
  }
}

void write_summary_table(std::ostream& out, const std::vector<SweepReport>& reports) {
  out << "Synthetic capacity model; figures are not host CPU measurements.\n";
  auto row = [&](const char* name, auto get) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-16s", name);
    out << buf;
    for (const auto& r : reports) {
      std::snprintf(buf, sizeof buf, "%18s", get(r).c_str());
      out << buf;
    }
    out << '\n';
  };
  row("", [](const SweepReport& r) { return r.scenario; });
  row("k [CPU %]", [](const SweepReport& r) {
    return r.regression ? fmt("%.2f", r.regression->k) : std::string("n/a");
  });
  row("m [CPU %/kpps]", [](const SweepReport& r) {
    return r.regression ? fmt("%.2f", r.regression->m) : std::string("n/a");
  });
  row("cost/packet", [](const SweepReport& r) { return fmt("%.3f", r.per_packet_cost); });
}

}  // namespace srv6sfc
