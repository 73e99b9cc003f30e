#pragma once

// Rate sweeps over a synthetic capacity model of the NFV node: success
// ratio, utilization, operating regions and the linear fit U(R) = mR + k.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "srv6sfc/chain.hpp"
#include "srv6sfc/sim.hpp"

namespace srv6sfc {

struct CapacityModel {
  double capacity = 48000.0;  // cost units per second
  double k0 = 0.0;            // percent utilization with no traffic

  void validate() const;
  double available() const { return capacity * (100.0 - k0) / 100.0; }
};

struct RatePoint {
  double rate_pps = 0;
  double success = 1.0;  // S = 1 - L
  double utilization = 0;
  int runs = 1;
  double success_ci = 0;  // 95% half-widths
  double utilization_ci = 0;

  double loss() const { return 1.0 - success; }
};

/// noise is the relative standard deviation of the multiplicative jitter on U.
RatePoint evaluate_point(const CapacityModel& model, double per_packet_cost, double rate_pps,
                         double noise, int runs, std::uint64_t seed);

enum class Region { NoLoss, Transition, Saturation };

std::string_view to_string(Region r);

inline constexpr double kDefaultSThreshold = 0.999;
inline constexpr double kDefaultUThreshold = 99.0;

Region classify_point(const RatePoint& p, double s_threshold = kDefaultSThreshold,
                      double u_threshold = kDefaultUThreshold);
std::vector<Region> classify_regions(const std::vector<RatePoint>& points,
                                     double s_threshold = kDefaultSThreshold,
                                     double u_threshold = kDefaultUThreshold);

struct RegressionResult {
  double m = 0;  // percent per kpps
  double k = 0;  // percent
  double r_squared = 0;
  std::size_t points_used = 0;
};

/// OLS of U on R (kpps).
RegressionResult fit_linear(const std::vector<RatePoint>& points);

// ---- sweeps -------------------------------------------------------------------------

/// Label used in reports for a scenario kind.
std::string scenario_label(SidKind kind);

/// Copy of `spec` with every VNF SID switched to `kind`.
NetworkSpec with_vnf_kind(const NetworkSpec& spec, SidKind kind);

struct SweepConfig {
  CapacityModel model;
  std::vector<double> rates_pps;
  int runs = 30;
  double noise = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t probe_packets = 100;  // packets pushed through the simulator per rate
};

struct SweepReport {
  std::string scenario;
  double per_packet_cost = 0;
  CapacityModel model;
  std::vector<RatePoint> points;
  std::vector<Region> regions;
  std::optional<RegressionResult> regression;
  std::string regression_error;  // set when the fit was refused

  /// Rate of the first transition or saturation point, if any.
  std::optional<double> first_loaded_rate() const;
};

SweepReport run_sweep(const Network& net, const FlowSpec& flow, const std::string& scenario,
                      const SweepConfig& cfg);

void write_points_csv(std::ostream& out, const std::vector<SweepReport>& reports);
void write_regression_csv(std::ostream& out, const std::vector<SweepReport>& reports);
/// Rows k and m, one column per scenario.
void write_summary_table(std::ostream& out, const std::vector<SweepReport>& reports);

}  // namespace srv6sfc
