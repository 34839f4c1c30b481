#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csmaopt/graph.hpp"
#include "csmaopt/lp.hpp"
#include "csmaopt/simulator.hpp"

namespace csmaopt {

enum class Setting { kTable1Ring, kDegreeSweep, kIntensitySweep, kRequirementSweep };

const char* to_string(Setting s) noexcept;
std::optional<Setting> parse_setting(std::string_view name) noexcept;

/// Minimum rates used in the four-link ring example.
inline const std::vector<double> kRingRequirements{0.1994, 0.3779, 0.4263, 0.4271};

struct ExperimentSpec {
  Setting setting = Setting::kDegreeSweep;
  int n_networks = 10;
  int n_links = 10;
  std::vector<double> mean_degrees{2.0, 3.0, 4.0};
  // Intensity and requirement sweeps reuse the networks of this degree.
  double sweep_degree = 2.0;
  std::vector<double> intensity_multipliers{1.0, 2.0, 3.0};
  // Requirement sweep: r_i <- max(r_i - offset, 0); 0 is the baseline.
  std::vector<double> requirement_offsets{0.0, 0.1, 0.2};
  double base_rho = kDefaultRho;
  std::uint64_t master_seed = 1;
  int sim_seeds = 10;
  double duration = 1e6;
  double warmup_fraction = 0.10;
  int threads = 1;
};

void validate(const ExperimentSpec& spec);

/// Odd links (1-based) get max(th0 - 0.2, 0), even links max(th0 - 0.1, 0).
RequirementVector derive_requirements(std::span<const double> th0);

/// One network at one sweep point.
struct NetworkRecord {
  double parameter = 0.0;
  int network_index = 0;
  std::uint64_t graph_seed = 0;
  int edges = 0;
  double mean_degree = 0.0;
  RequirementVector requirements;
  ThroughputVector th_star;
  std::vector<double> th_hat;         // pooled over simulation seeds
  std::size_t support_size = 0;
  double link_error = 0.0;            // mean_i |th*_i - th_hat_i|
  double aggregate_error = 0.0;       // |sum th* - sum th_hat|
  double link_error_pct = 0.0;        // relative to mean_i th*_i
  double aggregate_error_pct = 0.0;   // relative to sum th*
};

/// Error metrics averaged over the networks of one sweep point. The `_pct`
/// fields are relative to the optimal throughput; `_abs` are airtime
/// fractions.
struct ErrorReport {
  double parameter = 0.0;
  std::string label;
  int networks = 0;
  double mean_link_error_abs = 0.0;
  double mean_link_error_pct = 0.0;
  double mean_aggregate_error_abs = 0.0;
  double mean_aggregate_error_pct = 0.0;
};

struct RingComparison {
  RequirementVector requirements;
  LpSolution lp;
  PooledResult sim;
  double sim_aggregate = 0.0;
  double max_link_gap = 0.0;
  bool objective_ok = false;   // |objective - 1.7064| <= 1e-3
  bool per_link_ok = false;    // every |th_hat - f*| < 0.01
  bool aggregate_ok = false;   // sum th_hat within 0.01 of 1.705 and 1% of 1.7064
  bool passed() const noexcept { return lp.status == LpStatus::kOptimal && objective_ok && per_link_ok && aggregate_ok; }
};

struct SettingResult {
  ExperimentSpec spec;
  std::vector<ErrorReport> reports;
  std::vector<NetworkRecord> records;
  std::optional<RingComparison> ring;
};

/// Ring worked example: solve, simulate under f*, compare.
RingComparison run_table1_ring(std::span<const double> requirements, int sim_seeds = 10,
                               double duration = 1e6, std::uint64_t master_seed = 1,
                               int threads = 1, double rho = kDefaultRho);

/// Full pipeline per network: saturated th0, requirements, LP, simulation
/// under f*, error metrics. Throws Error(kInfeasible) if a derived
/// requirement vector is ever infeasible.
SettingResult run_setting(const ExperimentSpec& spec);

/// Seed of network k at mean degree d; shared across settings so the
/// intensity and requirement sweeps see the same graphs.
std::uint64_t network_seed(std::uint64_t master, double mean_degree, int k) noexcept;

/// Text table of the error metrics, one column per sweep point.
std::string render_table(const SettingResult& result);
std::string reports_csv(const SettingResult& result);

}  // namespace csmaopt
