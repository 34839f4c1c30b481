#pragma once

#include <span>
#include <vector>

#include "csmaopt/cgc.hpp"
#include "csmaopt/graph.hpp"
#include "csmaopt/simplex.hpp"

namespace csmaopt {

using RequirementVector = std::vector<double>;

/// Threshold above which q_j counts toward the support.
inline constexpr double kSupportTol = 1e-9;

/// Throughput-maximization program over sub-network appearance
/// probabilities: column j is sub-network j, rows 0..n-1 are the per-link
/// minimum-rate constraints and row n is the probability simplex.
struct ThroughputLp {
  int n_links = 0;
  lp::LinearProgram program;
};

enum class LpStatus { kOptimal, kInfeasible, kSizeCapExceeded };

const char* to_string(LpStatus s) noexcept;

struct SupportEntry {
  SubnetworkMask mask;
  double q = 0.0;
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> q_star;           // empty unless optimal
  ThroughputVector th_star;
  OfferedLoadVector f_star;
  double objective = 0.0;
  std::size_t nonzero_count = 0;
  std::vector<SupportEntry> support;
  // When infeasible: links whose rows still carry phase-one infeasibility.
  std::vector<int> infeasible_links;
  std::vector<double> row_infeasibility;
  int iterations = 0;
  double basis_condition = 1.0;
};

/// Validates r: length n, each entry finite in [0, 1).
void validate_requirements(std::span<const double> r, int n_links);

ThroughputLp build_lp(const SubnetworkThroughputMatrix& m, std::span<const double> r);

/// Vertex-optimal solution of the program; th* is read back through the
/// rate rows, f* = th*.
LpSolution solve_lp(const ThroughputLp& instance, const lp::SimplexOptions& options = {});

/// Matrix construction, program build, solve and combination in one call.
LpSolution optimal_offered_load(const ContentionGraph& g, std::span<const double> r, int threads = 1);

struct FeasibilityReport {
  bool passes = true;
  std::vector<int> flagged_links;   // r_i above rho_i / (1 + rho_i)
  std::vector<double> bounds;       // rho_i / (1 + rho_i) per link
};

/// Necessary condition only; full feasibility is decided by the LP.
FeasibilityReport check_feasibility(const ContentionGraph& g, std::span<const double> r);

}  // namespace csmaopt
