#include "csmaopt/lp.hpp"

#include <algorithm>
#include <cmath>

#include "csmaopt/error.hpp"
#include "csmaopt/numeric.hpp"

namespace csmaopt {

const char* to_string(LpStatus s) noexcept {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kSizeCapExceeded: return "size_cap_exceeded";
  }
  return "unknown";
}

void validate_requirements(std::span<const double> r, int n_links) {
  if (r.size() != static_cast<std::size_t>(n_links))
    throw Error(ErrorCode::kDimensionMismatch, "requirement vector has " + std::to_string(r.size()) +
                                                   " entries for " + std::to_string(n_links) + " links");
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!(r[i] >= 0.0 && r[i] < 1.0))
      throw Error(ErrorCode::kInvalidArgument,
                  "requirement of link " + std::to_string(i + 1) + " is outside [0, 1)");
}

ThroughputLp build_lp(const SubnetworkThroughputMatrix& m, std::span<const double> r) {
  const int n = m.link_count();
  validate_requirements(r, n);
  const int cols = static_cast<int>(m.subnet_count());
  ThroughputLp out{n, lp::LinearProgram(n + 1, cols)};
  auto& p = out.program;
  for (int j = 0; j < cols; ++j) {
    const auto row = m.row(static_cast<std::size_t>(j));
    for (int i = 0; i < n; ++i) p.coeff(i, j) = row[static_cast<std::size_t>(i)];
    p.coeff(n, j) = 1.0;
    p.objective[static_cast<std::size_t>(j)] = m.aggregate(static_cast<std::size_t>(j));
    p.lower[static_cast<std::size_t>(j)] = 0.0;
    p.upper[static_cast<std::size_t>(j)] = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    p.sense[static_cast<std::size_t>(i)] = lp::RowSense::kGreaterEqual;
    p.rhs[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)];
  }
  p.sense[static_cast<std::size_t>(n)] = lp::RowSense::kEqual;
  p.rhs[static_cast<std::size_t>(n)] = 1.0;
  return out;
}

LpSolution solve_lp(const ThroughputLp& instance, const lp::SimplexOptions& options) {
  const auto& p = instance.program;
  const int n = instance.n_links;
  if (p.rows() != n + 1)
    throw Error(ErrorCode::kDimensionMismatch, "throughput program must have n + 1 rows");

  const lp::SimplexResult res = lp::solve(p, options);
  LpSolution sol;
  sol.iterations = res.iterations;
  sol.basis_condition = res.basis_condition;
  sol.row_infeasibility = res.row_infeasibility;

  if (res.status == lp::SolveStatus::kInfeasible) {
    sol.status = LpStatus::kInfeasible;
    for (int i = 0; i < n; ++i)
      if (res.row_infeasibility[static_cast<std::size_t>(i)] > options.feasibility_tol) sol.infeasible_links.push_back(i);
    return sol;
  }
  if (res.status != lp::SolveStatus::kOptimal) {
    // Bounded program with a finite feasible region: anything else is a
    // solver failure rather than a property of the instance.
    throw Error(ErrorCode::kNumerical, std::string("simplex terminated with status ") +
                                           lp::to_string(res.status) + " after " +
                                           std::to_string(res.iterations) + " iterations, basis condition " +
                                           std::to_string(res.basis_condition));
  }

  sol.status = LpStatus::kOptimal;
  sol.q_star = res.x;
  for (double& q : sol.q_star) q = std::clamp(q, 0.0, 1.0);

  sol.th_star.assign(static_cast<std::size_t>(n), 0.0);
  CompensatedSum objective;
  for (int i = 0; i < n; ++i) {
    CompensatedSum s;
    for (int j = 0; j < p.cols(); ++j) s.add(p.coeff(i, j) * sol.q_star[static_cast<std::size_t>(j)]);
    sol.th_star[static_cast<std::size_t>(i)] = s.value();
    objective.add(s.value());
  }
  sol.objective = objective.value();
  sol.f_star = offered_load_from_throughput(sol.th_star);

  for (int j = 0; j < p.cols(); ++j) {
    const double q = sol.q_star[static_cast<std::size_t>(j)];
    if (q > kSupportTol) sol.support.push_back({{static_cast<std::uint32_t>(j)}, q});
  }
  sol.nonzero_count = sol.support.size();
  return sol;
}

LpSolution optimal_offered_load(const ContentionGraph& g, std::span<const double> r, int threads) {
  validate_requirements(r, g.size());
  if (g.size() > kMaxDenseLinks) {
    LpSolution sol;
    sol.status = LpStatus::kSizeCapExceeded;
    return sol;
  }
  const SubnetworkThroughputMatrix m = subnetwork_throughput_matrix(g, threads);
  LpSolution sol = solve_lp(build_lp(m, r));
  if (sol.status == LpStatus::kOptimal) {
    sol.th_star = combine_throughputs(m, sol.q_star);
    sol.f_star = offered_load_from_throughput(sol.th_star);
  }
  return sol;
}

FeasibilityReport check_feasibility(const ContentionGraph& g, std::span<const double> r) {
  if (r.size() != static_cast<std::size_t>(g.size()))
    throw Error(ErrorCode::kDimensionMismatch, "requirement vector length does not match link count");
  FeasibilityReport rep;
  for (int i = 0; i < g.size(); ++i) {
    const double bound = g.max_throughput(i);
    rep.bounds.push_back(bound);
    if (r[static_cast<std::size_t>(i)] > bound) {
      rep.flagged_links.push_back(i);
      rep.passes = false;
    }
  }
  return rep;
}

}  // namespace csmaopt
