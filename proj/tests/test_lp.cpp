#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "csmaopt/cgc.hpp"
#include "csmaopt/error.hpp"
#include "csmaopt/lp.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace csmaopt;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

std::vector<std::vector<double>> rows_of(const SubnetworkThroughputMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j < m.subnet_count(); ++j) out.emplace_back(m.row(j).begin(), m.row(j).end());
  return out;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("simplex: textbook maximum") {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
  lp::LinearProgram p(3, 2);
  p.objective = {3, 5};
  p.coeff(0, 0) = 1;
  p.coeff(1, 1) = 2;
  p.coeff(2, 0) = 3;
  p.coeff(2, 1) = 2;
  p.sense = {lp::RowSense::kLessEqual, lp::RowSense::kLessEqual, lp::RowSense::kLessEqual};
  p.rhs = {4, 12, 18};
  const auto res = lp::solve(p);
  REQUIRE(res.status == lp::SolveStatus::kOptimal);
  CHECK(res.objective == Approx(36));
  CHECK(res.x[0] == Approx(2));
  CHECK(res.x[1] == Approx(6));
}

TEST_CASE("simplex: equality and greater-equal rows") {
  // max x + y  s.t. x + y = 3, x >= 1 (as row), y - x >= 0
  lp::LinearProgram p(3, 2);
  p.objective = {1, 2};
  p.coeff(0, 0) = 1;
  p.coeff(0, 1) = 1;
  p.coeff(1, 0) = 1;
  p.coeff(2, 0) = -1;
  p.coeff(2, 1) = 1;
  p.sense = {lp::RowSense::kEqual, lp::RowSense::kGreaterEqual, lp::RowSense::kGreaterEqual};
  p.rhs = {3, 1, 0};
  const auto res = lp::solve(p);
  REQUIRE(res.status == lp::SolveStatus::kOptimal);
  CHECK(res.x[0] == Approx(1));
  CHECK(res.x[1] == Approx(2));
  CHECK(res.objective == Approx(5));
}

TEST_CASE("simplex: infeasible and unbounded") {
  lp::LinearProgram inf(2, 1);
  inf.objective = {1};
  inf.coeff(0, 0) = 1;
  inf.coeff(1, 0) = 1;
  inf.sense = {lp::RowSense::kGreaterEqual, lp::RowSense::kLessEqual};
  inf.rhs = {2, 1};
  const auto r1 = lp::solve(inf);
  CHECK(r1.status == lp::SolveStatus::kInfeasible);
  CHECK(std::any_of(r1.row_infeasibility.begin(), r1.row_infeasibility.end(), [](double v) { return v > 1e-9; }));

  lp::LinearProgram unb(1, 2);
  unb.objective = {1, 1};
  unb.coeff(0, 0) = 1;
  unb.coeff(0, 1) = -1;
  unb.sense = {lp::RowSense::kLessEqual};
  unb.rhs = {1};
  CHECK(lp::solve(unb).status == lp::SolveStatus::kUnbounded);
}

TEST_CASE("simplex: upper bounds are handled by bound flips") {
  // max x + y + z  s.t. x + y + z <= 10, each variable in [0, 2]
  lp::LinearProgram p(1, 3);
  p.objective = {1, 1, 1};
  for (int c = 0; c < 3; ++c) p.coeff(0, c) = 1;
  p.upper = {2, 2, 2};
  p.sense = {lp::RowSense::kLessEqual};
  p.rhs = {10};
  const auto res = lp::solve(p);
  REQUIRE(res.status == lp::SolveStatus::kOptimal);
  CHECK(res.objective == Approx(6));
  for (double v : res.x) CHECK(v == Approx(2));
}

TEST_CASE("simplex: degenerate cycling example terminates") {
  // Beale's example; Dantzig's rule cycles without an anti-cycling guard.
  lp::LinearProgram p(3, 4);
  p.objective = {0.75, -20, 0.5, -6};
  const double a[3][4] = {{0.25, -8, -1, 9}, {0.5, -12, -0.5, 3}, {0, 0, 1, 0}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) p.coeff(r, c) = a[r][c];
  p.sense.assign(3, lp::RowSense::kLessEqual);
  p.rhs = {0, 0, 1};
  const auto res = lp::solve(p);
  REQUIRE(res.status == lp::SolveStatus::kOptimal);
  CHECK(res.objective == Approx(1.25));
}

TEST_CASE("program dimensions") {
  for (int n : {1, 4, 10}) {
    const ContentionGraph g(n, {}, std::vector<double>(static_cast<std::size_t>(n), 1.0));
    const auto inst = build_lp(subnetwork_throughput_matrix(g), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    CHECK(inst.n_links == n);
    CHECK(inst.program.cols() == (1 << n));
    CHECK(inst.program.rows() == n + 1);
    CHECK(inst.program.sense.back() == lp::RowSense::kEqual);
    CHECK(inst.program.upper.front() == 1.0);
  }
}

TEST_CASE("single link") {
  const ContentionGraph g(1, {}, {kDefaultRho});
  const auto s = optimal_offered_load(g, std::vector<double>{0.5});
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.q_star[0] == Approx(0.0).epsilon(1e-9));
  CHECK(s.q_star[1] == Approx(1.0).epsilon(1e-9));
  CHECK(s.objective == Approx(0.8426386353622458).epsilon(1e-12));
  CHECK(s.f_star[0] == Approx(0.8426386353622458).epsilon(1e-12));

  const auto bad = optimal_offered_load(g, std::vector<double>{0.9});
  CHECK(bad.status == LpStatus::kInfeasible);
  CHECK(bad.q_star.empty());
  CHECK(bad.infeasible_links == std::vector<int>{0});
}

TEST_CASE("ring optimum") {
  const std::vector<double> r{0.1994, 0.3779, 0.4263, 0.4271};
  const auto s = optimal_offered_load(ring4(), r);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == Approx(1.7063794487588824).epsilon(1e-8));
  CHECK(s.objective == Approx(1.7064).epsilon(1e-4));
  CHECK(s.nonzero_count == 2);
  REQUIRE(s.support.size() == 2);
  CHECK(s.support[0].mask.bits == 12);
  CHECK(s.support[0].q == Approx(0.0011989429135592644).epsilon(1e-8));
  CHECK(s.support[1].mask.bits == 15);
  CHECK(s.support[1].q == Approx(0.9988010570864407).epsilon(1e-8));
  CHECK(s.f_star[0] == Approx(0.42608972).epsilon(1e-7));
  CHECK(s.f_star[3] == Approx(0.4271).epsilon(1e-9));
  CHECK(s.f_star == s.th_star);

  const auto free = optimal_offered_load(ring4(), std::vector<double>(4, 0.0));
  CHECK(free.objective == Approx(1.7064047794357329).epsilon(1e-10));
}

TEST_CASE("edgeless pair runs everything") {
  const ContentionGraph g(2, {}, {kDefaultRho, kDefaultRho});
  const auto s = optimal_offered_load(g, std::vector<double>{0.0, 0.0});
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == Approx(1.6852772707244916).epsilon(1e-12));
  CHECK(s.q_star[3] == Approx(1.0));
}

TEST_CASE("requirements equal to the saturated throughputs are feasible") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testutil::arbitrary_graph(rng, 1, 7);
    const auto r = saturated_throughputs(g);
    const auto s = optimal_offered_load(g, r);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective >= std::accumulate(r.begin(), r.end(), 0.0) - 1e-9);
  }
}

TEST_CASE("solution invariants on random instances") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int optimal = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const auto g = testutil::arbitrary_graph(rng, 2, 7);
    std::vector<double> r(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) r[static_cast<std::size_t>(i)] = 0.6 * u(rng) * g.max_throughput(i);
    const auto m = subnetwork_throughput_matrix(g);
    const auto s = solve_lp(build_lp(m, r));
    if (s.status != LpStatus::kOptimal) {
      CHECK(!s.infeasible_links.empty());
      continue;
    }
    ++optimal;
    CHECK(s.nonzero_count <= static_cast<std::size_t>(g.size() + 1));
    CHECK(s.support.size() == s.nonzero_count);
    double sum = 0.0;
    for (double q : s.q_star) {
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      sum += q;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-9));
    const auto th = combine_throughputs(m, s.q_star);
    double total = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      CHECK(th[i] >= r[i] - 1e-9);
      CHECK(th[i] == Approx(s.th_star[i]).epsilon(1e-9));
      total += th[i];
    }
    CHECK(total == Approx(s.objective).epsilon(1e-9));
    // Never worse than the point mass on the all-on sub-network when that one is feasible.
    const auto all_on = m.row(m.subnet_count() - 1);
    bool all_on_feasible = true;
    for (std::size_t i = 0; i < r.size(); ++i) all_on_feasible &= all_on[i] >= r[i];
    if (all_on_feasible) CHECK(s.objective >= m.aggregate(m.subnet_count() - 1) - 1e-9);
  }
  CHECK(optimal > 40);
}

TEST_CASE("agrees with vertex enumeration") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& edges : oracle::nonisomorphic_graphs(n)) {
      const auto g = testutil::from_edges(n, edges);
      const auto m = subnetwork_throughput_matrix(g);
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> r(static_cast<std::size_t>(n));
        for (auto& v : r) v = 0.85 * u(rng);
        const auto ref = oracle::lp_by_vertex_enumeration(rows_of(m), r);
        const auto s = solve_lp(build_lp(m, r));
        CHECK((s.status == LpStatus::kOptimal) == ref.feasible);
        if (ref.feasible && s.status == LpStatus::kOptimal) CHECK(s.objective == Approx(ref.objective).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("scaling rho up never lowers the optimum for a fixed feasible r") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 15; ++trial) {
    const auto g = testutil::arbitrary_graph(rng, 2, 6);
    std::vector<double> r(static_cast<std::size_t>(g.size()), 0.0);
    double prev = -1.0;
    for (double scale : {1.0, 2.0, 4.0}) {
      std::vector<double> rho = testutil::rho_of(g);
      for (auto& v : rho) v *= scale;
      const auto s = optimal_offered_load(g.with_rho(rho), r);
      REQUIRE(s.status == LpStatus::kOptimal);
      CHECK(s.objective >= prev - 1e-9);
      prev = s.objective;
    }
  }
}

TEST_CASE("size cap and requirement validation") {
  const ContentionGraph big(21, {}, std::vector<double>(21, 1.0));
  const auto s = optimal_offered_load(big, std::vector<double>(21, 0.1));
  CHECK(s.status == LpStatus::kSizeCapExceeded);

  CHECK(code_of([] { validate_requirements(std::vector<double>{0.1}, 2); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { validate_requirements(std::vector<double>{-0.1, 0.1}, 2); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { validate_requirements(std::vector<double>{1.0, 0.1}, 2); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { validate_requirements(std::vector<double>{std::nan(""), 0.1}, 2); }) ==
        ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(validate_requirements(std::vector<double>{0.0, 0.99}, 2));
}

TEST_CASE("necessary-condition pre-check") {
  const auto ok = check_feasibility(ring4(), std::vector<double>{0.1994, 0.3779, 0.4263, 0.4271});
  CHECK(ok.passes);
  CHECK(ok.bounds[0] == Approx(0.8426386353622458));
  const auto bad = check_feasibility(ring4(), std::vector<double>{0.85, 0.0, 0.9, 0.0});
  CHECK_FALSE(bad.passes);
  CHECK(bad.flagged_links == std::vector<int>{0, 2});
  // Passing the pre-check does not imply feasibility.
  const auto tight = std::vector<double>{0.8, 0.0, 0.8, 0.0};
  CHECK(check_feasibility(ring4(), tight).passes);
  CHECK(optimal_offered_load(ring4(), tight).status == LpStatus::kInfeasible);
}

}  // TEST_SUITE
