#include "doctest.h"

#include "csmaopt/error.hpp"
#include "csmaopt/experiments.hpp"

using namespace csmaopt;
using doctest::Approx;

namespace {

ExperimentSpec small_spec(Setting s) {
  ExperimentSpec spec;
  spec.setting = s;
  spec.n_networks = 2;
  spec.n_links = 6;
  spec.mean_degrees = {2.0, 3.0};
  spec.intensity_multipliers = {1.0, 2.0};
  spec.requirement_offsets = {0.0, 0.1};
  spec.sim_seeds = 2;
  spec.duration = 2e4;
  spec.master_seed = 3;
  return spec;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("requirement derivation") {
  CHECK(derive_requirements(std::vector<double>{0.5, 0.5}) == std::vector<double>{0.3, 0.4});
  CHECK(derive_requirements(std::vector<double>{0.05, 0.05}) == std::vector<double>{0.0, 0.0});
  const auto ring = derive_requirements(std::vector<double>(4, 0.4266011948589332));
  CHECK(ring[0] == Approx(0.2266011948589332));
  CHECK(ring[1] == Approx(0.3266011948589332));
  CHECK(ring[2] == Approx(0.2266011948589332));
  CHECK(ring[3] == Approx(0.3266011948589332));
}

TEST_CASE("setting names") {
  for (Setting s : {Setting::kTable1Ring, Setting::kDegreeSweep, Setting::kIntensitySweep,
                    Setting::kRequirementSweep})
    CHECK(parse_setting(to_string(s)) == s);
  CHECK_FALSE(parse_setting("table9").has_value());
  CHECK_FALSE(parse_setting("").has_value());
}

TEST_CASE("ring comparison without requirements") {
  const auto c = run_table1_ring(std::vector<double>(4, 0.0), 1, 2e4);
  REQUIRE(c.lp.status == LpStatus::kOptimal);
  CHECK(c.lp.objective == Approx(1.7064).epsilon(1e-3));
  CHECK(c.objective_ok);
}

TEST_CASE("ring comparison with an infeasible requirement") {
  const auto c = run_table1_ring(std::vector<double>{0.85, 0.0, 0.0, 0.0}, 1, 1e3);
  CHECK(c.lp.status == LpStatus::kInfeasible);
  CHECK_FALSE(c.passed());
  CHECK(c.sim.runs.empty());
}

TEST_CASE("network seeds are shared and distinct") {
  CHECK(network_seed(1, 2.0, 0) == network_seed(1, 2.0, 0));
  CHECK(network_seed(1, 2.0, 0) != network_seed(1, 2.0, 1));
  CHECK(network_seed(1, 2.0, 0) != network_seed(1, 3.0, 0));
  CHECK(network_seed(1, 2.0, 0) != network_seed(2, 2.0, 0));
}

TEST_CASE("small sweeps are deterministic and share the baseline") {
  const auto a = run_setting(small_spec(Setting::kDegreeSweep));
  auto spec = small_spec(Setting::kDegreeSweep);
  spec.threads = 3;
  const auto b = run_setting(spec);
  REQUIRE(a.reports.size() == 2);
  REQUIRE(a.records.size() == 4);
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].th_hat == b.records[k].th_hat);
    CHECK(a.records[k].th_star == b.records[k].th_star);
  }
  CHECK(a.reports[0].label == "2");

  const auto intensity = run_setting(small_spec(Setting::kIntensitySweep));
  const auto requirement = run_setting(small_spec(Setting::kRequirementSweep));
  // The first point of each sweep is the degree-2 baseline.
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(intensity.records[k].th_hat == a.records[k].th_hat);
    CHECK(requirement.records[k].th_hat == a.records[k].th_hat);
  }
  CHECK(intensity.reports[0].mean_link_error_pct == a.reports[0].mean_link_error_pct);

  for (const auto& rec : requirement.records) {
    CHECK(rec.support_size >= 1);
    CHECK(rec.support_size <= 7);
    for (std::size_t i = 0; i < rec.requirements.size(); ++i) CHECK(rec.th_star[i] >= rec.requirements[i] - 1e-9);
  }
  // Lowering the requirements relaxes the program.
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& base = requirement.records[k];
    const auto& relaxed = requirement.records[2 + k];
    double s0 = 0, s1 = 0;
    for (double v : base.th_star) s0 += v;
    for (double v : relaxed.th_star) s1 += v;
    CHECK(s1 >= s0 - 1e-9);
  }
}

TEST_CASE("longer simulations shrink the error") {
  auto spec = small_spec(Setting::kDegreeSweep);
  spec.mean_degrees = {2.0};
  spec.sim_seeds = 1;
  spec.duration = 1e5;
  const auto short_run = run_setting(spec);
  spec.duration = 1e7;
  const auto long_run = run_setting(spec);
  CHECK(long_run.reports[0].mean_link_error_abs <= short_run.reports[0].mean_link_error_abs);
}

TEST_CASE("rendering") {
  auto spec = small_spec(Setting::kDegreeSweep);
  const auto res = run_setting(spec);
  const auto table = render_table(res);
  CHECK(table.find("Mean Link Degree") != std::string::npos);
  CHECK(table.find("Mean Link Throughput Errors") != std::string::npos);
  CHECK(table.find("Mean Aggregate Throughput Errors") != std::string::npos);
  const auto csv = reports_csv(res);
  CHECK(csv.rfind("setting,parameter,label,networks,", 0) == 0);
  CHECK(csv.find("degree_sweep,2,2,2,") != std::string::npos);

  ExperimentSpec ring;
  ring.setting = Setting::kTable1Ring;
  ring.sim_seeds = 1;
  ring.duration = 1e4;
  const auto rr = run_setting(ring);
  REQUIRE(rr.ring.has_value());
  CHECK(render_table(rr).find("Four-link ring") != std::string::npos);
}

TEST_CASE("spec validation") {
  auto spec = small_spec(Setting::kDegreeSweep);
  spec.n_networks = 0;
  CHECK_THROWS_AS(run_setting(spec), Error);
  spec = small_spec(Setting::kIntensitySweep);
  spec.intensity_multipliers = {-1.0};
  CHECK_THROWS_AS(run_setting(spec), Error);
  spec = small_spec(Setting::kRequirementSweep);
  spec.requirement_offsets = {};
  CHECK_THROWS_AS(run_setting(spec), Error);
}

}  // TEST_SUITE
