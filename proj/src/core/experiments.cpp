#include "csmaopt/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "csmaopt/error.hpp"
#include "csmaopt/parallel.hpp"
#include "csmaopt/product_form.hpp"

namespace csmaopt {

const char* to_string(Setting s) noexcept {
  switch (s) {
    case Setting::kTable1Ring: return "table1_ring";
    case Setting::kDegreeSweep: return "degree_sweep";
    case Setting::kIntensitySweep: return "intensity_sweep";
    case Setting::kRequirementSweep: return "requirement_sweep";
  }
  return "unknown";
}

std::optional<Setting> parse_setting(std::string_view name) noexcept {
  for (Setting s : {Setting::kTable1Ring, Setting::kDegreeSweep, Setting::kIntensitySweep,
                    Setting::kRequirementSweep})
    if (name == to_string(s)) return s;
  return std::nullopt;
}

void validate(const ExperimentSpec& spec) {
  if (spec.n_networks < 1 || spec.n_links < 1 || spec.sim_seeds < 1)
    throw Error(ErrorCode::kInvalidArgument, "experiment counts must be positive");
  if (spec.mean_degrees.empty() || spec.intensity_multipliers.empty() ||
      spec.requirement_offsets.empty())
    throw Error(ErrorCode::kInvalidArgument, "experiment sweep lists must be nonempty");
  if (!(spec.base_rho > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "base access intensity must be positive");
  for (double m : spec.intensity_multipliers)
    if (!(m > 0.0)) throw Error(ErrorCode::kInvalidArgument, "intensity multipliers must be positive");
  for (double o : spec.requirement_offsets)
    if (!(o >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "requirement offsets must be >= 0");
}

RequirementVector derive_requirements(std::span<const double> th0) {
  RequirementVector r(th0.size());
  for (std::size_t i = 0; i < th0.size(); ++i) {
    // i is 0-based, so even i is an odd link label.
    const double relax = i % 2 == 0 ? 0.2 : 0.1;
    r[i] = std::max(th0[i] - relax, 0.0);
  }
  return r;
}

std::uint64_t network_seed(std::uint64_t master, double mean_degree, int k) noexcept {
  const auto tag = static_cast<std::uint64_t>(std::llround(mean_degree * 1000.0));
  return derive_seed(derive_seed(master, tag), static_cast<std::uint64_t>(k));
}

namespace {

constexpr double kRingObjective = 1.7064;
constexpr double kRingSimAggregate = 1.705;

struct SweepPoint {
  double parameter;
  std::string label;
  double degree;
  double rho;
  double offset;
};

std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec) {
  std::vector<SweepPoint> pts;
  char buf[64];
  switch (spec.setting) {
    case Setting::kDegreeSweep:
      for (double d : spec.mean_degrees) {
        std::snprintf(buf, sizeof buf, "%g", d);
        pts.push_back({d, buf, d, spec.base_rho, 0.0});
      }
      break;
    case Setting::kIntensitySweep:
      for (double m : spec.intensity_multipliers) {
        std::snprintf(buf, sizeof buf, "%g*rho0", m);
        pts.push_back({m, m == 1.0 ? "rho0" : buf, spec.sweep_degree, m * spec.base_rho, 0.0});
      }
      break;
    case Setting::kRequirementSweep:
      for (double o : spec.requirement_offsets) {
        std::snprintf(buf, sizeof buf, "max(r-%g,0)", o);
        pts.push_back({o, o == 0.0 ? "r" : buf, spec.sweep_degree, spec.base_rho, o});
      }
      break;
    case Setting::kTable1Ring:
      break;
  }
  return pts;
}

NetworkRecord run_network(const ExperimentSpec& spec, const SweepPoint& pt, int k) {
  NetworkRecord rec;
  rec.parameter = pt.parameter;
  rec.network_index = k;
  rec.graph_seed = network_seed(spec.master_seed, pt.degree, k);
  const ContentionGraph g = random_graph(spec.n_links, pt.degree, rec.graph_seed, pt.rho);
  rec.edges = static_cast<int>(g.edges().size());
  rec.mean_degree = g.mean_degree();

  const ThroughputVector th0 = saturated_throughputs(g);
  rec.requirements = derive_requirements(th0);
  for (double& r : rec.requirements) r = std::max(r - pt.offset, 0.0);

  const LpSolution sol = optimal_offered_load(g, rec.requirements);
  if (sol.status != LpStatus::kOptimal)
    throw Error(ErrorCode::kInfeasible, "derived requirements infeasible for network " +
                                            std::to_string(k) + " at " + pt.label +
                                            " (the all-on sub-network should satisfy them)");
  rec.th_star = sol.th_star;
  rec.support_size = sol.nonzero_count;

  SimConfig cfg;
  cfg.offered_load = sol.f_star;
  cfg.duration = spec.duration;
  cfg.warmup_fraction = spec.warmup_fraction;
  // Same (graph, rho, offset) gives the same simulation streams in every
  // setting that revisits it.
  const std::uint64_t sim_master = derive_seed(
      rec.graph_seed ^ std::bit_cast<std::uint64_t>(pt.rho), std::bit_cast<std::uint64_t>(pt.offset));
  const auto seeds = derive_seeds(sim_master, static_cast<std::size_t>(spec.sim_seeds));
  const PooledResult pooled = simulate_seeds(g, cfg, seeds, 1);
  rec.th_hat = pooled.mean;

  double abs_sum = 0.0, star_sum = 0.0, hat_sum = 0.0;
  for (std::size_t i = 0; i < rec.th_star.size(); ++i) {
    abs_sum += std::abs(rec.th_star[i] - rec.th_hat[i]);
    star_sum += rec.th_star[i];
    hat_sum += rec.th_hat[i];
  }
  const double n = static_cast<double>(rec.th_star.size());
  rec.link_error = abs_sum / n;
  rec.aggregate_error = std::abs(star_sum - hat_sum);
  rec.link_error_pct = 100.0 * rec.link_error / (star_sum / n);
  rec.aggregate_error_pct = 100.0 * rec.aggregate_error / star_sum;
  return rec;
}

}  // namespace

RingComparison run_table1_ring(std::span<const double> requirements, int sim_seeds, double duration,
                               std::uint64_t master_seed, int threads, double rho) {
  RingComparison cmp;
  cmp.requirements.assign(requirements.begin(), requirements.end());
  const ContentionGraph g = ring4(rho);
  cmp.lp = optimal_offered_load(g, requirements);
  if (cmp.lp.status != LpStatus::kOptimal) return cmp;

  cmp.objective_ok = std::abs(cmp.lp.objective - kRingObjective) <= 1e-3;

  SimConfig cfg;
  cfg.offered_load = cmp.lp.f_star;
  cfg.duration = duration;
  const auto seeds = derive_seeds(derive_seed(master_seed, 0x52494E47ULL), static_cast<std::size_t>(sim_seeds));
  cmp.sim = simulate_seeds(g, cfg, seeds, threads);

  cmp.sim_aggregate = std::accumulate(cmp.sim.mean.begin(), cmp.sim.mean.end(), 0.0);
  for (std::size_t i = 0; i < cmp.sim.mean.size(); ++i)
    cmp.max_link_gap = std::max(cmp.max_link_gap, std::abs(cmp.sim.mean[i] - cmp.lp.f_star[i]));
  cmp.per_link_ok = cmp.max_link_gap < 0.01;
  cmp.aggregate_ok = std::abs(cmp.sim_aggregate - kRingSimAggregate) <= 0.01 &&
                     std::abs(cmp.sim_aggregate - kRingObjective) <= 0.01 * kRingObjective;
  return cmp;
}

SettingResult run_setting(const ExperimentSpec& spec) {
  validate(spec);
  SettingResult result;
  result.spec = spec;

  if (spec.setting == Setting::kTable1Ring) {
    result.ring = run_table1_ring(kRingRequirements, spec.sim_seeds, spec.duration, spec.master_seed,
                                  spec.threads, spec.base_rho);
    const RingComparison& cmp = *result.ring;
    if (cmp.lp.status == LpStatus::kOptimal) {
      NetworkRecord rec;
      rec.edges = 4;
      rec.mean_degree = 2.0;
      rec.requirements = cmp.requirements;
      rec.th_star = cmp.lp.th_star;
      rec.th_hat = cmp.sim.mean;
      rec.support_size = cmp.lp.nonzero_count;
      double abs_sum = 0.0;
      for (std::size_t i = 0; i < rec.th_star.size(); ++i) abs_sum += std::abs(rec.th_star[i] - rec.th_hat[i]);
      rec.link_error = abs_sum / 4.0;
      rec.aggregate_error = std::abs(cmp.lp.objective - cmp.sim_aggregate);
      rec.link_error_pct = 100.0 * rec.link_error / (cmp.lp.objective / 4.0);
      rec.aggregate_error_pct = 100.0 * rec.aggregate_error / cmp.lp.objective;
      result.records.push_back(rec);
      result.reports.push_back({0.0, "ring", 1, rec.link_error, rec.link_error_pct,
                                rec.aggregate_error, rec.aggregate_error_pct});
    }
    return result;
  }

  const std::vector<SweepPoint> pts = sweep_points(spec);
  const std::size_t per_point = static_cast<std::size_t>(spec.n_networks);
  result.records.resize(pts.size() * per_point);
  parallel_for(result.records.size(), spec.threads, [&](std::size_t job) {
    result.records[job] = run_network(spec, pts[job / per_point], static_cast<int>(job % per_point));
  });

  for (std::size_t p = 0; p < pts.size(); ++p) {
    ErrorReport rep;
    rep.parameter = pts[p].parameter;
    rep.label = pts[p].label;
    rep.networks = spec.n_networks;
    for (std::size_t k = 0; k < per_point; ++k) {
      const NetworkRecord& rec = result.records[p * per_point + k];
      rep.mean_link_error_abs += rec.link_error;
      rep.mean_link_error_pct += rec.link_error_pct;
      rep.mean_aggregate_error_abs += rec.aggregate_error;
      rep.mean_aggregate_error_pct += rec.aggregate_error_pct;
    }
    const double cnt = static_cast<double>(per_point);
    rep.mean_link_error_abs /= cnt;
    rep.mean_link_error_pct /= cnt;
    rep.mean_aggregate_error_abs /= cnt;
    rep.mean_aggregate_error_pct /= cnt;
    result.reports.push_back(rep);
  }
  return result;
}

std::string render_table(const SettingResult& result) {
  std::ostringstream out;
  char buf[128];
  const auto& spec = result.spec;
  if (spec.setting == Setting::kTable1Ring) {
    out << "Four-link ring, rho = " << spec.base_rho << "\n";
    if (!result.ring || result.ring->lp.status != LpStatus::kOptimal) {
      out << "LP status: infeasible\n";
      return out.str();
    }
    const RingComparison& c = *result.ring;
    out << "link      r        f*       th_hat\n";
    for (std::size_t i = 0; i < c.requirements.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%-6zu %8.4f %8.4f %8.4f\n", i + 1, c.requirements[i], c.lp.f_star[i],
                    c.sim.mean[i]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "sum    %8.4f %8.4f %8.4f\n",
                  std::accumulate(c.requirements.begin(), c.requirements.end(), 0.0), c.lp.objective,
                  c.sim_aggregate);
    out << buf;
    out << "objective within 1e-3 of 1.7064:   " << (c.objective_ok ? "pass" : "FAIL") << "\n";
    out << "per-link |th_hat - f*| < 0.01:     " << (c.per_link_ok ? "pass" : "FAIL") << "\n";
    out << "aggregate 1.705 +- 0.01, 1% of opt: " << (c.aggregate_ok ? "pass" : "FAIL") << "\n";
    return out.str();
  }

  const char* header = spec.setting == Setting::kDegreeSweep      ? "Mean Link Degree"
                       : spec.setting == Setting::kIntensitySweep ? "Access Intensity"
                                                                  : "Requirement";
  std::snprintf(buf, sizeof buf, "%-36s", header);
  out << buf;
  for (const auto& r : result.reports) {
    std::snprintf(buf, sizeof buf, "%14s", r.label.c_str());
    out << buf;
  }
  out << "\n";
  auto line = [&](const char* name, auto field, bool pct) {
    std::snprintf(buf, sizeof buf, "%-36s", name);
    out << buf;
    for (const auto& r : result.reports) {
      if (pct)
        std::snprintf(buf, sizeof buf, "%13.4f%%", field(r));
      else
        std::snprintf(buf, sizeof buf, "%14.6f", field(r));
      out << buf;
    }
    out << "\n";
  };
  line("Mean Link Throughput Errors", [](const ErrorReport& r) { return r.mean_link_error_pct; }, true);
  line("Mean Aggregate Throughput Errors", [](const ErrorReport& r) { return r.mean_aggregate_error_pct; }, true);
  line("Mean Link Error (airtime)", [](const ErrorReport& r) { return r.mean_link_error_abs; }, false);
  line("Mean Aggregate Error (airtime)", [](const ErrorReport& r) { return r.mean_aggregate_error_abs; }, false);
  out << "(" << spec.n_networks << " networks x " << spec.n_links << " links, " << spec.sim_seeds
      << " seeds x " << spec.duration << " time units; % relative to optimal throughput)\n";
  return out.str();
}

std::string reports_csv(const SettingResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "setting,parameter,label,networks,mean_link_error_pct,mean_aggregate_error_pct,"
         "mean_link_error_abs,mean_aggregate_error_abs\n";
  for (const auto& r : result.reports)
    out << to_string(result.spec.setting) << "," << r.parameter << "," << r.label << "," << r.networks << ","
        << r.mean_link_error_pct << "," << r.mean_aggregate_error_pct << "," << r.mean_link_error_abs << ","
        << r.mean_aggregate_error_abs << "\n";
  return out.str();
}

}  // namespace csmaopt
