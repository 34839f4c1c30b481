#include "csmaopt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "csmaopt/error.hpp"

namespace csmaopt {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kCapExceeded: return "size cap exceeded";
    case ErrorCode::kNumerical: return "numerical failure";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kRetryExhausted: return "retry budget exhausted";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

SubnetworkMask parse_mask(std::string_view text) {
  int base = 10;
  std::string_view digits = text;
  if (text.starts_with("0b") || text.starts_with("0B")) {
    base = 2;
    digits.remove_prefix(2);
  } else if (text.starts_with("0x") || text.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || v > 0xFFFFFFFFULL)
    throw Error(ErrorCode::kParse, "invalid mask '" + std::string(text) + "'");
  return {static_cast<std::uint32_t>(v)};
}

std::vector<double> parse_vector(std::string_view text) {
  std::string cleaned;
  bool comment = false;
  for (char c : text) {
    if (c == '#') comment = true;
    if (c == '\n') comment = false;
    if (comment) continue;
    cleaned.push_back(c == ',' || c == ';' || c == '[' || c == ']' ? ' ' : c);
  }
  std::istringstream in(cleaned);
  std::vector<double> out;
  for (std::string tok; in >> tok;) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorCode::kParse, "invalid number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> read_vector_arg(const std::string& arg) {
  try {
    auto v = parse_vector(arg);
    if (!v.empty()) return v;
  } catch (const Error&) {
  }
  std::ifstream in(arg);
  if (!in) throw Error(ErrorCode::kParse, "'" + arg + "' is neither a number list nor a readable file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_vector(ss.str());
}

nlohmann::json to_json(const LpSolution& sol) {
  nlohmann::json j;
  j["status"] = to_string(sol.status);
  j["iterations"] = sol.iterations;
  j["basis_condition"] = sol.basis_condition;
  if (sol.status == LpStatus::kOptimal) {
    j["objective"] = sol.objective;
    j["f_star"] = sol.f_star;
    j["th_star"] = sol.th_star;
    j["support_size"] = sol.nonzero_count;
    auto support = nlohmann::json::array();
    for (const auto& e : sol.support) support.push_back({{"mask", e.mask.bits}, {"q", e.q}});
    j["support"] = support;
  } else if (sol.status == LpStatus::kInfeasible) {
    std::vector<int> links;
    for (int i : sol.infeasible_links) links.push_back(i + 1);
    j["certificate"] = {{"links", links}, {"row_infeasibility", sol.row_infeasibility}};
  }
  return j;
}

nlohmann::json to_json(const SimResult& res, bool include_queue) {
  nlohmann::json j;
  j["seed"] = res.seed;
  j["th_hat"] = res.th_hat;
  j["events_processed"] = res.events_processed;
  j["measured_time"] = res.measured_time;
  j["overlap_violations"] = res.overlap_violations;
  if (include_queue) {
    auto q = nlohmann::json::array();
    for (const auto& s : res.queue)
      q.push_back({{"mean_length", s.mean_length},
                   {"empty_fraction", s.empty_fraction},
                   {"final_length", s.final_length},
                   {"saturated", s.saturated}});
    j["queue"] = q;
  }
  return j;
}

nlohmann::json to_json(const PooledResult& pooled) {
  nlohmann::json j;
  j["th_hat"] = pooled.mean;
  j["std_error"] = pooled.std_error;
  auto runs = nlohmann::json::array();
  for (const auto& r : pooled.runs) runs.push_back(to_json(r));
  j["runs"] = runs;
  return j;
}

nlohmann::json to_json(const SettingResult& result) {
  const auto& s = result.spec;
  nlohmann::json j;
  j["setting"] = to_string(s.setting);
  j["spec"] = {{"n_networks", s.n_networks},
               {"n_links", s.n_links},
               {"mean_degrees", s.mean_degrees},
               {"sweep_degree", s.sweep_degree},
               {"intensity_multipliers", s.intensity_multipliers},
               {"requirement_offsets", s.requirement_offsets},
               {"base_rho", s.base_rho},
               {"master_seed", s.master_seed},
               {"sim_seeds", s.sim_seeds},
               {"duration", s.duration},
               {"warmup_fraction", s.warmup_fraction}};
  auto reports = nlohmann::json::array();
  for (const auto& r : result.reports)
    reports.push_back({{"parameter", r.parameter},
                       {"label", r.label},
                       {"networks", r.networks},
                       {"mean_link_error_pct", r.mean_link_error_pct},
                       {"mean_aggregate_error_pct", r.mean_aggregate_error_pct},
                       {"mean_link_error_abs", r.mean_link_error_abs},
                       {"mean_aggregate_error_abs", r.mean_aggregate_error_abs}});
  j["reports"] = reports;
  auto records = nlohmann::json::array();
  for (const auto& r : result.records)
    records.push_back({{"parameter", r.parameter},
                       {"network", r.network_index},
                       {"graph_seed", r.graph_seed},
                       {"edges", r.edges},
                       {"mean_degree", r.mean_degree},
                       {"requirements", r.requirements},
                       {"th_star", r.th_star},
                       {"th_hat", r.th_hat},
                       {"support_size", r.support_size},
                       {"link_error", r.link_error},
                       {"aggregate_error", r.aggregate_error},
                       {"link_error_pct", r.link_error_pct},
                       {"aggregate_error_pct", r.aggregate_error_pct}});
  j["records"] = records;
  if (result.ring) {
    const auto& c = *result.ring;
    j["ring"] = {{"lp", to_json(c.lp)},
                 {"sim_th_hat", c.sim.mean},
                 {"sim_std_error", c.sim.std_error},
                 {"sim_aggregate", c.sim_aggregate},
                 {"max_link_gap", c.max_link_gap},
                 {"objective_ok", c.objective_ok},
                 {"per_link_ok", c.per_link_ok},
                 {"aggregate_ok", c.aggregate_ok},
                 {"passed", c.passed()}};
  }
  return j;
}

}  // namespace csmaopt
