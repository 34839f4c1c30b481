#include "csmaopt/csmaopt.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "csmaopt/cgc.hpp"
#include "csmaopt/error.hpp"
#include "csmaopt/experiments.hpp"
#include "csmaopt/io.hpp"
#include "csmaopt/lp.hpp"
#include "csmaopt/parallel.hpp"
#include "csmaopt/product_form.hpp"
#include "csmaopt/simulator.hpp"

struct csmaopt_graph {
  csmaopt::ContentionGraph graph;
};

struct csmaopt_solution {
  int n_links;
  csmaopt::LpSolution solution;
};

struct csmaopt_sim {
  int n_links;
  csmaopt::PooledResult pooled;
};

struct csmaopt_experiment {
  csmaopt::SettingResult result;
};

namespace {

thread_local std::string g_last_error;

csmaopt_status map_code(csmaopt::ErrorCode code) {
  using csmaopt::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return CSMAOPT_ERR_INVALID_ARGUMENT;
    case ErrorCode::kParse: return CSMAOPT_ERR_PARSE;
    case ErrorCode::kInfeasible: return CSMAOPT_ERR_INFEASIBLE;
    case ErrorCode::kCapExceeded: return CSMAOPT_ERR_CAP_EXCEEDED;
    case ErrorCode::kNumerical: return CSMAOPT_ERR_NUMERICAL;
    case ErrorCode::kDimensionMismatch: return CSMAOPT_ERR_DIMENSION;
    case ErrorCode::kRetryExhausted: return CSMAOPT_ERR_RETRY_EXHAUSTED;
    case ErrorCode::kIo: return CSMAOPT_ERR_IO;
  }
  return CSMAOPT_ERR_INTERNAL;
}

csmaopt_status fail(csmaopt_status status, std::string msg) {
  g_last_error = std::move(msg);
  return status;
}

template <class Fn>
csmaopt_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    return fn();
  } catch (const csmaopt::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CSMAOPT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CSMAOPT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CSMAOPT_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int thread_count(int requested) { return requested > 0 ? requested : csmaopt::default_thread_count(); }

#define CSMAOPT_REQUIRE(cond, what) \
  if (!(cond)) return fail(CSMAOPT_ERR_INVALID_ARGUMENT, what)

csmaopt_status copy_out(const std::vector<double>& src, double* dst, size_t len) {
  CSMAOPT_REQUIRE(dst != nullptr, "output buffer is null");
  if (len < src.size())
    return fail(CSMAOPT_ERR_DIMENSION, "output buffer holds " + std::to_string(len) + " values, need " +
                                           std::to_string(src.size()));
  std::copy(src.begin(), src.end(), dst);
  return CSMAOPT_OK;
}

std::vector<double> in_vector(const double* data, size_t len) {
  return data ? std::vector<double>(data, data + len) : std::vector<double>{};
}

}  // namespace

extern "C" {

const char* csmaopt_version(void) { return CSMAOPT_VERSION_STRING; }

const char* csmaopt_status_string(csmaopt_status status) {
  switch (status) {
    case CSMAOPT_OK: return "ok";
    case CSMAOPT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CSMAOPT_ERR_PARSE: return "parse error";
    case CSMAOPT_ERR_INFEASIBLE: return "infeasible";
    case CSMAOPT_ERR_CAP_EXCEEDED: return "size cap exceeded";
    case CSMAOPT_ERR_NUMERICAL: return "numerical failure";
    case CSMAOPT_ERR_DIMENSION: return "dimension mismatch";
    case CSMAOPT_ERR_RETRY_EXHAUSTED: return "retry budget exhausted";
    case CSMAOPT_ERR_IO: return "i/o error";
    case CSMAOPT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* csmaopt_last_error(void) { return g_last_error.c_str(); }

void csmaopt_string_free(char* s) { std::free(s); }

csmaopt_status csmaopt_parse_mask(const char* text, uint32_t* out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(text && out, "null argument");
    *out = csmaopt::parse_mask(text).bits;
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_read_vector(const char* arg, double** out, size_t* len) {
  return guarded([&] {
    CSMAOPT_REQUIRE(arg && out && len, "null argument");
    const auto v = csmaopt::read_vector_arg(arg);
    auto* data = static_cast<double*>(std::malloc(std::max<std::size_t>(v.size(), 1) * sizeof(double)));
    if (!data) throw std::bad_alloc();
    std::copy(v.begin(), v.end(), data);
    *out = data;
    *len = v.size();
    return CSMAOPT_OK;
  });
}

void csmaopt_vector_free(double* v) { std::free(v); }

void csmaopt_derive_seeds(uint64_t master, size_t count, uint64_t* out) {
  if (!out) return;
  for (size_t k = 0; k < count; ++k) out[k] = csmaopt::derive_seed(master, k);
}

csmaopt_status csmaopt_graph_parse(const char* text, csmaopt_graph** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(text && out, "null argument");
    *out = new csmaopt_graph{csmaopt::parse_topology(text)};
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_graph_load(const char* path, csmaopt_graph** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(path && out, "null argument");
    *out = new csmaopt_graph{csmaopt::load_topology(path)};
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_graph_random(int n_links, double mean_degree, uint64_t seed, double rho,
                                    csmaopt_graph** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(out, "null argument");
    *out = new csmaopt_graph{csmaopt::random_graph(n_links, mean_degree, seed, rho)};
    return CSMAOPT_OK;
  });
}

void csmaopt_graph_free(csmaopt_graph* g) { delete g; }

int csmaopt_graph_links(const csmaopt_graph* g) { return g ? g->graph.size() : 0; }

size_t csmaopt_graph_edge_count(const csmaopt_graph* g) { return g ? g->graph.edges().size() : 0; }

csmaopt_status csmaopt_graph_rho(const csmaopt_graph* g, double* rho, size_t len) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g, "null graph");
    const auto r = g->graph.rho();
    return copy_out(std::vector<double>(r.begin(), r.end()), rho, len);
  });
}

csmaopt_status csmaopt_graph_to_text(const csmaopt_graph* g, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g && out, "null argument");
    *out = dup_string(csmaopt::format_topology(g->graph));
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_analyze(const csmaopt_graph* g, uint32_t active_mask, double* th, size_t len,
                               csmaopt_analysis* info) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g, "null graph");
    const auto& graph = g->graph;
    if (active_mask & ~csmaopt::SubnetworkMask::all(graph.size()).bits)
      return fail(CSMAOPT_ERR_INVALID_ARGUMENT, "active mask names links beyond the graph");
    const csmaopt::SubnetworkMask active{active_mask};
    if (info) {
      const auto dist = csmaopt::stationary_distribution(graph, active);
      info->log_partition = dist.log_partition;
      info->state_count = dist.states.size();
    }
    if (th) return copy_out(csmaopt::saturated_throughputs(graph, active), th, len);
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_matrix_csv(const csmaopt_graph* g, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g && out, "null argument");
    const auto m = csmaopt::subnetwork_throughput_matrix(g->graph, csmaopt::default_thread_count());
    *out = dup_string(csmaopt::matrix_to_csv(m));
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_check_feasibility(const csmaopt_graph* g, const double* r, size_t len, int* flagged) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g && r, "null argument");
    const auto rep = csmaopt::check_feasibility(g->graph, in_vector(r, len));
    if (flagged) {
      std::fill(flagged, flagged + g->graph.size(), 0);
      for (int i : rep.flagged_links) flagged[i] = 1;
    }
    if (!rep.passes) {
      std::ostringstream msg;
      msg << "requirement exceeds rho/(1+rho) on link(s)";
      for (int i : rep.flagged_links) msg << " " << i + 1;
      return fail(CSMAOPT_ERR_INFEASIBLE, msg.str());
    }
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_optimize(const csmaopt_graph* g, const double* r, size_t len, csmaopt_solution** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g && r && out, "null argument");
    *out = nullptr;
    auto sol = csmaopt::optimal_offered_load(g->graph, in_vector(r, len), csmaopt::default_thread_count());
    const auto status = sol.status;
    std::vector<int> links = sol.infeasible_links;
    *out = new csmaopt_solution{g->graph.size(), std::move(sol)};
    if (status == csmaopt::LpStatus::kSizeCapExceeded)
      return fail(CSMAOPT_ERR_CAP_EXCEEDED, "network too large for the dense sub-network program");
    if (status == csmaopt::LpStatus::kInfeasible) {
      std::ostringstream msg;
      msg << "requirements infeasible; unmet link(s):";
      for (int i : links) msg << " " << i + 1;
      return fail(CSMAOPT_ERR_INFEASIBLE, msg.str());
    }
    return CSMAOPT_OK;
  });
}

void csmaopt_solution_free(csmaopt_solution* s) { delete s; }

int csmaopt_solution_is_optimal(const csmaopt_solution* s) {
  return s && s->solution.status == csmaopt::LpStatus::kOptimal;
}

double csmaopt_solution_objective(const csmaopt_solution* s) { return s ? s->solution.objective : 0.0; }

size_t csmaopt_solution_support_size(const csmaopt_solution* s) { return s ? s->solution.nonzero_count : 0; }

csmaopt_status csmaopt_solution_offered_load(const csmaopt_solution* s, double* f, size_t len) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s, "null solution");
    if (!csmaopt_solution_is_optimal(s)) return fail(CSMAOPT_ERR_INFEASIBLE, "solution is not optimal");
    return copy_out(s->solution.f_star, f, len);
  });
}

csmaopt_status csmaopt_solution_q(const csmaopt_solution* s, double* q, size_t len) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s, "null solution");
    if (!csmaopt_solution_is_optimal(s)) return fail(CSMAOPT_ERR_INFEASIBLE, "solution is not optimal");
    return copy_out(s->solution.q_star, q, len);
  });
}

csmaopt_status csmaopt_solution_json(const csmaopt_solution* s, int include_q, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s && out, "null argument");
    auto j = csmaopt::to_json(s->solution);
    if (include_q && s->solution.status == csmaopt::LpStatus::kOptimal) j["q_star"] = s->solution.q_star;
    *out = dup_string(j.dump(2));
    return CSMAOPT_OK;
  });
}

void csmaopt_sim_config_init(csmaopt_sim_config* cfg) {
  if (!cfg) return;
  cfg->duration = 1e6;
  cfg->warmup_fraction = 0.10;
  cfg->saturated = 0;
  cfg->active_mask = 0xFFFFFFFFU;
  cfg->record_trace = 0;
  cfg->backoff = CSMAOPT_BACKOFF_EXPONENTIAL;
  cfg->threads = 0;
}

csmaopt_status csmaopt_simulate(const csmaopt_graph* g, const double* offered_load, size_t len,
                                const csmaopt_sim_config* cfg, const uint64_t* seeds, size_t n_seeds,
                                csmaopt_sim** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(g && cfg && seeds && out && n_seeds > 0, "null argument or no seeds");
    const auto& graph = g->graph;
    csmaopt::SimConfig sc;
    sc.offered_load = in_vector(offered_load, len);
    sc.duration = cfg->duration;
    sc.warmup_fraction = cfg->warmup_fraction;
    sc.record_trace = cfg->record_trace != 0;
    sc.backoff = cfg->backoff == CSMAOPT_BACKOFF_UNIFORM ? csmaopt::BackoffDistribution::kUniform
                                                         : csmaopt::BackoffDistribution::kExponential;
    if (cfg->saturated) {
      sc.saturated_mode = true;
      sc.saturated_active = csmaopt::SubnetworkMask{cfg->active_mask &
                                                    csmaopt::SubnetworkMask::all(graph.size()).bits};
    }
    auto pooled = csmaopt::simulate_seeds(graph, sc, std::span<const uint64_t>(seeds, n_seeds),
                                          thread_count(cfg->threads));
    *out = new csmaopt_sim{graph.size(), std::move(pooled)};
    return CSMAOPT_OK;
  });
}

void csmaopt_sim_free(csmaopt_sim* s) { delete s; }

size_t csmaopt_sim_run_count(const csmaopt_sim* s) { return s ? s->pooled.runs.size() : 0; }

csmaopt_status csmaopt_sim_mean(const csmaopt_sim* s, double* mean, double* std_error, size_t len) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s, "null simulation");
    if (mean)
      if (auto st = copy_out(s->pooled.mean, mean, len); st != CSMAOPT_OK) return st;
    if (std_error) return copy_out(s->pooled.std_error, std_error, len);
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_sim_run_throughput(const csmaopt_sim* s, size_t run, double* th, size_t len) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s && run < s->pooled.runs.size(), "no such run");
    return copy_out(s->pooled.runs[run].th_hat, th, len);
  });
}

uint64_t csmaopt_sim_overlap_violations(const csmaopt_sim* s) {
  uint64_t total = 0;
  if (s)
    for (const auto& r : s->pooled.runs) total += r.overlap_violations;
  return total;
}

csmaopt_status csmaopt_sim_json(const csmaopt_sim* s, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s && out, "null argument");
    *out = dup_string(csmaopt::to_json(s->pooled).dump(2));
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_sim_csv(const csmaopt_sim* s, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s && out, "null argument");
    std::ostringstream csv;
    csv.precision(17);
    csv << "run,seed,link,th_hat,std_error\n";
    for (std::size_t r = 0; r < s->pooled.runs.size(); ++r) {
      const auto& run = s->pooled.runs[r];
      for (std::size_t i = 0; i < run.th_hat.size(); ++i)
        csv << r << "," << run.seed << "," << i + 1 << "," << run.th_hat[i] << ",\n";
    }
    for (std::size_t i = 0; i < s->pooled.mean.size(); ++i)
      csv << "pooled,," << i + 1 << "," << s->pooled.mean[i] << "," << s->pooled.std_error[i] << "\n";
    *out = dup_string(csv.str());
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_sim_trace_csv(const csmaopt_sim* s, size_t run, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(s && out && run < s->pooled.runs.size(), "no such run");
    std::ostringstream csv;
    csmaopt::write_trace_csv(csv, s->pooled.runs[run].trace);
    *out = dup_string(csv.str());
    return CSMAOPT_OK;
  });
}

void csmaopt_experiment_options_init(csmaopt_experiment_options* opts) {
  if (!opts) return;
  opts->n_networks = 10;
  opts->n_links = 10;
  opts->sim_seeds = 10;
  opts->duration = 1e6;
  opts->base_rho = csmaopt::kDefaultRho;
  opts->threads = 0;
}

csmaopt_status csmaopt_experiment_run(const char* setting, uint64_t master_seed,
                                      const csmaopt_experiment_options* opts, csmaopt_experiment** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(setting && out, "null argument");
    const auto parsed = csmaopt::parse_setting(setting);
    if (!parsed) return fail(CSMAOPT_ERR_INVALID_ARGUMENT, std::string("unknown setting '") + setting + "'");
    csmaopt_experiment_options defaults;
    csmaopt_experiment_options_init(&defaults);
    const csmaopt_experiment_options& o = opts ? *opts : defaults;
    csmaopt::ExperimentSpec spec;
    spec.setting = *parsed;
    spec.master_seed = master_seed;
    spec.n_networks = o.n_networks;
    spec.n_links = o.n_links;
    spec.sim_seeds = o.sim_seeds;
    spec.duration = o.duration;
    spec.base_rho = o.base_rho;
    spec.threads = thread_count(o.threads);
    *out = new csmaopt_experiment{csmaopt::run_setting(spec)};
    return CSMAOPT_OK;
  });
}

void csmaopt_experiment_free(csmaopt_experiment* e) { delete e; }

int csmaopt_experiment_passed(const csmaopt_experiment* e) {
  if (!e) return 0;
  if (e->result.ring) return e->result.ring->passed() ? 1 : 0;
  return 1;
}

csmaopt_status csmaopt_experiment_table(const csmaopt_experiment* e, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(e && out, "null argument");
    *out = dup_string(csmaopt::render_table(e->result));
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_experiment_csv(const csmaopt_experiment* e, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(e && out, "null argument");
    *out = dup_string(csmaopt::reports_csv(e->result));
    return CSMAOPT_OK;
  });
}

csmaopt_status csmaopt_experiment_json(const csmaopt_experiment* e, char** out) {
  return guarded([&] {
    CSMAOPT_REQUIRE(e && out, "null argument");
    *out = dup_string(csmaopt::to_json(e->result).dump(2));
    return CSMAOPT_OK;
  });
}

}  // extern "C"
