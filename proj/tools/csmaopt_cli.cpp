// csmaopt-cli: batch front end over the csmaopt C interface.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csmaopt/csmaopt.h"
#include "json.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRingCheck = 9;

// Thrown to unwind with a library status; main maps it to an exit code.
struct Failure {
  csmaopt_status status;
  std::string message;
};

int exit_code(csmaopt_status s) {
  switch (s) {
    case CSMAOPT_OK: return 0;
    case CSMAOPT_ERR_INVALID_ARGUMENT: return kExitUsage;
    default: return static_cast<int>(s);
  }
}

void check(csmaopt_status s) {
  if (s != CSMAOPT_OK) throw Failure{s, csmaopt_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  csmaopt_string_free(s);
  return out;
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using GraphPtr = std::unique_ptr<csmaopt_graph, Deleter<csmaopt_graph, csmaopt_graph_free>>;
using SolutionPtr = std::unique_ptr<csmaopt_solution, Deleter<csmaopt_solution, csmaopt_solution_free>>;
using SimPtr = std::unique_ptr<csmaopt_sim, Deleter<csmaopt_sim, csmaopt_sim_free>>;
using ExperimentPtr = std::unique_ptr<csmaopt_experiment, Deleter<csmaopt_experiment, csmaopt_experiment_free>>;

GraphPtr load_graph(const std::string& path) {
  csmaopt_graph* g = nullptr;
  check(csmaopt_graph_load(path.c_str(), &g));
  return GraphPtr(g);
}

std::vector<double> read_vector(const std::string& arg) {
  double* data = nullptr;
  size_t len = 0;
  check(csmaopt_read_vector(arg.c_str(), &data, &len));
  std::vector<double> v(data, data + len);
  csmaopt_vector_free(data);
  return v;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Everything needed to rerun a command, written into each artifact.
struct RunManifest {
  std::string command;
  std::string topology;
  ordered_json overrides = ordered_json::object();
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format;

  ordered_json to_json() const {
    ordered_json j;
    j["command"] = command;
    j["topology"] = topology.empty() ? ordered_json(nullptr) : ordered_json(topology);
    j["overrides"] = overrides;
    j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
    j["output"] = {{"path", output.empty() ? "-" : output}, {"format", format}};
    j["timestamp"] = utc_timestamp();
    j["version"] = csmaopt_version();
    return j;
  }
};

// Records every option the user set on `cmd`, positionals included.
void collect_overrides(const CLI::App* cmd, RunManifest& m) {
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->count() == 0) continue;
    const std::string name = opt->get_name(false, true);
    if (name == "--help") continue;
    const auto& res = opt->results();
    if (res.size() == 1) m.overrides[name] = res.front();
    else if (res.empty()) m.overrides[name] = true;
    else m.overrides[name] = res;
  }
}

std::string comment_block(const RunManifest& m) {
  return "# csmaopt manifest " + m.to_json().dump() + "\n";
}

std::string wrap_json(const RunManifest& m, const json& result) {
  ordered_json doc;
  doc["manifest"] = m.to_json();
  doc["result"] = ordered_json::parse(result.dump());
  return doc.dump(2) + "\n";
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{CSMAOPT_ERR_IO, "cannot write '" + path + "'"};
  out << text;
  if (!out) throw Failure{CSMAOPT_ERR_IO, "write to '" + path + "' failed"};
}

// Machine output keeps full double precision.
std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string topology;
  std::string active;
  std::string export_matrix;
  std::string output;
  std::string format = "table";
};

int run_analyze(const AnalyzeArgs& a, RunManifest& m) {
  const GraphPtr g = load_graph(a.topology);
  const int n = csmaopt_graph_links(g.get());
  uint32_t mask = n >= 32 ? ~0U : ((1U << n) - 1U);
  if (!a.active.empty()) check(csmaopt_parse_mask(a.active.c_str(), &mask));

  std::vector<double> th(static_cast<std::size_t>(n));
  std::vector<double> rho(static_cast<std::size_t>(n));
  csmaopt_analysis info{};
  check(csmaopt_analyze(g.get(), mask, th.data(), th.size(), &info));
  check(csmaopt_graph_rho(g.get(), rho.data(), rho.size()));
  double total = 0.0;
  for (double t : th) total += t;
  const double z = std::exp(info.log_partition);

  if (!a.export_matrix.empty()) {
    char* csv = nullptr;
    check(csmaopt_matrix_csv(g.get(), &csv));
    emit(a.export_matrix, comment_block(m) + take(csv));
  }

  std::string text;
  if (a.format == "json") {
    json r;
    r["links"] = n;
    r["edges"] = csmaopt_graph_edge_count(g.get());
    r["active_mask"] = mask;
    r["states"] = info.state_count;
    r["partition_function"] = std::isfinite(z) ? json(z) : json(nullptr);
    r["log_partition"] = info.log_partition;
    r["rho"] = rho;
    r["throughput"] = th;
    r["aggregate"] = total;
    text = wrap_json(m, r);
  } else if (a.format == "csv") {
    text = comment_block(m) + "link,rho,th\n";
    for (int i = 0; i < n; ++i)
      text += std::to_string(i + 1) + "," + csv_number(rho[static_cast<std::size_t>(i)]) + "," +
              csv_number(th[static_cast<std::size_t>(i)]) + "\n";
  } else {
    std::ostringstream out;
    out << comment_block(m);
    out << "links " << n << ", active mask 0x" << std::hex << mask << std::dec << ", states " << info.state_count
        << ", Z " << fmt4(z) << ", ln Z " << fmt4(info.log_partition) << "\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-6s %9s %9s\n", "link", "rho", "th");
    out << buf;
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%-6d %9.4f %9.4f\n", i + 1, rho[static_cast<std::size_t>(i)],
                    th[static_cast<std::size_t>(i)]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-6s %9s %9.4f\n", "sum", "", total);
    out << buf;
    text = out.str();
  }
  emit(a.output, text);
  return 0;
}

// ---- optimize -------------------------------------------------------------

struct OptimizeArgs {
  std::string topology;
  std::string requirements;
  bool emit_q = false;
  std::string output;
  std::string format = "json";
};

int run_optimize(const OptimizeArgs& a, RunManifest& m) {
  const GraphPtr g = load_graph(a.topology);
  const std::vector<double> r = read_vector(a.requirements);
  csmaopt_solution* raw = nullptr;
  const csmaopt_status st = csmaopt_optimize(g.get(), r.data(), r.size(), &raw);
  if (st != CSMAOPT_OK && st != CSMAOPT_ERR_INFEASIBLE) throw Failure{st, csmaopt_last_error()};
  const SolutionPtr sol(raw);

  char* js = nullptr;
  check(csmaopt_solution_json(sol.get(), a.emit_q ? 1 : 0, &js));
  json result = json::parse(take(js));
  result["requirements"] = r;

  std::string text;
  if (a.format == "table") {
    std::ostringstream out;
    out << comment_block(m);
    out << "status " << result["status"].get<std::string>() << "\n";
    char buf[96];
    if (csmaopt_solution_is_optimal(sol.get())) {
      out << "objective " << fmt4(result["objective"].get<double>()) << ", support "
          << result["support_size"].get<std::size_t>() << "\n";
      std::snprintf(buf, sizeof buf, "%-6s %8s %8s\n", "link", "r", "f*");
      out << buf;
      const auto& f = result["f_star"];
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%-6zu %8.4f %8.4f\n", i + 1, r[i], f[i].get<double>());
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%-11s %8s\n", "sub-network", "q");
      out << buf;
      for (const auto& e : result["support"]) {
        std::snprintf(buf, sizeof buf, "0x%-9x %8.4f\n", e["mask"].get<unsigned>(), e["q"].get<double>());
        out << buf;
      }
    } else {
      out << "unmet links (1-based):";
      for (const auto& l : result["certificate"]["links"]) out << " " << l.get<int>();
      out << "\n";
    }
    text = out.str();
  } else {
    text = wrap_json(m, result);
  }
  emit(a.output, text);
  if (st == CSMAOPT_ERR_INFEASIBLE) {
    std::cerr << "error: requirements are infeasible\n";
    return exit_code(st);
  }
  return 0;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string topology;
  std::string load;
  double duration = 1e6;
  int seeds = 1;
  std::uint64_t seed = 1;
  double warmup = 0.1;
  bool saturated = false;
  std::string active;
  std::string trace;
  std::string backoff = "exponential";
  std::string output;
  std::string format = "json";
  int threads = 0;
};

int run_simulate(const SimulateArgs& a, RunManifest& m) {
  const GraphPtr g = load_graph(a.topology);
  const int n = csmaopt_graph_links(g.get());
  std::vector<double> load;
  if (!a.load.empty()) load = read_vector(a.load);
  else if (!a.saturated) throw Failure{CSMAOPT_ERR_INVALID_ARGUMENT, "an offered load is required unless --saturated"};

  csmaopt_sim_config cfg;
  csmaopt_sim_config_init(&cfg);
  cfg.duration = a.duration;
  cfg.warmup_fraction = a.warmup;
  cfg.threads = a.threads;
  cfg.record_trace = a.trace.empty() ? 0 : 1;
  cfg.backoff = a.backoff == "uniform" ? CSMAOPT_BACKOFF_UNIFORM : CSMAOPT_BACKOFF_EXPONENTIAL;
  if (a.saturated) {
    cfg.saturated = 1;
    cfg.active_mask = n >= 32 ? ~0U : ((1U << n) - 1U);
    if (!a.active.empty()) check(csmaopt_parse_mask(a.active.c_str(), &cfg.active_mask));
  }
  std::vector<uint64_t> seeds(static_cast<std::size_t>(a.seeds));
  csmaopt_derive_seeds(a.seed, seeds.size(), seeds.data());

  csmaopt_sim* raw = nullptr;
  check(csmaopt_simulate(g.get(), load.empty() ? nullptr : load.data(), load.size(), &cfg, seeds.data(),
                         seeds.size(), &raw));
  const SimPtr sim(raw);

  if (!a.trace.empty()) {
    char* csv = nullptr;
    check(csmaopt_sim_trace_csv(sim.get(), 0, &csv));
    emit(a.trace, comment_block(m) + take(csv));
  }

  std::string text;
  if (a.format == "csv") {
    char* csv = nullptr;
    check(csmaopt_sim_csv(sim.get(), &csv));
    text = comment_block(m) + take(csv);
  } else if (a.format == "table") {
    std::vector<double> mean(static_cast<std::size_t>(n)), se(static_cast<std::size_t>(n));
    check(csmaopt_sim_mean(sim.get(), mean.data(), se.data(), mean.size()));
    std::ostringstream out;
    out << comment_block(m);
    out << a.seeds << " run(s) x " << a.duration << " time units, overlap violations "
        << csmaopt_sim_overlap_violations(sim.get()) << "\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s\n", "link", "f", "th_hat", "std_err");
    out << buf;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double f = load.empty() ? 0.0 : load[k];
      std::snprintf(buf, sizeof buf, "%-6d %8.4f %8.4f %8.4f\n", i + 1, f, mean[k], se[k]);
      out << buf;
      total += mean[k];
    }
    std::snprintf(buf, sizeof buf, "%-6s %8s %8.4f\n", "sum", "", total);
    out << buf;
    text = out.str();
  } else {
    char* js = nullptr;
    check(csmaopt_sim_json(sim.get(), &js));
    json result = json::parse(take(js));
    result["offered_load"] = load;
    text = wrap_json(m, result);
  }
  emit(a.output, text);
  return 0;
}

// ---- experiment -----------------------------------------------------------

struct ExperimentArgs {
  std::string setting;
  std::uint64_t seed = 1;
  int networks = 10;
  int links = 10;
  int sim_seeds = 10;
  double duration = 1e6;
  double rho = 5.3548;
  int threads = 0;
  std::string out_dir;
};

int run_experiment(const ExperimentArgs& a, RunManifest& m) {
  csmaopt_experiment_options opts;
  csmaopt_experiment_options_init(&opts);
  opts.n_networks = a.networks;
  opts.n_links = a.links;
  opts.sim_seeds = a.sim_seeds;
  opts.duration = a.duration;
  opts.base_rho = a.rho;
  opts.threads = a.threads;

  std::string dir = a.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("CSMAOPT_OUTPUT_DIR");
    dir = env && *env ? env : ".";
  }
  m.output = dir;

  csmaopt_experiment* raw = nullptr;
  check(csmaopt_experiment_run(a.setting.c_str(), a.seed, &opts, &raw));
  const ExperimentPtr exp(raw);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Failure{CSMAOPT_ERR_IO, "cannot create '" + dir + "': " + ec.message()};
  const std::filesystem::path base = std::filesystem::path(dir) / a.setting;

  char* s = nullptr;
  check(csmaopt_experiment_table(exp.get(), &s));
  const std::string table = comment_block(m) + take(s);
  check(csmaopt_experiment_csv(exp.get(), &s));
  const std::string csv = comment_block(m) + take(s);
  check(csmaopt_experiment_json(exp.get(), &s));
  const std::string js = wrap_json(m, json::parse(take(s)));

  emit(base.string() + ".txt", table);
  emit(base.string() + ".csv", csv);
  emit(base.string() + ".json", js);
  std::cout << table;
  std::cout << "wrote " << base.string() << ".{txt,csv,json}\n";

  if (!csmaopt_experiment_passed(exp.get())) {
    std::cerr << "error: ring comparison failed\n";
    return kExitRingCheck;
  }
  return 0;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  int links = 10;
  double degree = 2.0;
  std::uint64_t seed = 1;
  double rho = 5.3548;
  std::string output;
};

int run_generate(const GenerateArgs& a, RunManifest& m) {
  csmaopt_graph* raw = nullptr;
  check(csmaopt_graph_random(a.links, a.degree, a.seed, a.rho, &raw));
  const GraphPtr g(raw);
  char* text = nullptr;
  check(csmaopt_graph_to_text(g.get(), &text));
  emit(a.output, comment_block(m) + take(text));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput analysis, offered-load optimization and simulation for idealized CSMA networks"};
  app.set_version_flag("--version", std::string(csmaopt_version()));
  app.require_subcommand(1);

  const auto formats = CLI::IsMember({"table", "json", "csv"});

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Saturated product-form throughputs of a topology");
  analyze->add_option("topology", an.topology, "Topology file")->required();
  analyze->add_option("--active", an.active, "Sub-network mask (0b..., 0x... or decimal); default all links");
  analyze->add_option("--export-matrix", an.export_matrix, "Write the full sub-network throughput matrix as CSV");
  analyze->add_option("-o,--output", an.output, "Output file (default stdout)");
  analyze->add_option("--format", an.format, "table, json or csv")->check(formats)->capture_default_str();

  OptimizeArgs op;
  auto* optimize = app.add_subcommand("optimize", "Offered load maximizing total throughput under minimum rates");
  optimize->add_option("topology", op.topology, "Topology file")->required();
  optimize->add_option("requirements", op.requirements, "Minimum rates, inline (0.1,0.2,...) or a file")->required();
  optimize->add_flag("--emit-q", op.emit_q, "Include the full sub-network probability vector");
  optimize->add_option("-o,--output", op.output, "Output file (default stdout)");
  optimize->add_option("--format", op.format, "json or table")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  SimulateArgs si;
  auto* simulate = app.add_subcommand("simulate", "Event-driven idealized CSMA simulation");
  simulate->add_option("topology", si.topology, "Topology file")->required();
  simulate->add_option("load", si.load, "Offered load per link, inline or a file (optional with --saturated)");
  simulate->add_option("--duration", si.duration, "Simulated time in mean transmission times")->capture_default_str();
  simulate->add_option("--seeds", si.seeds, "Number of independent runs")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--seed", si.seed, "Master seed")->capture_default_str();
  simulate->add_option("--warmup", si.warmup, "Warm-up fraction discarded from statistics")->capture_default_str();
  simulate->add_flag("--saturated", si.saturated, "Saturate the links instead of feeding Poisson traffic");
  simulate->add_option("--active", si.active, "Saturated sub-network mask (with --saturated)");
  simulate->add_option("--trace", si.trace, "Write the event trace of the first run as CSV");
  simulate->add_option("--backoff", si.backoff, "exponential or uniform")
      ->check(CLI::IsMember({"exponential", "uniform"}))
      ->capture_default_str();
  simulate->add_option("-o,--output", si.output, "Output file (default stdout)");
  simulate->add_option("--format", si.format, "json, csv or table")->check(formats)->capture_default_str();
  simulate->add_option("--threads", si.threads, "Worker threads across runs (0: hardware)");

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run an evaluation setting and write its tables");
  experiment->add_option("--setting", ex.setting, "table1_ring, degree_sweep, intensity_sweep or requirement_sweep")
      ->required();
  experiment->add_option("--seed", ex.seed, "Master seed")->capture_default_str();
  experiment->add_option("--networks", ex.networks, "Random networks per sweep point")->capture_default_str();
  experiment->add_option("--links", ex.links, "Links per random network")->capture_default_str();
  experiment->add_option("--sim-seeds", ex.sim_seeds, "Simulation runs per network")->capture_default_str();
  experiment->add_option("--duration", ex.duration, "Simulated time per run")->capture_default_str();
  experiment->add_option("--rho", ex.rho, "Base access intensity")->capture_default_str();
  experiment->add_option("--threads", ex.threads, "Worker threads (0: hardware)");
  experiment->add_option("--out-dir", ex.out_dir, "Output directory (default $CSMAOPT_OUTPUT_DIR or .)");

  GenerateArgs ge;
  auto* generate = app.add_subcommand("generate", "Random topology with a target mean degree");
  generate->add_option("--links", ge.links, "Number of links")->capture_default_str();
  generate->add_option("--degree", ge.degree, "Target mean degree")->capture_default_str();
  generate->add_option("--seed", ge.seed, "Seed")->capture_default_str();
  generate->add_option("--rho", ge.rho, "Access intensity of every link")->capture_default_str();
  generate->add_option("-o,--output", ge.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  RunManifest m;
  try {
    if (analyze->parsed()) {
      m.command = "analyze";
      m.topology = an.topology;
      m.output = an.output;
      m.format = an.format;
      collect_overrides(analyze, m);
      return run_analyze(an, m);
    }
    if (optimize->parsed()) {
      m.command = "optimize";
      m.topology = op.topology;
      m.output = op.output;
      m.format = op.format;
      collect_overrides(optimize, m);
      return run_optimize(op, m);
    }
    if (simulate->parsed()) {
      m.command = "simulate";
      m.topology = si.topology;
      m.seed = si.seed;
      m.output = si.output;
      m.format = si.format;
      collect_overrides(simulate, m);
      return run_simulate(si, m);
    }
    if (experiment->parsed()) {
      m.command = "experiment";
      m.seed = ex.seed;
      m.format = "table,csv,json";
      collect_overrides(experiment, m);
      return run_experiment(ex, m);
    }
    if (generate->parsed()) {
      m.command = "generate";
      m.seed = ge.seed;
      m.output = ge.output;
      m.format = "topology";
      collect_overrides(generate, m);
      return run_generate(ge, m);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return exit_code(f.status);
  }
  return kExitUsage;
}
