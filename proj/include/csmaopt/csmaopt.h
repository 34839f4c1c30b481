/*
 * C interface to the csmaopt library: saturated CSMA throughput analysis,
 * offered-load optimization and the idealized CSMA simulator.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a csmaopt_status; on failure a description is
 * available from csmaopt_last_error() on the same thread. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * csmaopt_string_free. Link indices are 0-based; masks use bit i for link i.
 */
#ifndef CSMAOPT_CSMAOPT_H
#define CSMAOPT_CSMAOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(CSMAOPT_BUILDING_LIBRARY)
#define CSMAOPT_API __attribute__((visibility("default")))
#else
#define CSMAOPT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csmaopt_status {
  CSMAOPT_OK = 0,
  CSMAOPT_ERR_INVALID_ARGUMENT = 1,
  CSMAOPT_ERR_PARSE = 2,
  CSMAOPT_ERR_INFEASIBLE = 3,
  CSMAOPT_ERR_CAP_EXCEEDED = 4,
  CSMAOPT_ERR_NUMERICAL = 5,
  CSMAOPT_ERR_DIMENSION = 6,
  CSMAOPT_ERR_RETRY_EXHAUSTED = 7,
  CSMAOPT_ERR_IO = 8,
  CSMAOPT_ERR_INTERNAL = 99
} csmaopt_status;

typedef struct csmaopt_graph csmaopt_graph;
typedef struct csmaopt_solution csmaopt_solution;
typedef struct csmaopt_sim csmaopt_sim;
typedef struct csmaopt_experiment csmaopt_experiment;

CSMAOPT_API const char* csmaopt_version(void);
CSMAOPT_API const char* csmaopt_status_string(csmaopt_status status);
CSMAOPT_API const char* csmaopt_last_error(void);
CSMAOPT_API void csmaopt_string_free(char* s);

/* ---- input helpers ---------------------------------------------------- */

/* Mask in binary (0b...), hex (0x...) or decimal. */
CSMAOPT_API csmaopt_status csmaopt_parse_mask(const char* text, uint32_t* out);
/* Comma/whitespace separated reals given inline, or the path of a file
 * holding them. *out is released with csmaopt_vector_free. */
CSMAOPT_API csmaopt_status csmaopt_read_vector(const char* arg, double** out, size_t* len);
CSMAOPT_API void csmaopt_vector_free(double* v);
/* Independent per-run seeds derived from one master seed. */
CSMAOPT_API void csmaopt_derive_seeds(uint64_t master, size_t count, uint64_t* out);

/* ---- contention graphs ------------------------------------------------ */

CSMAOPT_API csmaopt_status csmaopt_graph_parse(const char* text, csmaopt_graph** out);
CSMAOPT_API csmaopt_status csmaopt_graph_load(const char* path, csmaopt_graph** out);
CSMAOPT_API csmaopt_status csmaopt_graph_random(int n_links, double mean_degree, uint64_t seed,
                                                double rho, csmaopt_graph** out);
CSMAOPT_API void csmaopt_graph_free(csmaopt_graph* g);
CSMAOPT_API int csmaopt_graph_links(const csmaopt_graph* g);
CSMAOPT_API size_t csmaopt_graph_edge_count(const csmaopt_graph* g);
/* Copies the per-link access intensities; `rho` must hold n values. */
CSMAOPT_API csmaopt_status csmaopt_graph_rho(const csmaopt_graph* g, double* rho, size_t len);
/* Serializes back to the topology text format. */
CSMAOPT_API csmaopt_status csmaopt_graph_to_text(const csmaopt_graph* g, char** out);

/* ---- saturated analysis ----------------------------------------------- */

typedef struct csmaopt_analysis {
  double log_partition; /* ln Z of the sub-network */
  size_t state_count;   /* number of feasible transmission states */
} csmaopt_analysis;

/* Per-link saturated throughputs of the sub-network `active_mask`; `th` must
 * hold csmaopt_graph_links(g) values. */
CSMAOPT_API csmaopt_status csmaopt_analyze(const csmaopt_graph* g, uint32_t active_mask, double* th,
                                           size_t len, csmaopt_analysis* info);
/* Full 2^n sub-network throughput matrix as CSV. */
CSMAOPT_API csmaopt_status csmaopt_matrix_csv(const csmaopt_graph* g, char** out);

/* ---- offered-load optimization ---------------------------------------- */

/* Writes one flag per link (1 when r_i exceeds rho_i/(1+rho_i)) and returns
 * CSMAOPT_ERR_INFEASIBLE when any is set. */
CSMAOPT_API csmaopt_status csmaopt_check_feasibility(const csmaopt_graph* g, const double* r, size_t len,
                                                     int* flagged);

/* Solves the throughput LP. Returns CSMAOPT_OK for an optimum and
 * CSMAOPT_ERR_INFEASIBLE (with *out still set, carrying the certificate)
 * when the requirements cannot be met. */
CSMAOPT_API csmaopt_status csmaopt_optimize(const csmaopt_graph* g, const double* r, size_t len,
                                            csmaopt_solution** out);
CSMAOPT_API void csmaopt_solution_free(csmaopt_solution* s);
CSMAOPT_API int csmaopt_solution_is_optimal(const csmaopt_solution* s);
CSMAOPT_API double csmaopt_solution_objective(const csmaopt_solution* s);
CSMAOPT_API size_t csmaopt_solution_support_size(const csmaopt_solution* s);
/* Copies f* (equal to th*) into `f`, which must hold n values. */
CSMAOPT_API csmaopt_status csmaopt_solution_offered_load(const csmaopt_solution* s, double* f, size_t len);
/* Copies q* (2^n values). */
CSMAOPT_API csmaopt_status csmaopt_solution_q(const csmaopt_solution* s, double* q, size_t len);
CSMAOPT_API csmaopt_status csmaopt_solution_json(const csmaopt_solution* s, int include_q, char** out);

/* ---- simulation ------------------------------------------------------- */

typedef enum csmaopt_backoff {
  CSMAOPT_BACKOFF_EXPONENTIAL = 0,
  CSMAOPT_BACKOFF_UNIFORM = 1
} csmaopt_backoff;

typedef struct csmaopt_sim_config {
  double duration;         /* default 1e6 */
  double warmup_fraction;  /* default 0.1 */
  int saturated;           /* nonzero: links in active_mask are saturated */
  uint32_t active_mask;    /* used when saturated != 0 */
  int record_trace;        /* keep the event trace of every run */
  csmaopt_backoff backoff;
  int threads;             /* workers across seeds; <= 0 means hardware */
} csmaopt_sim_config;

CSMAOPT_API void csmaopt_sim_config_init(csmaopt_sim_config* cfg);

/* Runs one simulation per seed. `offered_load` may be NULL for all-zero
 * load (meaningful with saturated runs). */
CSMAOPT_API csmaopt_status csmaopt_simulate(const csmaopt_graph* g, const double* offered_load, size_t len,
                                            const csmaopt_sim_config* cfg, const uint64_t* seeds,
                                            size_t n_seeds, csmaopt_sim** out);
CSMAOPT_API void csmaopt_sim_free(csmaopt_sim* s);
CSMAOPT_API size_t csmaopt_sim_run_count(const csmaopt_sim* s);
/* Pooled per-link mean and standard error across runs. */
CSMAOPT_API csmaopt_status csmaopt_sim_mean(const csmaopt_sim* s, double* mean, double* std_error, size_t len);
CSMAOPT_API csmaopt_status csmaopt_sim_run_throughput(const csmaopt_sim* s, size_t run, double* th, size_t len);
CSMAOPT_API uint64_t csmaopt_sim_overlap_violations(const csmaopt_sim* s);
CSMAOPT_API csmaopt_status csmaopt_sim_json(const csmaopt_sim* s, char** out);
CSMAOPT_API csmaopt_status csmaopt_sim_csv(const csmaopt_sim* s, char** out);
/* Event trace of one run as CSV (time,link,event); requires record_trace. */
CSMAOPT_API csmaopt_status csmaopt_sim_trace_csv(const csmaopt_sim* s, size_t run, char** out);

/* ---- experiments ------------------------------------------------------ */

typedef struct csmaopt_experiment_options {
  int n_networks;    /* default 10 */
  int n_links;       /* default 10 */
  int sim_seeds;     /* default 10 */
  double duration;   /* default 1e6 */
  double base_rho;   /* default 5.3548 */
  int threads;       /* <= 0 means hardware */
} csmaopt_experiment_options;

CSMAOPT_API void csmaopt_experiment_options_init(csmaopt_experiment_options* opts);

/* setting: "table1_ring", "degree_sweep", "intensity_sweep" or
 * "requirement_sweep". Unknown names give CSMAOPT_ERR_INVALID_ARGUMENT. */
CSMAOPT_API csmaopt_status csmaopt_experiment_run(const char* setting, uint64_t master_seed,
                                                  const csmaopt_experiment_options* opts,
                                                  csmaopt_experiment** out);
CSMAOPT_API void csmaopt_experiment_free(csmaopt_experiment* e);
/* For table1_ring: 1 when every ring check passed. Other settings: 1. */
CSMAOPT_API int csmaopt_experiment_passed(const csmaopt_experiment* e);
CSMAOPT_API csmaopt_status csmaopt_experiment_table(const csmaopt_experiment* e, char** out);
CSMAOPT_API csmaopt_status csmaopt_experiment_csv(const csmaopt_experiment* e, char** out);
CSMAOPT_API csmaopt_status csmaopt_experiment_json(const csmaopt_experiment* e, char** out);

#ifdef __cplusplus
}
#endif

#endif /* CSMAOPT_CSMAOPT_H */
