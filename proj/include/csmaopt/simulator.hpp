#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "csmaopt/graph.hpp"

namespace csmaopt {

enum class BackoffDistribution {
  kExponential,  // the case the product-form analysis covers
  kUniform,      // uniform on [0, 2 * mean]; no analytical counterpart
};

struct SimConfig {
  std::vector<double> offered_load;  // per link, in [0, 1); empty means all zero
  double duration = 1e6;             // in units of the mean transmission time
  double warmup_fraction = 0.10;
  std::uint64_t seed = 1;
  // Saturated links never run out of packets and receive no arrivals. When
  // `saturated_active` is unset every link is saturated; otherwise only the
  // links in the mask compete and the rest stay silent.
  bool saturated_mode = false;
  std::optional<SubnetworkMask> saturated_active;
  BackoffDistribution backoff = BackoffDistribution::kExponential;
  bool record_trace = false;
};

/// Validates ranges and the offered-load length against `n_links`.
void validate(const SimConfig& cfg, int n_links);

struct QueueStats {
  double mean_length = 0.0;     // time average over the measured window
  double empty_fraction = 0.0;  // fraction of measured time with an empty buffer
  std::int64_t final_length = 0;
  bool saturated = false;       // backlog grew without bound, or saturated mode
};

enum class TraceEventType { kArrival, kBackoffStart, kFreeze, kResume, kTxStart, kTxEnd };

const char* to_string(TraceEventType t) noexcept;

struct TraceEvent {
  double time = 0.0;
  int link = 0;
  TraceEventType type = TraceEventType::kArrival;
};

struct SimResult {
  std::vector<double> th_hat;       // transmit airtime / measured time
  std::vector<QueueStats> queue;
  std::uint64_t events_processed = 0;
  std::uint64_t seed = 0;
  double measured_time = 0.0;
  // Transmissions that started while a neighbor was on the air.
  std::uint64_t overlap_violations = 0;
  std::vector<TraceEvent> trace;    // only with record_trace
};

/// Idealized CSMA with finite Poisson offered load: backoff counts down only
/// while no neighbor transmits, freezes with its remainder recorded when one
/// starts, and a link with an empty buffer leaves competition until the next
/// arrival. Mean transmission time is 1.
SimResult simulate(const ContentionGraph& g, const SimConfig& cfg);

/// Saturated run where exactly the links in `active` compete.
SimResult simulate_saturated(const ContentionGraph& g, SubnetworkMask active, SimConfig cfg);

struct PooledResult {
  std::vector<SimResult> runs;
  std::vector<double> mean;        // per link, across runs
  std::vector<double> std_error;   // sample std / sqrt(runs); 0 for one run
};

/// One run per seed (cfg.seed is ignored), executed on up to `threads`
/// workers; the result does not depend on the thread count.
PooledResult simulate_seeds(const ContentionGraph& g, const SimConfig& cfg,
                            std::span<const std::uint64_t> seeds, int threads = 1);

/// Independent stream seed for run `index` of `master` (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;
std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count);

/// Replays a trace and counts transmissions that overlap a neighbor's.
std::uint64_t audit_mutual_exclusion(const ContentionGraph& g, std::span<const TraceEvent> trace);

void write_trace_csv(std::ostream& out, std::span<const TraceEvent> trace);

}  // namespace csmaopt
