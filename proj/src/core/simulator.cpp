#include "csmaopt/simulator.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "csmaopt/error.hpp"
#include "csmaopt/parallel.hpp"

namespace csmaopt {

const char* to_string(TraceEventType t) noexcept {
  switch (t) {
    case TraceEventType::kArrival: return "arrival";
    case TraceEventType::kBackoffStart: return "backoff_start";
    case TraceEventType::kFreeze: return "freeze";
    case TraceEventType::kResume: return "resume";
    case TraceEventType::kTxStart: return "tx_start";
    case TraceEventType::kTxEnd: return "tx_end";
  }
  return "unknown";
}

void validate(const SimConfig& cfg, int n_links) {
  if (!(cfg.duration > 0.0) || !std::isfinite(cfg.duration))
    throw Error(ErrorCode::kInvalidArgument, "simulation duration must be positive");
  if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction <= 0.5))
    throw Error(ErrorCode::kInvalidArgument, "warmup fraction must lie in [0, 0.5]");
  if (!cfg.offered_load.empty() && cfg.offered_load.size() != static_cast<std::size_t>(n_links))
    throw Error(ErrorCode::kDimensionMismatch, "offered-load vector has " +
                                                   std::to_string(cfg.offered_load.size()) +
                                                   " entries for " + std::to_string(n_links) + " links");
  for (std::size_t i = 0; i < cfg.offered_load.size(); ++i)
    if (!(cfg.offered_load[i] >= 0.0 && cfg.offered_load[i] < 1.0))
      throw Error(ErrorCode::kInvalidArgument,
                  "offered load of link " + std::to_string(i + 1) + " is outside [0, 1)");
}

namespace {

// Event kinds in tie-break order for equal timestamps.
enum EventKind : int { kTxEnd = 0, kBackoffExpiry = 1, kArrival = 2, kKinds = 3 };

// Future event list with one slot per (kind, link): each link has at most
// one pending event of each kind. Slot ids are kind * n + link, so ordering by
// (time, slot) applies the kind-then-link tie-break. Indexed binary heap with
// keys stored inline; cancellation and rescheduling are O(log n).
class EventList {
 public:
  explicit EventList(int n_links) : pos_(static_cast<std::size_t>(n_links * kKinds), -1) {
    heap_.reserve(pos_.size());
  }

  bool empty() const noexcept { return heap_.empty(); }
  int top() const noexcept { return heap_.front().slot; }
  double top_time() const noexcept { return heap_.front().time; }
  bool pending(int slot) const noexcept { return pos_[static_cast<std::size_t>(slot)] >= 0; }
  double time_of(int slot) const noexcept {
    const int p = pos_[static_cast<std::size_t>(slot)];
    return p < 0 ? kNever : heap_[static_cast<std::size_t>(p)].time;
  }

  void schedule(int slot, double t) {
    int p = pos_[static_cast<std::size_t>(slot)];
    if (p < 0) {
      p = static_cast<int>(heap_.size());
      heap_.push_back({t, slot});
      pos_[static_cast<std::size_t>(slot)] = p;
      sift_up(p);
      return;
    }
    const double old = heap_[static_cast<std::size_t>(p)].time;
    heap_[static_cast<std::size_t>(p)].time = t;
    if (t < old) sift_up(p);
    else sift_down(p);
  }

  void cancel(int slot) {
    const int p = pos_[static_cast<std::size_t>(slot)];
    if (p < 0) return;
    pos_[static_cast<std::size_t>(slot)] = -1;
    const Node last = heap_.back();
    heap_.pop_back();
    if (p == static_cast<int>(heap_.size())) return;
    heap_[static_cast<std::size_t>(p)] = last;
    pos_[static_cast<std::size_t>(last.slot)] = p;
    sift_up(p);
    sift_down(pos_[static_cast<std::size_t>(last.slot)]);
  }

  static constexpr double kNever = std::numeric_limits<double>::infinity();

 private:
  struct Node {
    double time;
    int slot;
  };
  static bool less(const Node& a, const Node& b) noexcept {
    return a.time < b.time || (a.time == b.time && a.slot < b.slot);
  }
  void place(int p, const Node& n) {
    heap_[static_cast<std::size_t>(p)] = n;
    pos_[static_cast<std::size_t>(n.slot)] = p;
  }
  void sift_up(int p) {
    const Node n = heap_[static_cast<std::size_t>(p)];
    while (p > 0) {
      const int parent = (p - 1) / 2;
      if (!less(n, heap_[static_cast<std::size_t>(parent)])) break;
      place(p, heap_[static_cast<std::size_t>(parent)]);
      p = parent;
    }
    place(p, n);
  }
  void sift_down(int p) {
    const int size = static_cast<int>(heap_.size());
    const Node n = heap_[static_cast<std::size_t>(p)];
    for (;;) {
      int child = 2 * p + 1;
      if (child >= size) break;
      if (child + 1 < size && less(heap_[static_cast<std::size_t>(child + 1)], heap_[static_cast<std::size_t>(child)]))
        ++child;
      if (!less(heap_[static_cast<std::size_t>(child)], n)) break;
      place(p, heap_[static_cast<std::size_t>(child)]);
      p = child;
    }
    place(p, n);
  }

  std::vector<int> pos_;
  std::vector<Node> heap_;
};

struct LinkState {
  std::int64_t queue = 0;      // packets in the buffer, including the one on air
  bool saturated = false;
  bool silent = false;         // excluded from a saturated sub-network run
  bool transmitting = false;
  int busy_neighbors = 0;
  bool has_backoff = false;    // a countdown is in progress or frozen
  double remaining = 0.0;      // frozen remainder
  double tx_start = 0.0;
  double airtime = 0.0;
  // Queue integrals over the measured window.
  double last_change = 0.0;
  double queue_area = 0.0;
  double empty_time = 0.0;
  std::int64_t queue_at_warmup = 0;
  bool warmup_recorded = false;
};

class Simulation {
 public:
  Simulation(const ContentionGraph& g, const SimConfig& cfg)
      : g_(g), cfg_(cfg), n_(g.size()), links_(static_cast<std::size_t>(n_)), events_(n_),
        rng_(cfg.seed), warmup_(cfg.duration * cfg.warmup_fraction) {
    arrival_rate_.assign(static_cast<std::size_t>(n_), 0.0);
    if (!cfg.offered_load.empty()) arrival_rate_ = cfg.offered_load;  // mean tx time is 1
    for (int i = 0; i < n_; ++i) {
      auto& L = link(i);
      if (cfg.saturated_mode) {
        const bool on = !cfg.saturated_active || cfg.saturated_active->contains(i);
        L.saturated = on;
        L.silent = !on;
        arrival_rate_[static_cast<std::size_t>(i)] = 0.0;
      }
    }
  }

  SimResult run() {
    for (int i = 0; i < n_; ++i) {
      if (link(i).saturated) start_backoff(i, 0.0);
      else schedule_arrival(i, 0.0);
    }

    while (!events_.empty()) {
      const int slot = events_.top();
      const double now = events_.top_time();
      if (now > cfg_.duration) break;
      events_.cancel(slot);
      ++processed_;
      const int i = slot % n_;
      switch (slot / n_) {
        case kArrival: on_arrival(i, now); break;
        case kBackoffExpiry: on_backoff_expiry(i, now); break;
        case kTxEnd: on_tx_end(i, now); break;
      }
    }
    return collect();
  }

 private:
  LinkState& link(int i) { return links_[static_cast<std::size_t>(i)]; }
  int slot(int i, EventKind k) const { return k * n_ + i; }

  double draw_exponential(double mean) {
    return std::exponential_distribution<double>(1.0 / mean)(rng_);
  }
  double draw_backoff(int i) {
    const double mean = 1.0 / g_.rho(i);  // E[t_cd] = E[t_tr] / rho
    if (cfg_.backoff == BackoffDistribution::kUniform)
      return std::uniform_real_distribution<double>(0.0, 2.0 * mean)(rng_);
    return draw_exponential(mean);
  }

  void trace(double t, int i, TraceEventType type) {
    if (cfg_.record_trace) trace_.push_back({t, i, type});
  }

  void account_queue(LinkState& L, double now) {
    if (now <= warmup_) {
      L.last_change = now;
      return;
    }
    if (!L.warmup_recorded) {
      L.queue_at_warmup = L.queue;
      L.warmup_recorded = true;
    }
    const double from = std::max(L.last_change, warmup_);
    const double dt = now - from;
    L.queue_area += dt * static_cast<double>(L.queue);
    if (L.queue == 0) L.empty_time += dt;
    L.last_change = now;
  }

  void schedule_arrival(int i, double now) {
    const double rate = arrival_rate_[static_cast<std::size_t>(i)];
    if (rate > 0.0) events_.schedule(slot(i, kArrival), now + draw_exponential(1.0 / rate));
  }

  bool wants_channel(const LinkState& L) const { return L.saturated || L.queue > 0; }

  // Draws a fresh backoff; it counts down only while the channel is idle.
  void start_backoff(int i, double now) {
    auto& L = link(i);
    L.has_backoff = true;
    L.remaining = draw_backoff(i);
    trace(now, i, TraceEventType::kBackoffStart);
    if (L.busy_neighbors == 0) events_.schedule(slot(i, kBackoffExpiry), now + L.remaining);
  }

  void on_arrival(int i, double now) {
    auto& L = link(i);
    account_queue(L, now);
    ++L.queue;
    trace(now, i, TraceEventType::kArrival);
    if (L.queue == 1 && !L.transmitting) start_backoff(i, now);
    schedule_arrival(i, now);
  }

  void on_backoff_expiry(int i, double now) {
    auto& L = link(i);
    L.has_backoff = false;
    std::uint32_t nb = g_.neighbors(i);
    for (std::uint32_t b = nb; b != 0; b &= b - 1)
      if (link(__builtin_ctz(b)).transmitting) ++violations_;
    L.transmitting = true;
    L.tx_start = now;
    trace(now, i, TraceEventType::kTxStart);
    events_.schedule(slot(i, kTxEnd), now + draw_exponential(1.0));

    for (std::uint32_t b = nb; b != 0; b &= b - 1) {
      const int j = __builtin_ctz(b);
      auto& N = link(j);
      if (N.busy_neighbors++ == 0 && events_.pending(slot(j, kBackoffExpiry))) {
        N.remaining = events_.time_of(slot(j, kBackoffExpiry)) - now;
        events_.cancel(slot(j, kBackoffExpiry));
        trace(now, j, TraceEventType::kFreeze);
      }
    }
  }

  void on_tx_end(int i, double now) {
    auto& L = link(i);
    L.transmitting = false;
    L.airtime += overlap(L.tx_start, now);
    trace(now, i, TraceEventType::kTxEnd);
    if (!L.saturated) {
      account_queue(L, now);
      --L.queue;
    }
    for (std::uint32_t b = g_.neighbors(i); b != 0; b &= b - 1) {
      const int j = __builtin_ctz(b);
      auto& N = link(j);
      if (--N.busy_neighbors == 0 && N.has_backoff && !N.transmitting) {
        events_.schedule(slot(j, kBackoffExpiry), now + N.remaining);
        trace(now, j, TraceEventType::kResume);
      }
    }
    if (wants_channel(L)) start_backoff(i, now);
  }

  double overlap(double start, double end) const {
    return std::max(0.0, std::min(end, cfg_.duration) - std::max(start, warmup_));
  }

  SimResult collect() {
    SimResult res;
    res.seed = cfg_.seed;
    res.events_processed = processed_;
    res.overlap_violations = violations_;
    res.measured_time = cfg_.duration - warmup_;
    res.th_hat.resize(static_cast<std::size_t>(n_));
    res.queue.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      auto& L = link(i);
      if (L.transmitting) L.airtime += overlap(L.tx_start, cfg_.duration);
      res.th_hat[static_cast<std::size_t>(i)] =
          res.measured_time > 0.0 ? std::clamp(L.airtime / res.measured_time, 0.0, 1.0) : 0.0;

      QueueStats& q = res.queue[static_cast<std::size_t>(i)];
      if (L.saturated) {
        q.saturated = true;
        continue;
      }
      account_queue(L, cfg_.duration);
      if (res.measured_time > 0.0) {
        q.mean_length = L.queue_area / res.measured_time;
        q.empty_fraction = L.empty_time / res.measured_time;
      }
      q.final_length = L.queue;
      // A stable queue returns to small values; an overloaded one drifts
      // upward well beyond the Poisson fluctuation of the window.
      const double expected_arrivals = arrival_rate_[static_cast<std::size_t>(i)] * res.measured_time;
      const double growth = static_cast<double>(L.queue - L.queue_at_warmup);
      q.saturated = growth > 10.0 + 5.0 * std::sqrt(expected_arrivals);
    }
    res.trace = std::move(trace_);
    return res;
  }

  const ContentionGraph& g_;
  const SimConfig& cfg_;
  int n_;
  std::vector<LinkState> links_;
  std::vector<double> arrival_rate_;
  EventList events_;
  std::mt19937_64 rng_;
  double warmup_;
  std::uint64_t processed_ = 0;
  std::uint64_t violations_ = 0;
  std::vector<TraceEvent> trace_;
};

}  // namespace

SimResult simulate(const ContentionGraph& g, const SimConfig& cfg) {
  validate(cfg, g.size());
  return Simulation(g, cfg).run();
}

SimResult simulate_saturated(const ContentionGraph& g, SubnetworkMask active, SimConfig cfg) {
  cfg.saturated_mode = true;
  cfg.saturated_active = active;
  return simulate(g, cfg);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = derive_seed(master, k);
  return out;
}

PooledResult simulate_seeds(const ContentionGraph& g, const SimConfig& cfg,
                            std::span<const std::uint64_t> seeds, int threads) {
  validate(cfg, g.size());
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one seed is required");
  PooledResult pooled;
  pooled.runs.resize(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t k) {
    SimConfig c = cfg;
    c.seed = seeds[k];
    pooled.runs[k] = simulate(g, c);
  });

  const auto n = static_cast<std::size_t>(g.size());
  const double runs = static_cast<double>(seeds.size());
  pooled.mean.assign(n, 0.0);
  pooled.std_error.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& r : pooled.runs) sum += r.th_hat[i];
    const double mean = sum / runs;
    double ss = 0.0;
    for (const auto& r : pooled.runs) ss += (r.th_hat[i] - mean) * (r.th_hat[i] - mean);
    pooled.mean[i] = mean;
    if (seeds.size() > 1) pooled.std_error[i] = std::sqrt(ss / (runs - 1.0) / runs);
  }
  return pooled;
}

std::uint64_t audit_mutual_exclusion(const ContentionGraph& g, std::span<const TraceEvent> trace) {
  std::vector<bool> on_air(static_cast<std::size_t>(g.size()), false);
  std::uint64_t violations = 0;
  for (const TraceEvent& e : trace) {
    if (e.type == TraceEventType::kTxStart) {
      for (int j = 0; j < g.size(); ++j)
        if (on_air[static_cast<std::size_t>(j)] && g.adjacent(e.link, j)) ++violations;
      on_air[static_cast<std::size_t>(e.link)] = true;
    } else if (e.type == TraceEventType::kTxEnd) {
      on_air[static_cast<std::size_t>(e.link)] = false;
    }
  }
  return violations;
}

void write_trace_csv(std::ostream& out, std::span<const TraceEvent> trace) {
  const auto old = out.precision(17);
  out << "time,link,event\n";
  for (const TraceEvent& e : trace) out << e.time << "," << e.link + 1 << "," << to_string(e.type) << "\n";
  out.precision(old);
}

}  // namespace csmaopt
