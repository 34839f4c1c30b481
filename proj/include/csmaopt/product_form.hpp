#pragma once

#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "csmaopt/graph.hpp"

namespace csmaopt {

using ThroughputVector = std::vector<double>;

/// Saturated product-form distribution over the feasible states of a
/// (sub-)network: P_s proportional to the product of rho_i over s.
struct StationaryDistribution {
  std::vector<StateMask> states;  // ascending; states[0] is the empty state
  std::vector<double> probs;
  double log_partition = 0.0;     // ln Z
};

StationaryDistribution stationary_distribution(const ContentionGraph& g, SubnetworkMask active);

/// Long-run fraction of airtime each link spends transmitting when exactly
/// the links in `active` are saturated. Zero outside `active`.
ThroughputVector saturated_throughputs(const ContentionGraph& g, SubnetworkMask active);

inline ThroughputVector saturated_throughputs(const ContentionGraph& g) {
  return saturated_throughputs(g, SubnetworkMask::all(g.size()));
}

/// Memo of saturated_throughputs keyed by active mask, bound to one graph.
/// Safe for concurrent lookups and inserts.
class ThroughputCache {
 public:
  explicit ThroughputCache(ContentionGraph g) : graph_(std::move(g)) {}

  const ContentionGraph& graph() const noexcept { return graph_; }
  ThroughputVector get(SubnetworkMask active) const;
  std::size_t size() const;

 private:
  ContentionGraph graph_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::uint32_t, ThroughputVector> memo_;
};

}  // namespace csmaopt
