#include "csmaopt/product_form.hpp"

#include <algorithm>
#include <cmath>

#include "csmaopt/numeric.hpp"

namespace csmaopt {
namespace {

// Weights are exp(sum ln rho_i - shift). Large networks or intensities use a
// shift equal to the largest log-weight so nothing overflows; otherwise the
// raw products are used.
struct WeightedStates {
  std::vector<StateMask> states;
  std::vector<double> weights;
  double log_shift = 0.0;
  double scaled_partition = 0.0;
};

WeightedStates weigh(const ContentionGraph& g, SubnetworkMask active) {
  WeightedStates ws;
  ws.states = enumerate_independent_sets(g, active);
  ws.weights.resize(ws.states.size());

  const auto rho = g.rho();
  const bool log_space =
      g.size() > 16 || *std::max_element(rho.begin(), rho.end()) > 100.0;

  if (log_space) {
    std::vector<double> log_rho(rho.size());
    std::transform(rho.begin(), rho.end(), log_rho.begin(), [](double r) { return std::log(r); });
    double max_log = 0.0;
    for (std::size_t k = 0; k < ws.states.size(); ++k) {
      double lw = 0.0;
      for (std::uint32_t b = ws.states[k].bits; b != 0; b &= b - 1)
        lw += log_rho[static_cast<std::size_t>(__builtin_ctz(b))];
      ws.weights[k] = lw;
      max_log = std::max(max_log, lw);
    }
    for (double& w : ws.weights) w = std::exp(w - max_log);
    ws.log_shift = max_log;
  } else {
    for (std::size_t k = 0; k < ws.states.size(); ++k) {
      double w = 1.0;
      for (std::uint32_t b = ws.states[k].bits; b != 0; b &= b - 1)
        w *= rho[static_cast<std::size_t>(__builtin_ctz(b))];
      ws.weights[k] = w;
    }
  }
  CompensatedSum z;
  for (double w : ws.weights) z.add(w);
  ws.scaled_partition = z.value();
  return ws;
}

}  // namespace

StationaryDistribution stationary_distribution(const ContentionGraph& g, SubnetworkMask active) {
  WeightedStates ws = weigh(g, active);
  StationaryDistribution d;
  d.probs.resize(ws.weights.size());
  for (std::size_t k = 0; k < ws.weights.size(); ++k)
    d.probs[k] = ws.weights[k] / ws.scaled_partition;
  d.states = std::move(ws.states);
  d.log_partition = std::log(ws.scaled_partition) + ws.log_shift;
  return d;
}

ThroughputVector saturated_throughputs(const ContentionGraph& g, SubnetworkMask active) {
  const WeightedStates ws = weigh(g, active);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(g.size()));
  for (std::size_t k = 0; k < ws.states.size(); ++k)
    for (std::uint32_t b = ws.states[k].bits; b != 0; b &= b - 1)
      acc[static_cast<std::size_t>(__builtin_ctz(b))].add(ws.weights[k]);
  ThroughputVector th(acc.size());
  for (std::size_t i = 0; i < th.size(); ++i) th[i] = acc[i].value() / ws.scaled_partition;
  return th;
}

ThroughputVector ThroughputCache::get(SubnetworkMask active) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = memo_.find(active.bits); it != memo_.end()) return it->second;
  }
  ThroughputVector th = saturated_throughputs(graph_, active);
  std::unique_lock lock(mutex_);
  return memo_.try_emplace(active.bits, std::move(th)).first->second;
}

std::size_t ThroughputCache::size() const {
  std::shared_lock lock(mutex_);
  return memo_.size();
}

}  // namespace csmaopt
