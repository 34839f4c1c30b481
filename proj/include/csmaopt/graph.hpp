#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csmaopt {

/// Largest network the exact sub-network decomposition accepts (2^n states).
inline constexpr int kMaxLinks = 24;

/// Typical access intensity used throughout the evaluation.
inline constexpr double kDefaultRho = 5.3548;

/// Set of links that are transmitting at the same time. A valid state is an
/// independent set of the contention graph.
struct StateMask {
  std::uint32_t bits = 0;

  constexpr bool contains(int link) const noexcept { return (bits >> link) & 1U; }
  constexpr int count() const noexcept { return __builtin_popcount(bits); }
  friend constexpr auto operator<=>(StateMask, StateMask) = default;
};

/// Set of links participating in channel competition (the "on" links of a
/// saturated sub-network). The sub-network index is the integer value.
struct SubnetworkMask {
  std::uint32_t bits = 0;

  static constexpr SubnetworkMask all(int n) noexcept {
    return {n >= 32 ? ~0U : ((1U << n) - 1U)};
  }
  constexpr bool contains(int link) const noexcept { return (bits >> link) & 1U; }
  constexpr int count() const noexcept { return __builtin_popcount(bits); }
  friend constexpr auto operator<=>(SubnetworkMask, SubnetworkMask) = default;
};

/// Unordered carrier-sensing pair, stored with a < b.
struct Edge {
  int a = 0;
  int b = 0;
  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Links, their mutual carrier-sensing relation and per-link access
/// intensity. Immutable once constructed; the constructor validates.
class ContentionGraph {
 public:
  ContentionGraph(int n, std::vector<Edge> edges, std::vector<double> rho);

  int size() const noexcept { return n_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const double> rho() const noexcept { return rho_; }
  double rho(int link) const { return rho_.at(static_cast<std::size_t>(link)); }

  /// Bit mask of the neighbors of `link`.
  std::uint32_t neighbors(int link) const { return adjacency_.at(static_cast<std::size_t>(link)); }
  bool adjacent(int i, int j) const { return (neighbors(i) >> j) & 1U; }
  bool is_independent(StateMask s) const noexcept;
  int degree(int link) const { return __builtin_popcount(neighbors(link)); }
  double mean_degree() const noexcept;

  /// Isolated-link throughput bound rho / (1 + rho).
  double max_throughput(int link) const { return rho(link) / (1.0 + rho(link)); }

  ContentionGraph with_rho(std::vector<double> rho) const;
  ContentionGraph with_uniform_rho(double rho) const;

  /// Subgraph induced by `active`, relabelled 0..k-1 in increasing order of
  /// the original index. `original` receives the inverse map if non-null.
  ContentionGraph induced(SubnetworkMask active, std::vector<int>* original = nullptr) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<double> rho_;
  std::vector<std::uint32_t> adjacency_;
};

/// Reads the line-oriented topology format (`links N`, `rho I V`,
/// `rho * V`, `edge I J`, `#` comments, 1-based labels).
ContentionGraph parse_topology(std::string_view text);
ContentionGraph load_topology(const std::string& path);
std::string format_topology(const ContentionGraph& g);

/// Every independent set of g restricted to `active`, ascending by value.
/// The empty state is always first.
std::vector<StateMask> enumerate_independent_sets(const ContentionGraph& g,
                                                  SubnetworkMask active);

/// Erdos-Renyi graph with edge probability d/(n-1), resampled until the
/// realized mean degree is within 0.3 of d.
ContentionGraph random_graph(int n, double target_mean_degree, std::uint64_t seed,
                             double rho = kDefaultRho);

/// The four-link ring: links 1,2 each sense links 3,4 (0-based 0-2,0-3,1-2,1-3).
ContentionGraph ring4(double rho = kDefaultRho);

}  // namespace csmaopt
