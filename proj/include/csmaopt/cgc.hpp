#pragma once

#include <span>
#include <string>
#include <vector>

#include "csmaopt/graph.hpp"
#include "csmaopt/product_form.hpp"

namespace csmaopt {

using OfferedLoadVector = std::vector<double>;

/// The dense matrix is 2^n rows by n columns; above this many links only the
/// row-on-demand path is available.
inline constexpr int kMaxDenseLinks = 20;

/// th[j][i]: saturated throughput of link i in the sub-network whose on-mask
/// has integer value j.
class SubnetworkThroughputMatrix {
 public:
  SubnetworkThroughputMatrix(int n_links, std::vector<double> row_major);

  int link_count() const noexcept { return n_links_; }
  std::size_t subnet_count() const noexcept { return std::size_t{1} << n_links_; }
  double at(std::size_t subnet, int link) const {
    return data_[subnet * static_cast<std::size_t>(n_links_) + static_cast<std::size_t>(link)];
  }
  std::span<const double> row(std::size_t subnet) const {
    return std::span<const double>(data_).subspan(subnet * static_cast<std::size_t>(n_links_),
                                                  static_cast<std::size_t>(n_links_));
  }
  /// Sum of the row, the aggregate throughput of sub-network j.
  double aggregate(std::size_t subnet) const;

 private:
  int n_links_;
  std::vector<double> data_;
};

SubnetworkThroughputMatrix subnetwork_throughput_matrix(const ContentionGraph& g,
                                                        int threads = 1);

/// One matrix row computed on demand.
inline ThroughputVector subnetwork_row(const ContentionGraph& g, SubnetworkMask j) {
  return saturated_throughputs(g, j);
}

/// Mixture th_i = sum_j th[j][i] q_j.
ThroughputVector combine_throughputs(const SubnetworkThroughputMatrix& m, std::span<const double> q);

/// Offered load equals achieved throughput; checks every entry is in [0, 1).
OfferedLoadVector offered_load_from_throughput(std::span<const double> th);

/// Validates q as a probability vector over the 2^n sub-networks.
void validate_q(std::span<const double> q, std::size_t expected_size);

/// CSV: header `subnet,th_1,...,th_n`, one line per sub-network.
std::string matrix_to_csv(const SubnetworkThroughputMatrix& m);

}  // namespace csmaopt
