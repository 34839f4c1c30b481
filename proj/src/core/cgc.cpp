#include "csmaopt/cgc.hpp"

#include <cmath>
#include <sstream>

#include "csmaopt/error.hpp"
#include "csmaopt/numeric.hpp"
#include "csmaopt/parallel.hpp"

namespace csmaopt {

SubnetworkThroughputMatrix::SubnetworkThroughputMatrix(int n_links, std::vector<double> row_major)
    : n_links_(n_links), data_(std::move(row_major)) {
  if (n_links_ < 1 || n_links_ > kMaxDenseLinks)
    throw Error(ErrorCode::kCapExceeded, "dense sub-network matrix supports 1.." +
                                             std::to_string(kMaxDenseLinks) + " links");
  if (data_.size() != subnet_count() * static_cast<std::size_t>(n_links_))
    throw Error(ErrorCode::kDimensionMismatch, "matrix data has the wrong size");
}

double SubnetworkThroughputMatrix::aggregate(std::size_t subnet) const {
  CompensatedSum s;
  for (double v : row(subnet)) s.add(v);
  return s.value();
}

SubnetworkThroughputMatrix subnetwork_throughput_matrix(const ContentionGraph& g, int threads) {
  const int n = g.size();
  if (n > kMaxDenseLinks)
    throw Error(ErrorCode::kCapExceeded, "sub-network matrix for " + std::to_string(n) +
                                             " links exceeds dense cap of " +
                                             std::to_string(kMaxDenseLinks));
  const std::size_t rows = std::size_t{1} << n;
  std::vector<double> data(rows * static_cast<std::size_t>(n), 0.0);
  // Rows are written to disjoint slices, so the fill is deterministic for any
  // thread count.
  parallel_for(rows, threads, [&](std::size_t j) {
    const ThroughputVector th = saturated_throughputs(g, {static_cast<std::uint32_t>(j)});
    std::copy(th.begin(), th.end(), data.begin() + static_cast<std::ptrdiff_t>(j * static_cast<std::size_t>(n)));
  });
  return SubnetworkThroughputMatrix(n, std::move(data));
}

void validate_q(std::span<const double> q, std::size_t expected_size) {
  if (q.size() != expected_size)
    throw Error(ErrorCode::kDimensionMismatch, "q has " + std::to_string(q.size()) +
                                                   " entries, expected " +
                                                   std::to_string(expected_size));
  constexpr double kTol = 1e-9;
  CompensatedSum total;
  for (double v : q) {
    if (!(v >= -kTol && v <= 1.0 + kTol))
      throw Error(ErrorCode::kInvalidArgument, "q entries must lie in [0, 1]");
    total.add(v);
  }
  if (std::abs(total.value() - 1.0) > kTol)
    throw Error(ErrorCode::kInvalidArgument, "q must sum to 1");
}

ThroughputVector combine_throughputs(const SubnetworkThroughputMatrix& m, std::span<const double> q) {
  validate_q(q, m.subnet_count());
  const int n = m.link_count();
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] == 0.0) continue;
    const auto row = m.row(j);
    for (int i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)].add(row[static_cast<std::size_t>(i)] * q[j]);
  }
  ThroughputVector th(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < th.size(); ++i) th[i] = acc[i].value();
  return th;
}

OfferedLoadVector offered_load_from_throughput(std::span<const double> th) {
  for (std::size_t i = 0; i < th.size(); ++i)
    if (!(th[i] >= 0.0 && th[i] < 1.0))
      throw Error(ErrorCode::kInvalidArgument,
                  "throughput of link " + std::to_string(i + 1) + " is outside [0, 1)");
  return OfferedLoadVector(th.begin(), th.end());
}

std::string matrix_to_csv(const SubnetworkThroughputMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  out << "subnet";
  for (int i = 0; i < m.link_count(); ++i) out << ",th_" << i + 1;
  out << "\n";
  for (std::size_t j = 0; j < m.subnet_count(); ++j) {
    out << j;
    for (double v : m.row(j)) out << "," << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace csmaopt
