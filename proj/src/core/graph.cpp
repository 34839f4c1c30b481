#include "csmaopt/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "csmaopt/error.hpp"

namespace csmaopt {

ContentionGraph::ContentionGraph(int n, std::vector<Edge> edges, std::vector<double> rho)
    : n_(n), edges_(std::move(edges)), rho_(std::move(rho)) {
  if (n_ < 1)
    throw Error(ErrorCode::kInvalidArgument, "graph needs at least one link");
  if (n_ > kMaxLinks)
    throw Error(ErrorCode::kCapExceeded, "graph has " + std::to_string(n_) +
                                             " links, cap is " + std::to_string(kMaxLinks));
  if (rho_.size() != static_cast<std::size_t>(n_))
    throw Error(ErrorCode::kDimensionMismatch, "rho vector length does not match link count");
  for (double r : rho_)
    if (!(r > 0.0) || !std::isfinite(r))
      throw Error(ErrorCode::kInvalidArgument, "access intensity must be positive and finite");

  adjacency_.assign(static_cast<std::size_t>(n_), 0U);
  for (auto& e : edges_) {
    if (e.a < 0 || e.b < 0 || e.a >= n_ || e.b >= n_)
      throw Error(ErrorCode::kInvalidArgument, "edge index out of range");
    if (e.a == e.b)
      throw Error(ErrorCode::kInvalidArgument, "self-loop on link " + std::to_string(e.a));
    if (e.a > e.b) std::swap(e.a, e.b);
    auto& adj = adjacency_[static_cast<std::size_t>(e.a)];
    if ((adj >> e.b) & 1U)
      throw Error(ErrorCode::kInvalidArgument, "duplicate edge " + std::to_string(e.a) + "-" +
                                                   std::to_string(e.b));
    adj |= 1U << e.b;
    adjacency_[static_cast<std::size_t>(e.b)] |= 1U << e.a;
  }
  std::sort(edges_.begin(), edges_.end());
}

bool ContentionGraph::is_independent(StateMask s) const noexcept {
  if (s.bits >> n_) return false;
  for (std::uint32_t rest = s.bits; rest != 0; rest &= rest - 1) {
    const int i = __builtin_ctz(rest);
    if (adjacency_[static_cast<std::size_t>(i)] & s.bits) return false;
  }
  return true;
}

double ContentionGraph::mean_degree() const noexcept {
  return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_);
}

ContentionGraph ContentionGraph::with_rho(std::vector<double> rho) const {
  return ContentionGraph(n_, edges_, std::move(rho));
}

ContentionGraph ContentionGraph::with_uniform_rho(double rho) const {
  return with_rho(std::vector<double>(static_cast<std::size_t>(n_), rho));
}

ContentionGraph ContentionGraph::induced(SubnetworkMask active, std::vector<int>* original) const {
  std::vector<int> map;
  std::vector<int> relabel(static_cast<std::size_t>(n_), -1);
  for (int i = 0; i < n_; ++i) {
    if (active.contains(i)) {
      relabel[static_cast<std::size_t>(i)] = static_cast<int>(map.size());
      map.push_back(i);
    }
  }
  if (map.empty())
    throw Error(ErrorCode::kInvalidArgument, "induced subgraph of an empty link set");
  std::vector<Edge> edges;
  for (const Edge& e : edges_) {
    const int a = relabel[static_cast<std::size_t>(e.a)];
    const int b = relabel[static_cast<std::size_t>(e.b)];
    if (a >= 0 && b >= 0) edges.push_back({a, b});
  }
  std::vector<double> rho;
  for (int i : map) rho.push_back(rho_[static_cast<std::size_t>(i)]);
  if (original) *original = map;
  return ContentionGraph(static_cast<int>(map.size()), std::move(edges), std::move(rho));
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw Error(ErrorCode::kParse, "topology line " + std::to_string(line) + ": " + msg);
}

long parse_int(const std::string& tok, int line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    parse_fail(line, "expected an integer, got '" + tok + "'");
  return v;
}

double parse_real(const std::string& tok, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    parse_fail(line, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) parse_fail(line, "expected a number, got '" + tok + "'");
  return v;
}

}  // namespace

ContentionGraph parse_topology(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  int n = -1;
  double default_rho = kDefaultRho;
  std::vector<double> explicit_rho;
  std::vector<bool> has_rho;
  std::vector<Edge> edges;

  auto link_index = [&](const std::string& tok, int line) {
    const long v = parse_int(tok, line);
    if (v < 1 || v > n)
      parse_fail(line, "link index " + tok + " outside 1.." + std::to_string(n));
    return static_cast<int>(v - 1);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "links") {
      if (n >= 0) parse_fail(line_no, "duplicate 'links' header");
      if (tok.size() != 2) parse_fail(line_no, "expected 'links N'");
      const long v = parse_int(tok[1], line_no);
      if (v < 1) parse_fail(line_no, "link count must be at least 1");
      if (v > kMaxLinks)
        throw Error(ErrorCode::kCapExceeded, "topology line " + std::to_string(line_no) +
                                                 ": " + std::to_string(v) +
                                                 " links exceeds cap of " +
                                                 std::to_string(kMaxLinks));
      n = static_cast<int>(v);
      explicit_rho.assign(static_cast<std::size_t>(n), 0.0);
      has_rho.assign(static_cast<std::size_t>(n), false);
      continue;
    }
    if (n < 0) parse_fail(line_no, "'links N' header must come first");

    if (tok[0] == "rho") {
      if (tok.size() != 3) parse_fail(line_no, "expected 'rho I VALUE' or 'rho * VALUE'");
      const double v = parse_real(tok[2], line_no);
      if (!(v > 0.0) || !std::isfinite(v)) parse_fail(line_no, "rho must be positive");
      if (tok[1] == "*") {
        default_rho = v;
      } else {
        const int i = link_index(tok[1], line_no);
        explicit_rho[static_cast<std::size_t>(i)] = v;
        has_rho[static_cast<std::size_t>(i)] = true;
      }
    } else if (tok[0] == "edge") {
      if (tok.size() != 3) parse_fail(line_no, "expected 'edge I J'");
      int a = link_index(tok[1], line_no);
      int b = link_index(tok[2], line_no);
      if (a == b) parse_fail(line_no, "self-loop on link " + tok[1]);
      if (a > b) std::swap(a, b);
      if (std::find(edges.begin(), edges.end(), Edge{a, b}) != edges.end())
        parse_fail(line_no, "duplicate edge " + tok[1] + " " + tok[2]);
      edges.push_back({a, b});
    } else {
      parse_fail(line_no, "unknown directive '" + tok[0] + "'");
    }
  }
  if (n < 0) throw Error(ErrorCode::kParse, "topology has no 'links N' header");

  std::vector<double> rho(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = has_rho[i] ? explicit_rho[i] : default_rho;
  return ContentionGraph(n, std::move(edges), std::move(rho));
}

ContentionGraph load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open topology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology(ss.str());
}

std::string format_topology(const ContentionGraph& g) {
  std::ostringstream out;
  out.precision(17);
  out << "links " << g.size() << "\n";
  for (int i = 0; i < g.size(); ++i) out << "rho " << i + 1 << " " << g.rho(i) << "\n";
  for (const Edge& e : g.edges()) out << "edge " << e.a + 1 << " " << e.b + 1 << "\n";
  return out.str();
}

namespace {

void branch(const ContentionGraph& g, int start, std::uint32_t current, std::uint32_t allowed,
            std::vector<StateMask>& out) {
  out.push_back({current});
  for (std::uint32_t rest = allowed >> start << start; rest != 0; rest &= rest - 1) {
    const int i = __builtin_ctz(rest);
    branch(g, i + 1, current | (1U << i), allowed & ~g.neighbors(i), out);
  }
}

}  // namespace

std::vector<StateMask> enumerate_independent_sets(const ContentionGraph& g,
                                                  SubnetworkMask active) {
  std::vector<StateMask> out;
  branch(g, 0, 0U, active.bits & SubnetworkMask::all(g.size()).bits, out);
  std::sort(out.begin(), out.end());
  return out;
}

ContentionGraph random_graph(int n, double target_mean_degree, std::uint64_t seed, double rho) {
  if (n < 1 || n > kMaxLinks)
    throw Error(ErrorCode::kInvalidArgument, "random graph size out of range");
  if (target_mean_degree < 0.0 || target_mean_degree > n - 1)
    throw Error(ErrorCode::kInvalidArgument, "target mean degree must lie in [0, n-1]");

  constexpr int kMaxAttempts = 10000;
  constexpr double kWindow = 0.3;
  const double p = n > 1 ? target_mean_degree / (n - 1) : 0.0;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(std::clamp(p, 0.0, 1.0));

  std::vector<double> realized;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (coin(rng)) edges.push_back({a, b});
    const double degree = 2.0 * static_cast<double>(edges.size()) / n;
    if (std::abs(degree - target_mean_degree) <= kWindow + 1e-12)
      return ContentionGraph(n, std::move(edges), std::vector<double>(static_cast<std::size_t>(n), rho));
    if (realized.size() < 8) realized.push_back(degree);
  }
  std::ostringstream msg;
  msg << "no graph within +-" << kWindow << " of mean degree " << target_mean_degree << " after "
      << kMaxAttempts << " attempts; first realized degrees:";
  for (double d : realized) msg << " " << d;
  throw Error(ErrorCode::kRetryExhausted, msg.str());
}

ContentionGraph ring4(double rho) {
  return ContentionGraph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, std::vector<double>(4, rho));
}

}  // namespace csmaopt
