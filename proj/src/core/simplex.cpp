#include "csmaopt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csmaopt/error.hpp"

namespace csmaopt::lp {

LinearProgram::LinearProgram(int rows, int cols)
    : objective(static_cast<std::size_t>(cols), 0.0),
      lower(static_cast<std::size_t>(cols), 0.0),
      upper(static_cast<std::size_t>(cols), kInfinity),
      sense(static_cast<std::size_t>(rows), RowSense::kEqual),
      rhs(static_cast<std::size_t>(rows), 0.0),
      rows_(rows),
      cols_(cols),
      a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {
  if (rows < 1 || cols < 1)
    throw Error(ErrorCode::kInvalidArgument, "linear program needs at least one row and column");
}

const char* to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

enum class VarState { kBasic, kAtLower, kAtUpper, kFreeZero };

// Working form: every row is an equality over structural, slack and
// artificial columns. Column layout: [structural | slack | artificial].
class Solver {
 public:
  Solver(const LinearProgram& p, const SimplexOptions& o) : opt_(o), m_(p.rows()), n_struct_(p.cols()) {
    for (int k = 0; k < m_; ++k)
      if (p.sense[static_cast<std::size_t>(k)] != RowSense::kEqual) ++n_slack_;
    n_ = n_struct_ + n_slack_ + m_;
    a_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_), 0.0);
    lo_.assign(static_cast<std::size_t>(n_), 0.0);
    up_.assign(static_cast<std::size_t>(n_), kInfinity);
    obj_.assign(static_cast<std::size_t>(n_), 0.0);
    b_ = p.rhs;

    for (int j = 0; j < n_struct_; ++j) {
      const auto col = p.column(j);
      std::copy(col.begin(), col.end(), a_.begin() + static_cast<std::ptrdiff_t>(offset(j)));
      lo_[static_cast<std::size_t>(j)] = p.lower[static_cast<std::size_t>(j)];
      up_[static_cast<std::size_t>(j)] = p.upper[static_cast<std::size_t>(j)];
      obj_[static_cast<std::size_t>(j)] = p.objective[static_cast<std::size_t>(j)];
      if (lo_[static_cast<std::size_t>(j)] > up_[static_cast<std::size_t>(j)])
        throw Error(ErrorCode::kInvalidArgument, "column has lower bound above upper bound");
    }
    int s = n_struct_;
    for (int k = 0; k < m_; ++k) {
      const RowSense sense = p.sense[static_cast<std::size_t>(k)];
      if (sense == RowSense::kEqual) continue;
      a_[offset(s) + static_cast<std::size_t>(k)] = sense == RowSense::kLessEqual ? 1.0 : -1.0;
      ++s;
    }

    x_.assign(static_cast<std::size_t>(n_), 0.0);
    state_.assign(static_cast<std::size_t>(n_), VarState::kAtLower);
    for (int j = 0; j < n_struct_ + n_slack_; ++j) place_at_bound(j);

    // Artificials absorb the residual of the initial nonbasic point.
    std::vector<double> residual = b_;
    for (int j = 0; j < n_struct_ + n_slack_; ++j) {
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (int k = 0; k < m_; ++k) residual[static_cast<std::size_t>(k)] -= at(k, j) * xj;
    }
    basis_.resize(static_cast<std::size_t>(m_));
    binv_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_), 0.0);
    for (int k = 0; k < m_; ++k) {
      const int art = artificial(k);
      const double sign = residual[static_cast<std::size_t>(k)] >= 0.0 ? 1.0 : -1.0;
      a_[offset(art) + static_cast<std::size_t>(k)] = sign;
      x_[static_cast<std::size_t>(art)] = std::abs(residual[static_cast<std::size_t>(k)]);
      state_[static_cast<std::size_t>(art)] = VarState::kBasic;
      basis_[static_cast<std::size_t>(k)] = art;
      binv(k, k) = sign;
    }
  }

  SimplexResult run() {
    SimplexResult result;

    std::vector<double> phase1(static_cast<std::size_t>(n_), 0.0);
    for (int k = 0; k < m_; ++k) phase1[static_cast<std::size_t>(artificial(k))] = -1.0;
    SolveStatus st = iterate(phase1);
    refactor();

    result.row_infeasibility.assign(static_cast<std::size_t>(m_), 0.0);
    double infeasibility = 0.0;
    for (int k = 0; k < m_; ++k) {
      const double v = std::max(0.0, x_[static_cast<std::size_t>(artificial(k))]);
      result.row_infeasibility[static_cast<std::size_t>(k)] = v;
      infeasibility += v;
    }
    if (st == SolveStatus::kIterationLimit) return finish(result, st);
    if (infeasibility > opt_.feasibility_tol) return finish(result, SolveStatus::kInfeasible);

    // Artificials are pinned at zero for phase two; basic ones at zero level
    // stay in the basis until a ratio test drives them out.
    for (int k = 0; k < m_; ++k) {
      const auto art = static_cast<std::size_t>(artificial(k));
      up_[art] = 0.0;
      if (state_[art] != VarState::kBasic) {
        state_[art] = VarState::kAtLower;
        x_[art] = 0.0;
      }
    }
    st = iterate(obj_);
    refactor();
    return finish(result, st);
  }

 private:
  std::size_t offset(int col) const { return static_cast<std::size_t>(col) * static_cast<std::size_t>(m_); }
  double at(int row, int col) const { return a_[offset(col) + static_cast<std::size_t>(row)]; }
  double& binv(int r, int c) { return binv_[static_cast<std::size_t>(r) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(c)]; }
  int artificial(int row) const { return n_struct_ + n_slack_ + row; }

  void place_at_bound(int j) {
    const auto u = static_cast<std::size_t>(j);
    if (std::isfinite(lo_[u])) {
      state_[u] = VarState::kAtLower;
      x_[u] = lo_[u];
    } else if (std::isfinite(up_[u])) {
      state_[u] = VarState::kAtUpper;
      x_[u] = up_[u];
    } else {
      state_[u] = VarState::kFreeZero;
      x_[u] = 0.0;
    }
  }

  bool can_increase(int j) const {
    const auto u = static_cast<std::size_t>(j);
    return state_[u] != VarState::kAtUpper && x_[u] < up_[u];
  }
  bool can_decrease(int j) const {
    const auto u = static_cast<std::size_t>(j);
    return state_[u] != VarState::kAtLower && x_[u] > lo_[u];
  }

  // Rebuilds B^-1 by Gauss-Jordan with partial pivoting and recomputes the
  // basic values from the nonbasic ones.
  void refactor() {
    std::vector<double> work(static_cast<std::size_t>(m_) * static_cast<std::size_t>(2 * m_), 0.0);
    const auto w = [&](int r, int c) -> double& {
      return work[static_cast<std::size_t>(r) * static_cast<std::size_t>(2 * m_) + static_cast<std::size_t>(c)];
    };
    double norm_b = 0.0;
    for (int c = 0; c < m_; ++c) {
      double col_sum = 0.0;
      for (int r = 0; r < m_; ++r) {
        w(r, c) = at(r, basis_[static_cast<std::size_t>(c)]);
        col_sum += std::abs(w(r, c));
      }
      norm_b = std::max(norm_b, col_sum);
      w(c, m_ + c) = 1.0;
    }
    for (int c = 0; c < m_; ++c) {
      int pivot = c;
      for (int r = c + 1; r < m_; ++r)
        if (std::abs(w(r, c)) > std::abs(w(pivot, c))) pivot = r;
      if (std::abs(w(pivot, c)) < 1e-13 * std::max(1.0, norm_b)) {
        std::ostringstream msg;
        msg << "singular basis at column " << c << " (pivot " << w(pivot, c) << ", ||B||_1 " << norm_b
            << ", iteration " << iterations_ << ")";
        throw Error(ErrorCode::kNumerical, msg.str());
      }
      if (pivot != c)
        for (int k = 0; k < 2 * m_; ++k) std::swap(w(pivot, k), w(c, k));
      const double inv = 1.0 / w(c, c);
      for (int k = 0; k < 2 * m_; ++k) w(c, k) *= inv;
      for (int r = 0; r < m_; ++r) {
        if (r == c || w(r, c) == 0.0) continue;
        const double f = w(r, c);
        for (int k = 0; k < 2 * m_; ++k) w(r, k) -= f * w(c, k);
      }
    }
    double norm_inv = 0.0;
    for (int c = 0; c < m_; ++c) {
      double col_sum = 0.0;
      for (int r = 0; r < m_; ++r) {
        binv(r, c) = w(r, m_ + c);
        col_sum += std::abs(binv(r, c));
      }
      norm_inv = std::max(norm_inv, col_sum);
    }
    condition_ = norm_b * norm_inv;

    std::vector<double> rhs = b_;
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == VarState::kBasic) continue;
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (int k = 0; k < m_; ++k) rhs[static_cast<std::size_t>(k)] -= at(k, j) * xj;
    }
    for (int r = 0; r < m_; ++r) {
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += binv(r, k) * rhs[static_cast<std::size_t>(k)];
      x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = v;
    }
  }

  SolveStatus iterate(const std::vector<double>& cost) {
    std::vector<double> y(static_cast<std::size_t>(m_));
    std::vector<double> alpha(static_cast<std::size_t>(m_));
    bool bland = false;
    int degenerate_run = 0;
    int since_refactor = 0;

    for (;;) {
      if (iterations_ >= opt_.max_iterations) return SolveStatus::kIterationLimit;
      if (since_refactor >= opt_.refactor_interval) {
        refactor();
        since_refactor = 0;
      }

      for (int k = 0; k < m_; ++k) {
        double v = 0.0;
        for (int r = 0; r < m_; ++r)
          v += cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] * binv(r, k);
        y[static_cast<std::size_t>(k)] = v;
      }

      // Pricing.
      int entering = -1;
      double entering_d = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == VarState::kBasic) continue;
        double d = cost[static_cast<std::size_t>(j)];
        const double* col = &a_[offset(j)];
        for (int k = 0; k < m_; ++k) d -= y[static_cast<std::size_t>(k)] * col[k];
        const bool eligible = (d > opt_.optimality_tol && can_increase(j)) ||
                              (d < -opt_.optimality_tol && can_decrease(j));
        if (!eligible) continue;
        if (bland) {
          entering = j;
          entering_d = d;
          break;
        }
        if (std::abs(d) > std::abs(entering_d)) {
          entering = j;
          entering_d = d;
        }
      }
      if (entering < 0) return SolveStatus::kOptimal;

      const double dir = entering_d > 0.0 ? 1.0 : -1.0;
      for (int r = 0; r < m_; ++r) {
        double v = 0.0;
        for (int k = 0; k < m_; ++k) v += binv(r, k) * at(k, entering);
        alpha[static_cast<std::size_t>(r)] = v;
      }

      // Ratio test. delta is the rate of change of basic r per unit step.
      int leaving_row = -1;
      bool leaving_to_upper = false;
      double step = kInfinity;
      for (int r = 0; r < m_; ++r) {
        const double delta = -dir * alpha[static_cast<std::size_t>(r)];
        const auto var = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
        double limit = kInfinity;
        bool to_upper = false;
        if (delta < -opt_.pivot_tol && std::isfinite(lo_[var])) {
          limit = std::max(0.0, (x_[var] - lo_[var]) / -delta);
        } else if (delta > opt_.pivot_tol && std::isfinite(up_[var])) {
          limit = std::max(0.0, (up_[var] - x_[var]) / delta);
          to_upper = true;
        }
        if (!std::isfinite(limit)) continue;
        bool take = false;
        if (leaving_row < 0 || limit < step - 1e-12) {
          take = true;
        } else if (limit <= step + 1e-12) {
          if (bland)
            take = basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leaving_row)];
          else
            take = std::abs(alpha[static_cast<std::size_t>(r)]) >
                   std::abs(alpha[static_cast<std::size_t>(leaving_row)]);
        }
        if (take) {
          leaving_row = r;
          leaving_to_upper = to_upper;
          step = limit;
        }
      }

      const auto e = static_cast<std::size_t>(entering);
      const double span = up_[e] - lo_[e];
      const bool bound_flip = std::isfinite(span) && span <= step;
      if (bound_flip) step = span;
      if (!std::isfinite(step)) return SolveStatus::kUnbounded;

      ++iterations_;
      ++since_refactor;
      if (step <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_limit && !bland) {
          bland = true;
          ++bland_switches_;
        }
      } else {
        degenerate_run = 0;
        bland = false;
      }

      x_[e] += dir * step;
      for (int r = 0; r < m_; ++r)
        x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] -= dir * step * alpha[static_cast<std::size_t>(r)];

      if (bound_flip) {
        state_[e] = dir > 0.0 ? VarState::kAtUpper : VarState::kAtLower;
        x_[e] = dir > 0.0 ? up_[e] : lo_[e];
        continue;
      }

      const auto leaving = static_cast<std::size_t>(basis_[static_cast<std::size_t>(leaving_row)]);
      state_[leaving] = leaving_to_upper ? VarState::kAtUpper : VarState::kAtLower;
      x_[leaving] = leaving_to_upper ? up_[leaving] : lo_[leaving];
      state_[e] = VarState::kBasic;
      basis_[static_cast<std::size_t>(leaving_row)] = entering;

      const double pivot = alpha[static_cast<std::size_t>(leaving_row)];
      for (int k = 0; k < m_; ++k) binv(leaving_row, k) /= pivot;
      for (int r = 0; r < m_; ++r) {
        if (r == leaving_row) continue;
        const double f = alpha[static_cast<std::size_t>(r)];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) binv(r, k) -= f * binv(leaving_row, k);
      }
    }
  }

  SimplexResult& finish(SimplexResult& result, SolveStatus st) {
    result.status = st;
    result.iterations = iterations_;
    result.bland_switches = bland_switches_;
    result.basis_condition = condition_;
    result.x.assign(x_.begin(), x_.begin() + n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
      // Snap values within tolerance of a bound onto it.
      double& v = result.x[static_cast<std::size_t>(j)];
      if (std::abs(v - lo_[static_cast<std::size_t>(j)]) <= 1e-13) v = lo_[static_cast<std::size_t>(j)];
      if (std::abs(v - up_[static_cast<std::size_t>(j)]) <= 1e-13) v = up_[static_cast<std::size_t>(j)];
    }
    result.objective = 0.0;
    for (int j = 0; j < n_struct_; ++j)
      result.objective += obj_[static_cast<std::size_t>(j)] * result.x[static_cast<std::size_t>(j)];
    result.basic_columns.clear();
    for (int b : basis_)
      if (b < n_struct_) result.basic_columns.push_back(b);
    std::sort(result.basic_columns.begin(), result.basic_columns.end());
    return result;
  }

  SimplexOptions opt_;
  int m_;
  int n_struct_;
  int n_slack_ = 0;
  int n_ = 0;
  std::vector<double> a_;
  std::vector<double> lo_, up_, obj_, b_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<double> binv_;
  int iterations_ = 0;
  int bland_switches_ = 0;
  double condition_ = 1.0;
};

}  // namespace

SimplexResult solve(const LinearProgram& program, const SimplexOptions& options) {
  if (static_cast<int>(program.objective.size()) != program.cols() ||
      static_cast<int>(program.lower.size()) != program.cols() ||
      static_cast<int>(program.upper.size()) != program.cols() ||
      static_cast<int>(program.sense.size()) != program.rows() ||
      static_cast<int>(program.rhs.size()) != program.rows())
    throw Error(ErrorCode::kDimensionMismatch, "linear program vectors disagree with its shape");
  Solver solver(program, options);
  return solver.run();
}

}  // namespace csmaopt::lp
