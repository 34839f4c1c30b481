#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace csmaopt::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

// maximize  objective . x
// s.t.      row_k(x) {<=,>=,=} rhs_k
//           lower <= x <= upper
// The constraint matrix is dense and stored column-major.
class LinearProgram {
 public:
  LinearProgram(int rows, int cols);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& coeff(int row, int col) { return a_[index(row, col)]; }
  double coeff(int row, int col) const { return a_[index(row, col)]; }
  std::span<const double> column(int col) const {
    return std::span<const double>(a_).subspan(index(0, col), static_cast<std::size_t>(rows_));
  }

  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<RowSense> sense;
  std::vector<double> rhs;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(col) * static_cast<std::size_t>(rows_) + static_cast<std::size_t>(row);
  }

  int rows_;
  int cols_;
  std::vector<double> a_;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
  int max_iterations = 200000;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_limit = 50;
  int refactor_interval = 64;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(SolveStatus s) noexcept;

struct SimplexResult {
  SolveStatus status = SolveStatus::kIterationLimit;
  std::vector<double> x;            // structural columns only
  double objective = 0.0;
  std::vector<int> basic_columns;   // structural indices in the final basis
  // Phase-one artificial level per row; nonzero entries certify which rows
  // could not be met when the program is infeasible.
  std::vector<double> row_infeasibility;
  int iterations = 0;
  int bland_switches = 0;
  double basis_condition = 1.0;     // ||B||_1 ||B^-1||_1 at termination
};

/// Two-phase primal revised simplex with bounded variables. Pricing is
/// Dantzig's rule; after a run of degenerate pivots it falls back to Bland's
/// rule until progress resumes. Throws Error(kNumerical) on a singular basis.
SimplexResult solve(const LinearProgram& program, const SimplexOptions& options = {});

}  // namespace csmaopt::lp
