#pragma once

#include <vector>

#include "lipcert/types.hpp"

namespace lipcert {

enum class RowSense { LE, EQ, GE };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

/// minimize cost'x  s.t.  A x (<=|=|>=) b,  lower <= x <= upper.
struct LpProblem {
  Matrix A;
  std::vector<RowSense> sense;
  Vector b;
  Vector cost;
  Vector lower;
  Vector upper;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
};

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  double objective = 0.0;
  Vector x;           // structural variables
  Vector row_duals;   // y with reduced costs d = c - A'y; empty unless optimal
  long iterations = 0;
};

/// One-shot solve (two-phase primal).
LpResult lp_solve(const LpProblem& lp, long iteration_limit = -1);

namespace detail {

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, FreeNonbasic };

struct BasisSnapshot {
  std::vector<Index> basis;
  std::vector<VarStatus> status;
};

/// Bounded-variable revised simplex over a fixed constraint matrix.
///
/// Columns are the structural variables followed by one slack per row
/// (a_i'x + s_i = b_i with slack bounds encoding the row sense). The basis
/// inverse is kept explicitly and updated in product form. Feasibility is
/// reached by relaxing violated slack bounds and driving the violation out
/// (costs +-1 on the relaxed columns), which avoids artificial columns.
/// Warm restarts after bound changes go through the dual simplex: bound
/// changes never disturb dual feasibility of an optimal basis.
class SimplexEngine {
 public:
  explicit SimplexEngine(const LpProblem& lp);

  Index num_rows() const { return nrows_; }
  Index num_structural() const { return nstruct_; }

  void set_var_bounds(Index j, double lo, double hi);
  void set_cost(const Vector& structural_cost);

  /// Two-phase primal solve from the slack basis (or the current basis when
  /// one exists and `from_scratch` is false).
  LpStatus solve_primal(bool from_scratch = false);

  /// Dual-simplex reoptimization from the current basis. Falls back to the
  /// primal path when no usable basis is available.
  LpStatus reoptimize();

  double objective() const;
  Vector solution() const;          // structural part
  Vector row_duals() const;
  double value_of(Index j) const { return value_[size_t(j)]; }
  long iterations_used() const { return total_iters_; }

  bool has_basis() const { return factorized_; }
  BasisSnapshot save_basis() const;
  void restore_basis(const BasisSnapshot& snap);

  long iteration_limit = -1;  // <0: automatic (50000 + 20*(rows+cols))

 private:
  Index nstruct_ = 0, nrows_ = 0, ncols_ = 0;
  Matrix As_;              // rows x nstruct
  Vector b_;
  Vector cost_;            // structural costs (slacks cost 0)
  std::vector<double> lo_, hi_;      // current working bounds, ncols
  std::vector<double> true_lo_, true_hi_;
  std::vector<double> value_;        // ncols
  std::vector<VarStatus> stat_;      // ncols
  std::vector<Index> basis_;         // nrows
  std::vector<Index> basic_pos_;     // ncols, -1 if nonbasic
  Matrix binv_;
  bool factorized_ = false;
  long total_iters_ = 0;
  long pivots_since_factor_ = 0;

  // phase-1 bookkeeping
  std::vector<char> relaxed_;        // column currently outside true bounds
  Index relaxed_count_ = 0;

  // A column whose working bounds coincide can never move: it is skipped by
  // pricing and by the dual ratio test (its reduced-cost sign is free).
  bool is_fixed(size_t s) const { return hi_[s] - lo_[s] <= 0.0; }

  double col_dot(const Vector& rho, Index j) const;
  Vector basis_column(Index j) const;   // B^-1 * A_j
  void factorize();
  void reset_to_slack_basis();
  void compute_basic_values();
  Vector dual_prices(const Vector& full_cost) const;
  Vector full_cost_vector(bool phase1) const;
  void relax_infeasible_columns();
  void restore_column(Index j);
  LpStatus primal_loop();
  LpStatus dual_loop();
  void pivot(Index entering, Index leaving_pos, const Vector& w);
  long max_iterations() const;
};

}  // namespace detail

}  // namespace lipcert
