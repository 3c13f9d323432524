#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lipcert/polytope.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

/// Invertible state/input transformation pair with Omega f(x) = f(Theta x).
/// Flags are filled in by certify's verify_symmetry.
struct SymmetryTuple {
  Matrix Theta;
  Matrix Omega;
  bool verified = false;
  bool norm_invariant_1 = false;
  bool norm_invariant_inf = false;
};

enum class TerminalKind { StateSet, LqrInvariant, Explicit };

/// Finite-horizon MPC data: x+ = Ax + Bu, stage cost x'Qx + u'Ru, terminal
/// cost x'Px, constraints x in X, u in U_set, x(N) in the terminal set.
struct MpcProblem {
  std::string name;
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  std::optional<Matrix> P;  // absent: solve the DARE
  int N = 1;
  Polytope X;
  Polytope U_set;
  TerminalKind terminal_kind = TerminalKind::StateSet;
  Polytope terminal_explicit;  // used when terminal_kind == Explicit
  std::vector<SymmetryTuple> symmetries;
  std::optional<Polytope> x_fun;

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }

  /// Dimension checks, positive definiteness of Q/R/P, compact sets with the
  /// origin in their interior.
  void validate() const;
};

enum class RowKind { State, Input, Terminal };

struct RowTag {
  RowKind kind = RowKind::State;
  int stage = 0;       // state-k / input-k; terminal carries stage N
  Index source_row = 0;  // row index within the originating set
};

std::string to_string(const RowTag& tag);

/// Parametric QP  min_U 0.5 U'HU + x'F'U  s.t.  G U <= E x + d, with row
/// provenance so initial-state rows can be swapped out later.
struct CondensedQp {
  Matrix H;  // mN x mN
  Matrix F;  // mN x n
  Matrix G;  // q x mN
  Matrix E;  // q x n
  Vector d;  // q
  std::vector<RowTag> row_tags;
  Index n = 0, m = 0;
  int N = 0;
  Matrix S_sel;  // m x mN, (I 0 ... 0)
  std::vector<Index> fixed_dual_rows;  // ascending; dual fixed to zero

  Index q() const { return G.rows(); }
  bool is_fixed(Index row) const;
};

/// Terminal cost: the problem's P, or the DARE solution when absent.
Matrix resolve_terminal_cost(const MpcProblem& prob);

/// Terminal set: X itself, the maximal LQR-invariant subset of
/// {x in X : K_lqr x in U_set}, or the explicit polytope.
Polytope resolve_terminal_set(const MpcProblem& prob);

CondensedQp condense(const MpcProblem& prob);

/// Copy of qp whose state-0 rows are replaced by x_fun's rows; all other rows
/// and tags are unchanged. Requires x_fun inside the current state-0 set.
CondensedQp substitute_initial_domain(const CondensedQp& qp,
                                      const Polytope& x_fun);

/// The polytope described by qp's state-0 rows (the current x(0) domain).
Polytope initial_domain(const CondensedQp& qp);

}  // namespace lipcert
