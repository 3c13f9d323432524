#pragma once

#include <utility>

#include "lipcert/simplex.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

/// Closed polyhedron {x : C x <= c}. Rows with a zero normal and c >= 0 are
/// dropped on construction; a zero normal with c < 0 is kept as an explicit
/// marker of emptiness.
class Polytope {
 public:
  Polytope() = default;
  Polytope(Matrix C, Vector c);

  static Polytope box(const Vector& lo, const Vector& hi);
  static Polytope symmetric_box(const Vector& radius);  // |x_i| <= radius_i

  const Matrix& C() const { return C_; }
  const Vector& c() const { return c_; }
  Index dim() const { return C_.cols(); }
  Index num_rows() const { return C_.rows(); }
  bool trivially_empty() const { return trivially_empty_; }

 private:
  Matrix C_;
  Vector c_;
  bool trivially_empty_ = false;
};

struct LpMinResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vector minimizer;
};

/// min / max of objective'x over the set.
LpMinResult lp_min(const Vector& objective, const Polytope& set);
LpMinResult lp_max(const Vector& objective, const Polytope& set);

bool is_empty(const Polytope& set);
bool contains(const Polytope& set, const Vector& x, double tol = 1e-9);

/// Row i is redundant when dropping it does not change the set.
bool is_row_redundant(const Polytope& set, Index row, double tol = 1e-9);

/// Minimal representation via sequential redundancy elimination (ascending
/// row order, so the result is deterministic).
Polytope remove_redundancy(const Polytope& set, double tol = 1e-9);

/// inner is a subset of outer (within tol).
bool includes(const Polytope& outer, const Polytope& inner, double tol = 1e-9);
bool set_equal(const Polytope& a, const Polytope& b, double tol = 1e-9);

Polytope intersect(const Polytope& a, const Polytope& b);

/// Image {T x : x in set} for invertible T, and preimage {x : T x in set}.
Polytope map_set(const Matrix& T, const Polytope& set);
Polytope preimage_set(const Matrix& T, const Polytope& set);

bool is_bounded(const Polytope& set);

/// Componentwise (lo, hi) with +-inf entries on unbounded directions.
std::pair<Vector, Vector> bounding_box(const Polytope& set);

/// Maximal positively invariant subset of `base` for x+ = A_cl x: the limit
/// of {x : C A_cl^s x <= c, s = 0..t}. Returns the accumulated representation
/// (all base rows plus the violated rows of each generation, in generation
/// order) without a final redundancy pass, so row counts match the classical
/// determinedness procedure. Throws ConvergenceError when not finitely
/// determined within `iteration_limit` steps.
Polytope max_invariant_set(const Matrix& A_cl, const Polytope& base,
                           int iteration_limit = 500);

}  // namespace lipcert
