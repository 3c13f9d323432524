#pragma once

#include <string>
#include <vector>

#include "lipcert/condense.hpp"
#include "lipcert/polytope.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

struct QpSolution {
  bool feasible = false;
  Vector U;
  Vector lambda;                  // length q, zero off the active set
  std::vector<Index> active_set;  // sorted working set at the optimum
  int iterations = 0;
};

/// One affine piece of the MPC law: u = K x + b on the region where
/// `active_set` is the optimal active set.
struct LocalSegment {
  std::vector<Index> active_set;  // sorted
  Matrix K;
  Vector b;
  Vector sample_x;
};

struct GainMapRow {
  Vector x;
  int segment_id = 0;
  double gain_norm = 0.0;
  Vector u;
};

struct GridResult {
  double L_lower = 0.0;
  std::vector<LocalSegment> census;  // first-appearance order
  std::vector<GainMapRow> map;       // feasible samples, grid order
};

/// Solve the QP min 0.5 U'HU + (Fx)'U s.t. GU <= Ex + d with a dual
/// active-set method started from the unconstrained optimum.
/// Returns feasible = false when x lies outside the QP's feasible domain.
QpSolution qp_solve(const CondensedQp& qp, const Vector& x);

/// Affine law on the region with the given active set:
/// u = K x + b with K = d(S_sel U*)/dx. Throws SingularMatrixError when the
/// active rows are linearly dependent (degenerate set).
void local_gain(const CondensedQp& qp, const std::vector<Index>& active_set,
                Matrix* K, Vector* b);

/// Grid-sample `domain` (n <= 3), solve the QP at each feasible point, and
/// collect the distinct affine segments. L_lower is the exact Lipschitz
/// constant restricted to the sampled segments, hence a lower bound.
GridResult grid_lipschitz(const CondensedQp& qp, const Polytope& domain,
                          int resolution, Norm p, int threads = 1);

/// CSV with header x1,...,xn,segment_id,gain_norm,u1,...,um.
void write_gain_map_csv(const GridResult& grid, Index n, Index m,
                        const std::string& path);

}  // namespace lipcert
