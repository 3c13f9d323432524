#include "lipcert/polytope.hpp"

#include <cmath>
#include <vector>

#include "lipcert/numkit.hpp"

namespace lipcert {

Polytope::Polytope(Matrix C, Vector c) {
  if (C.rows() != c.size()) {
    throw InvalidInputError("polytope: C rows and c length differ");
  }
  if (C.cols() < 1) throw InvalidInputError("polytope: zero-dimensional set");
  require_finite(C, "polytope: C");
  require_finite(c, "polytope: c");
  std::vector<Index> keep;
  keep.reserve(size_t(C.rows()));
  Index marker = -1;
  for (Index i = 0; i < C.rows(); ++i) {
    const double scale = C.row(i).cwiseAbs().maxCoeff();
    if (scale == 0.0) {
      if (c[i] < 0.0 && marker < 0) marker = i;  // 0'x <= negative: empty
      continue;                                  // 0'x <= nonnegative: trivial
    }
    keep.push_back(i);
  }
  if (marker >= 0) {
    trivially_empty_ = true;
    C_ = Matrix::Zero(1, C.cols());
    c_ = Vector::Constant(1, c[marker]);
    return;
  }
  C_.resize(Index(keep.size()), C.cols());
  c_.resize(Index(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    C_.row(Index(k)) = C.row(keep[k]);
    c_[Index(k)] = c[keep[k]];
  }
}

Polytope Polytope::box(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw InvalidInputError("polytope: box size mismatch");
  const Index n = lo.size();
  Matrix C(2 * n, n);
  Vector c(2 * n);
  C.topRows(n) = Matrix::Identity(n, n);
  C.bottomRows(n) = -Matrix::Identity(n, n);
  c.head(n) = hi;
  c.tail(n) = -lo;
  return Polytope(std::move(C), std::move(c));
}

Polytope Polytope::symmetric_box(const Vector& radius) {
  return box(-radius, radius);
}

namespace {

LpProblem set_lp(const Vector& objective, const Polytope& set) {
  LpProblem lp;
  lp.A = set.C();
  lp.b = set.c();
  lp.sense.assign(size_t(set.num_rows()), RowSense::LE);
  lp.cost = objective;
  lp.lower = Vector::Constant(set.dim(), -kInf);
  lp.upper = Vector::Constant(set.dim(), kInf);
  return lp;
}

}  // namespace

LpMinResult lp_min(const Vector& objective, const Polytope& set) {
  if (objective.size() != set.dim()) {
    throw InvalidInputError("polytope: objective dimension mismatch");
  }
  if (set.trivially_empty()) return LpMinResult{LpStatus::Infeasible, 0.0, {}};
  const LpResult res = lp_solve(set_lp(objective, set));
  if (res.status == LpStatus::IterLimit) {
    throw ConvergenceError("polytope: LP iteration limit");
  }
  return LpMinResult{res.status, res.objective, res.x};
}

LpMinResult lp_max(const Vector& objective, const Polytope& set) {
  LpMinResult r = lp_min(Vector(-objective), set);
  r.value = -r.value;
  return r;
}

bool is_empty(const Polytope& set) {
  if (set.trivially_empty()) return true;
  if (set.num_rows() == 0) return false;  // whole space
  return lp_min(Vector::Zero(set.dim()), set).status == LpStatus::Infeasible;
}

bool contains(const Polytope& set, const Vector& x, double tol) {
  if (x.size() != set.dim()) {
    throw InvalidInputError("polytope: point dimension mismatch");
  }
  if (set.trivially_empty()) return false;
  if (set.num_rows() == 0) return true;
  return ((set.C() * x - set.c()).array() <= tol).all();
}

bool is_row_redundant(const Polytope& set, Index row, double tol) {
  if (row < 0 || row >= set.num_rows()) {
    throw InvalidInputError("polytope: row index out of range");
  }
  if (set.trivially_empty()) return false;
  const Index m = set.num_rows();
  Matrix C(m - 1, set.dim());
  Vector c(m - 1);
  Index k = 0;
  for (Index i = 0; i < m; ++i) {
    if (i == row) continue;
    C.row(k) = set.C().row(i);
    c[k] = set.c()[i];
    ++k;
  }
  const Polytope rest(std::move(C), std::move(c));
  const LpMinResult res = lp_max(Vector(set.C().row(row).transpose()), rest);
  if (res.status == LpStatus::Infeasible) return true;  // whole set is empty
  if (res.status == LpStatus::Unbounded) return false;
  return res.value <= set.c()[row] + tol;
}

Polytope remove_redundancy(const Polytope& set, double tol) {
  if (set.trivially_empty() || is_empty(set)) {
    Matrix C = Matrix::Zero(1, set.dim());
    Vector c = Vector::Constant(1, -1.0);
    return Polytope(std::move(C), std::move(c));
  }
  Matrix C = set.C();
  Vector c = set.c();
  Index m = C.rows();
  Index i = 0;
  while (i < m) {
    const Polytope current(C.topRows(m), c.head(m));
    if (is_row_redundant(current, i, tol)) {
      // Drop row i by shifting the tail up.
      for (Index r = i; r + 1 < m; ++r) {
        C.row(r) = C.row(r + 1);
        c[r] = c[r + 1];
      }
      --m;
    } else {
      ++i;
    }
  }
  return Polytope(C.topRows(m), c.head(m));
}

bool includes(const Polytope& outer, const Polytope& inner, double tol) {
  if (outer.dim() != inner.dim()) {
    throw InvalidInputError("polytope: dimension mismatch in includes");
  }
  if (is_empty(inner)) return true;
  for (Index i = 0; i < outer.num_rows(); ++i) {
    const LpMinResult res = lp_max(Vector(outer.C().row(i).transpose()), inner);
    if (res.status == LpStatus::Unbounded) return false;
    if (res.status == LpStatus::Optimal && res.value > outer.c()[i] + tol) {
      return false;
    }
  }
  return true;
}

bool set_equal(const Polytope& a, const Polytope& b, double tol) {
  return includes(a, b, tol) && includes(b, a, tol);
}

Polytope intersect(const Polytope& a, const Polytope& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInputError("polytope: dimension mismatch in intersect");
  }
  Matrix C(a.num_rows() + b.num_rows(), a.dim());
  Vector c(a.num_rows() + b.num_rows());
  C << a.C(), b.C();
  c << a.c(), b.c();
  return Polytope(std::move(C), std::move(c));
}

Polytope map_set(const Matrix& T, const Polytope& set) {
  if (T.rows() != T.cols() || T.rows() != set.dim()) {
    throw InvalidInputError("polytope: map_set needs a square matrix of the set's dimension");
  }
  // {Tx : Cx <= c} = {y : C T^-1 y <= c}
  return Polytope(solve_right(set.C(), T), set.c());
}

Polytope preimage_set(const Matrix& T, const Polytope& set) {
  if (T.rows() != set.dim()) {
    throw InvalidInputError("polytope: preimage dimension mismatch");
  }
  return Polytope(set.C() * T, set.c());
}

std::pair<Vector, Vector> bounding_box(const Polytope& set) {
  const Index n = set.dim();
  Vector lo(n), hi(n);
  for (Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = 1.0;
    const LpMinResult mn = lp_min(e, set);
    if (mn.status == LpStatus::Infeasible) {
      throw InvalidInputError("polytope: bounding box of an empty set");
    }
    lo[j] = mn.status == LpStatus::Unbounded ? -kInf : mn.value;
    const LpMinResult mx = lp_max(e, set);
    hi[j] = mx.status == LpStatus::Unbounded ? kInf : mx.value;
  }
  return {lo, hi};
}

bool is_bounded(const Polytope& set) {
  if (is_empty(set)) return true;
  const auto [lo, hi] = bounding_box(set);
  return lo.allFinite() && hi.allFinite();
}

Polytope max_invariant_set(const Matrix& A_cl, const Polytope& base,
                           int iteration_limit) {
  if (A_cl.rows() != A_cl.cols() || A_cl.rows() != base.dim()) {
    throw InvalidInputError("polytope: max_invariant_set dimension mismatch");
  }
  if (is_empty(base)) {
    throw InvalidInputError("polytope: max_invariant_set of an empty base");
  }
  constexpr double tol = 1e-9;
  Polytope omega = base;
  Matrix Ck = base.C();  // base rows composed with A_cl^k
  for (int k = 1; k <= iteration_limit; ++k) {
    Ck = Matrix(Ck * A_cl);
    std::vector<Index> fresh;
    for (Index i = 0; i < Ck.rows(); ++i) {
      if (Ck.row(i).cwiseAbs().maxCoeff() < 1e-14) continue;
      const LpMinResult res = lp_max(Vector(Ck.row(i).transpose()), omega);
      if (res.status == LpStatus::Unbounded || res.value > base.c()[i] + tol) {
        fresh.push_back(i);
      }
    }
    if (fresh.empty()) return omega;
    Matrix Cn(omega.num_rows() + Index(fresh.size()), base.dim());
    Vector cn(Cn.rows());
    Cn.topRows(omega.num_rows()) = omega.C();
    cn.head(omega.num_rows()) = omega.c();
    for (size_t t = 0; t < fresh.size(); ++t) {
      Cn.row(omega.num_rows() + Index(t)) = Ck.row(fresh[t]);
      cn[omega.num_rows() + Index(t)] = base.c()[fresh[t]];
    }
    omega = Polytope(std::move(Cn), std::move(cn));
  }
  throw ConvergenceError(
      "polytope: invariant set not finitely determined within the iteration limit");
}

}  // namespace lipcert
