#include "lipcert/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <thread>
#include <utility>

#include "lipcert/numkit.hpp"

namespace lipcert {

namespace {

constexpr double kFeasTol = 1e-8;    // constraint violation considered active
constexpr double kResidualTol = 1e-7;
constexpr double kWeakLambdaTol = 1e-9;
constexpr double kWeakSlackTol = 1e-7;

// Solve the equality-constrained direction problem
//   [H   G_W'][z  ]   [n_p]
//   [G_W  0  ][rho] = [0  ]
// for the current working set. H is SPD, so the system is nonsingular as
// long as the working-set rows stay linearly independent.
void direction_step(const Matrix& H, const Matrix& G,
                    const std::vector<Index>& work, const Vector& np,
                    Vector* z, Vector* rho) {
  const Index nu = H.rows();
  const Index w = static_cast<Index>(work.size());
  if (w == 0) {
    *z = H.ldlt().solve(np);
    rho->resize(0);
    return;
  }
  Matrix kkt = Matrix::Zero(nu + w, nu + w);
  kkt.topLeftCorner(nu, nu) = H;
  for (Index k = 0; k < w; ++k) {
    kkt.block(nu + k, 0, 1, nu) = G.row(work[static_cast<size_t>(k)]);
    kkt.block(0, nu + k, nu, 1) =
        G.row(work[static_cast<size_t>(k)]).transpose();
  }
  Vector rhs = Vector::Zero(nu + w);
  rhs.head(nu) = np;
  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) {
    throw SingularMatrixError("working-set KKT system is singular");
  }
  Vector sol = lu.solve(rhs);
  *z = sol.head(nu);
  *rho = sol.tail(w);
}

}  // namespace

QpSolution qp_solve(const CondensedQp& qp, const Vector& x) {
  if (x.size() != qp.n) {
    throw InvalidInputError("qp_solve: state dimension mismatch");
  }
  require_finite(x, "qp_solve state");

  const Index nu = qp.H.rows();
  const Index q = qp.q();
  const Vector f = qp.F * x;
  const Vector rhs = qp.E * x + qp.d;

  // Rows with no control influence are pure state-feasibility tests; they can
  // never enter the working set.
  std::vector<bool> zero_row(static_cast<size_t>(q), false);
  for (Index i = 0; i < q; ++i) {
    if (qp.G.row(i).lpNorm<Eigen::Infinity>() == 0.0) {
      zero_row[static_cast<size_t>(i)] = true;
      if (rhs[i] < -kFeasTol) {
        return QpSolution{};  // infeasible regardless of U
      }
    }
  }

  Eigen::LDLT<Matrix> hfact(qp.H);
  QpSolution out;
  out.U = hfact.solve(-f);

  std::vector<Index> work;
  std::vector<double> lam_work;
  const int max_iter = static_cast<int>(10 * std::max<Index>(q, 1));

  while (true) {
    // Most violated inactive constraint.
    Index p = -1;
    double worst = kFeasTol;
    Vector slack = rhs - qp.G * out.U;
    for (Index i = 0; i < q; ++i) {
      if (zero_row[static_cast<size_t>(i)]) continue;
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      if (-slack[i] > worst) {
        worst = -slack[i];
        p = i;
      }
    }
    if (p < 0) break;  // primal feasible -> optimal

    const Vector np = qp.G.row(p).transpose();
    double lam_p = 0.0;
    while (true) {
      if (++out.iterations > max_iter) {
        throw ConvergenceError("active-set QP exceeded its iteration budget");
      }
      Vector z, rho;
      direction_step(qp.H, qp.G, work, np, &z, &rho);
      const double curv = np.dot(z);
      const double curv_tol = 1e-12 * std::max(1.0, np.squaredNorm());

      // Longest dual step before an active multiplier hits zero.
      double t_partial = kInf;
      Index blocker = -1;
      for (Index k = 0; k < static_cast<Index>(work.size()); ++k) {
        const double r = rho[k];
        if (r > 1e-12) {
          const double t = lam_work[static_cast<size_t>(k)] / r;
          if (t < t_partial) {
            t_partial = t;
            blocker = k;
          }
        }
      }

      if (curv <= curv_tol) {
        // Constraint gradient lies in the span of the working set: the only
        // move is a dual exchange. No blocker means the constraint cannot be
        // satisfied -> the QP is infeasible at this state.
        if (blocker < 0) return QpSolution{};
        for (Index k = 0; k < static_cast<Index>(work.size()); ++k) {
          lam_work[static_cast<size_t>(k)] -= t_partial * rho[k];
        }
        lam_p += t_partial;
        work.erase(work.begin() + blocker);
        lam_work.erase(lam_work.begin() + blocker);
        continue;
      }

      const double viol = qp.G.row(p).dot(out.U) - rhs[p];
      const double t_full = viol / curv;
      const double t = std::min(t_full, t_partial);
      out.U -= t * z;
      for (Index k = 0; k < static_cast<Index>(work.size()); ++k) {
        lam_work[static_cast<size_t>(k)] -= t * rho[k];
      }
      lam_p += t;
      if (t_partial < t_full) {
        work.erase(work.begin() + blocker);
        lam_work.erase(lam_work.begin() + blocker);
        continue;
      }
      work.push_back(p);
      lam_work.push_back(lam_p);
      break;
    }
  }

  out.feasible = true;
  out.lambda = Vector::Zero(q);
  for (size_t k = 0; k < work.size(); ++k) {
    out.lambda[work[k]] = std::max(0.0, lam_work[k]);
  }
  out.active_set.assign(work.begin(), work.end());
  std::sort(out.active_set.begin(), out.active_set.end());

  // Defensive KKT residual check; failures indicate a solver bug or badly
  // scaled data rather than a property of the problem.
  const double scale = std::max(1.0, f.lpNorm<Eigen::Infinity>());
  const Vector stat = qp.H * out.U + f + qp.G.transpose() * out.lambda;
  const Vector slack = rhs - qp.G * out.U;
  if (stat.lpNorm<Eigen::Infinity>() > kResidualTol * scale ||
      slack.minCoeff() < -kResidualTol * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
    throw ConvergenceError("active-set QP finished with large KKT residuals");
  }
  return out;
}

void local_gain(const CondensedQp& qp, const std::vector<Index>& active_set,
                Matrix* K, Vector* b) {
  const Index nu = qp.H.rows();
  std::vector<Index> act(active_set);
  std::sort(act.begin(), act.end());
  act.erase(std::unique(act.begin(), act.end()), act.end());
  for (Index i : act) {
    if (i < 0 || i >= qp.q()) {
      throw InvalidInputError("local_gain: active row index out of range");
    }
    if (qp.G.row(i).lpNorm<Eigen::Infinity>() == 0.0) {
      throw InvalidInputError(
          "local_gain: active set contains a row without control influence");
    }
  }

  Eigen::LDLT<Matrix> hfact(qp.H);
  if (act.empty()) {
    Matrix k_full = -hfact.solve(qp.F);
    *K = qp.S_sel * k_full;
    *b = Vector::Zero(qp.S_sel.rows());
    return;
  }

  const Index a = static_cast<Index>(act.size());
  Matrix Ga(a, nu);
  Matrix Ea(a, qp.n);
  Vector da(a);
  for (Index k = 0; k < a; ++k) {
    Ga.row(k) = qp.G.row(act[static_cast<size_t>(k)]);
    Ea.row(k) = qp.E.row(act[static_cast<size_t>(k)]);
    da[k] = qp.d[act[static_cast<size_t>(k)]];
  }

  const Matrix hinv_gat = hfact.solve(Ga.transpose());
  const Matrix hinv_f = hfact.solve(qp.F);
  const Matrix w = Ga * hinv_gat;
  Eigen::FullPivLU<Matrix> wlu(w);
  if (!wlu.isInvertible()) {
    throw SingularMatrixError(
        "local_gain: degenerate active set (linearly dependent rows)");
  }
  const Matrix lam_x = -wlu.solve(Ea + Ga * hinv_f);  // d lambda / d x
  const Vector lam_0 = -wlu.solve(da);
  const Matrix k_full = -hinv_f - hinv_gat * lam_x;
  const Vector b_full = -hinv_gat * lam_0;
  *K = qp.S_sel * k_full;
  *b = qp.S_sel * b_full;
}

namespace {

struct GridSample {
  Vector x;
  Vector u;
  std::vector<Index> key;
};

}  // namespace

GridResult grid_lipschitz(const CondensedQp& qp, const Polytope& domain,
                          int resolution, Norm p, int threads) {
  if (domain.dim() != qp.n) {
    throw InvalidInputError("grid_lipschitz: domain dimension mismatch");
  }
  if (qp.n > 3) {
    throw InvalidInputError("grid_lipschitz: grids are limited to n <= 3");
  }
  if (resolution < 2) {
    throw InvalidInputError("grid_lipschitz: resolution must be at least 2");
  }
  const auto [lo, hi] = bounding_box(domain);
  if (!lo.allFinite() || !hi.allFinite()) {
    throw InvalidInputError("grid_lipschitz: domain must be bounded");
  }

  const Index n = qp.n;
  long total = 1;
  for (Index k = 0; k < n; ++k) total *= resolution;

  const auto point_at = [&](long flat) {
    Vector x(n);
    long rem = flat;
    for (Index k = n - 1; k >= 0; --k) {
      const long idx = rem % resolution;
      rem /= resolution;
      x[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx) /
                         static_cast<double>(resolution - 1);
    }
    return x;
  };

  const int nthreads =
      std::max(1, std::min({threads, 64, static_cast<int>(total)}));
  std::vector<std::vector<GridSample>> buckets(
      static_cast<size_t>(nthreads));

  const auto worker = [&](int tid, long begin, long end) {
    auto& sink = buckets[static_cast<size_t>(tid)];
    for (long flat = begin; flat < end; ++flat) {
      const Vector x = point_at(flat);
      if (!contains(domain, x)) continue;
      const QpSolution sol = qp_solve(qp, x);
      if (!sol.feasible) continue;
      GridSample s;
      s.x = x;
      s.u = qp.S_sel * sol.U;
      const Vector slack = qp.E * x + qp.d - qp.G * sol.U;
      for (Index i = 0; i < qp.q(); ++i) {
        if (sol.lambda[i] > kWeakLambdaTol && slack[i] <= kWeakSlackTol) {
          s.key.push_back(i);
        }
      }
      sink.push_back(std::move(s));
    }
  };

  if (nthreads == 1) {
    worker(0, 0, total);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (total + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const long begin = t * chunk;
      const long end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, t, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  GridResult out;
  std::map<std::vector<Index>, int> seen;  // key -> segment id, -1 degenerate
  std::vector<double> seg_norm;
  for (const auto& bucket : buckets) {
    for (const auto& s : bucket) {
      auto it = seen.find(s.key);
      int id;
      if (it == seen.end()) {
        Matrix K;
        Vector b;
        try {
          local_gain(qp, s.key, &K, &b);
        } catch (const SingularMatrixError&) {
          seen.emplace(s.key, -1);
          continue;
        }
        id = static_cast<int>(out.census.size());
        LocalSegment seg;
        seg.active_set = s.key;
        seg.K = K;
        seg.b = b;
        seg.sample_x = s.x;
        out.census.push_back(std::move(seg));
        seg_norm.push_back(matrix_pnorm(K, p));
        seen.emplace(s.key, id);
      } else {
        id = it->second;
        if (id < 0) continue;
      }
      GainMapRow row;
      row.x = s.x;
      row.segment_id = id;
      row.gain_norm = seg_norm[static_cast<size_t>(id)];
      row.u = s.u;
      out.map.push_back(std::move(row));
    }
  }

  for (double v : seg_norm) out.L_lower = std::max(out.L_lower, v);
  return out;
}

void write_gain_map_csv(const GridResult& grid, Index n, Index m,
                        const std::string& path) {
  std::ofstream file(path);
  if (!file) {
    throw InvalidInputError("cannot open gain map output file: " + path);
  }
  for (Index k = 0; k < n; ++k) file << "x" << (k + 1) << ",";
  file << "segment_id,gain_norm";
  for (Index k = 0; k < m; ++k) file << ",u" << (k + 1);
  file << "\n";
  file << std::setprecision(15);
  for (const auto& row : grid.map) {
    for (Index k = 0; k < n; ++k) file << row.x[k] << ",";
    file << row.segment_id << "," << row.gain_norm;
    for (Index k = 0; k < m; ++k) file << "," << row.u[k];
    file << "\n";
  }
}

}  // namespace lipcert
