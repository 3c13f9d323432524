#include "lipcert/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipcert {
namespace detail {

namespace {
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-7;
constexpr double kZeroStep = 1e-12;
constexpr double kDriftTol = 1e-6;
// Bound violations below this are treated as feasible rather than as
// evidence of an infeasible LP when no dual pivot is available.
constexpr double kFeasSnapTol = 1e-7;
constexpr long kRefactorEvery = 3000;
}  // namespace

SimplexEngine::SimplexEngine(const LpProblem& lp)
    : nstruct_(lp.cols()), nrows_(lp.rows()), ncols_(lp.cols() + lp.rows()) {
  if (lp.b.size() != nrows_ || Index(lp.sense.size()) != nrows_ ||
      lp.cost.size() != nstruct_ || lp.lower.size() != nstruct_ ||
      lp.upper.size() != nstruct_) {
    throw InvalidInputError("simplex: inconsistent problem dimensions");
  }
  require_finite(lp.A, "simplex: constraint matrix");
  require_finite(lp.b, "simplex: right-hand side");
  require_finite(lp.cost, "simplex: cost");
  As_ = lp.A;
  b_ = lp.b;
  cost_ = lp.cost;
  lo_.assign(size_t(ncols_), 0.0);
  hi_.assign(size_t(ncols_), 0.0);
  for (Index j = 0; j < nstruct_; ++j) {
    if (lp.lower[j] > lp.upper[j] + kPrimalTol) {
      throw InvalidInputError("simplex: variable with lower > upper");
    }
    lo_[size_t(j)] = lp.lower[j];
    hi_[size_t(j)] = lp.upper[j];
  }
  for (Index i = 0; i < nrows_; ++i) {
    const size_t s = size_t(nstruct_ + i);
    switch (lp.sense[size_t(i)]) {
      case RowSense::LE: lo_[s] = 0.0;   hi_[s] = kInf; break;
      case RowSense::GE: lo_[s] = -kInf; hi_[s] = 0.0;  break;
      case RowSense::EQ: lo_[s] = 0.0;   hi_[s] = 0.0;  break;
    }
  }
  true_lo_ = lo_;
  true_hi_ = hi_;
  value_.assign(size_t(ncols_), 0.0);
  stat_.assign(size_t(ncols_), VarStatus::AtLower);
  basic_pos_.assign(size_t(ncols_), -1);
  relaxed_.assign(size_t(ncols_), 0);
  reset_to_slack_basis();
}

long SimplexEngine::max_iterations() const {
  return iteration_limit >= 0 ? iteration_limit
                              : 50000 + 20 * long(nrows_ + ncols_);
}

void SimplexEngine::set_var_bounds(Index j, double lo, double hi) {
  if (j < 0 || j >= nstruct_) throw InvalidInputError("simplex: bad variable index");
  if (lo > hi + kPrimalTol) throw InvalidInputError("simplex: lower > upper");
  true_lo_[size_t(j)] = lo_[size_t(j)] = lo;
  true_hi_[size_t(j)] = hi_[size_t(j)] = hi;
}

void SimplexEngine::set_cost(const Vector& structural_cost) {
  if (structural_cost.size() != nstruct_) {
    throw InvalidInputError("simplex: cost size mismatch");
  }
  require_finite(structural_cost, "simplex: cost");
  cost_ = structural_cost;
}

double SimplexEngine::col_dot(const Vector& rho, Index j) const {
  return j < nstruct_ ? As_.col(j).dot(rho) : rho[j - nstruct_];
}

Vector SimplexEngine::basis_column(Index j) const {
  if (j < nstruct_) return binv_ * As_.col(j);
  return binv_.col(j - nstruct_);
}

void SimplexEngine::reset_to_slack_basis() {
  basis_.resize(size_t(nrows_));
  std::fill(basic_pos_.begin(), basic_pos_.end(), Index(-1));
  std::fill(relaxed_.begin(), relaxed_.end(), char(0));
  relaxed_count_ = 0;
  lo_ = true_lo_;
  hi_ = true_hi_;
  for (Index i = 0; i < nrows_; ++i) {
    basis_[size_t(i)] = nstruct_ + i;
    basic_pos_[size_t(nstruct_ + i)] = i;
    stat_[size_t(nstruct_ + i)] = VarStatus::Basic;
  }
  for (Index j = 0; j < nstruct_; ++j) {
    if (std::isfinite(lo_[size_t(j)])) {
      stat_[size_t(j)] = VarStatus::AtLower;
      value_[size_t(j)] = lo_[size_t(j)];
    } else if (std::isfinite(hi_[size_t(j)])) {
      stat_[size_t(j)] = VarStatus::AtUpper;
      value_[size_t(j)] = hi_[size_t(j)];
    } else {
      stat_[size_t(j)] = VarStatus::FreeNonbasic;
      value_[size_t(j)] = 0.0;
    }
  }
  binv_ = Matrix::Identity(nrows_, nrows_);
  factorized_ = true;
  pivots_since_factor_ = 0;
}

void SimplexEngine::factorize() {
  Matrix B(nrows_, nrows_);
  for (Index k = 0; k < nrows_; ++k) {
    const Index j = basis_[size_t(k)];
    if (j < nstruct_) {
      B.col(k) = As_.col(j);
    } else {
      B.col(k) = Vector::Unit(nrows_, j - nstruct_);
    }
  }
  Eigen::PartialPivLU<Matrix> lu(B);
  const Vector diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() < 1e-12) {
    // Dependent basis (should not happen through normal pivoting); start over
    // from the always-valid slack basis.
    reset_to_slack_basis();
    return;
  }
  binv_ = lu.inverse();
  pivots_since_factor_ = 0;
}

void SimplexEngine::compute_basic_values() {
  // Snap nonbasic variables onto their working bounds first.
  for (Index j = 0; j < ncols_; ++j) {
    const size_t s = size_t(j);
    switch (stat_[s]) {
      case VarStatus::AtLower:
        if (std::isfinite(lo_[s])) {
          value_[s] = lo_[s];
        } else if (std::isfinite(hi_[s])) {
          stat_[s] = VarStatus::AtUpper;
          value_[s] = hi_[s];
        } else {
          stat_[s] = VarStatus::FreeNonbasic;
          value_[s] = 0.0;
        }
        break;
      case VarStatus::AtUpper:
        if (std::isfinite(hi_[s])) {
          value_[s] = hi_[s];
        } else if (std::isfinite(lo_[s])) {
          stat_[s] = VarStatus::AtLower;
          value_[s] = lo_[s];
        } else {
          stat_[s] = VarStatus::FreeNonbasic;
          value_[s] = 0.0;
        }
        break;
      default:
        break;
    }
  }
  Vector vn = Vector::Zero(nstruct_);
  for (Index j = 0; j < nstruct_; ++j) {
    if (stat_[size_t(j)] != VarStatus::Basic) vn[j] = value_[size_t(j)];
  }
  Vector t = b_ - As_ * vn;
  for (Index i = 0; i < nrows_; ++i) {
    const size_t s = size_t(nstruct_ + i);
    if (stat_[s] != VarStatus::Basic && value_[s] != 0.0) t[i] -= value_[s];
  }
  const Vector xb = binv_ * t;
  for (Index k = 0; k < nrows_; ++k) value_[size_t(basis_[size_t(k)])] = xb[k];
}

Vector SimplexEngine::full_cost_vector(bool phase1) const {
  Vector fc = Vector::Zero(ncols_);
  if (phase1) {
    for (Index j = 0; j < ncols_; ++j) {
      if (relaxed_[size_t(j)] == 1) fc[j] = 1.0;
      else if (relaxed_[size_t(j)] == 2) fc[j] = -1.0;
    }
  } else {
    fc.head(nstruct_) = cost_;
  }
  return fc;
}

Vector SimplexEngine::dual_prices(const Vector& full_cost) const {
  Vector cb(nrows_);
  for (Index k = 0; k < nrows_; ++k) cb[k] = full_cost[basis_[size_t(k)]];
  return binv_.transpose() * cb;
}

void SimplexEngine::relax_infeasible_columns() {
  for (Index k = 0; k < nrows_; ++k) {
    const Index j = basis_[size_t(k)];
    const size_t s = size_t(j);
    const double v = value_[s];
    if (v > true_hi_[s] + kPrimalTol) {
      relaxed_[s] = 1;  // above: drive down, block at the true upper bound
      lo_[s] = true_hi_[s];
      hi_[s] = kInf;
      ++relaxed_count_;
    } else if (v < true_lo_[s] - kPrimalTol) {
      relaxed_[s] = 2;  // below: drive up, block at the true lower bound
      lo_[s] = -kInf;
      hi_[s] = true_lo_[s];
      ++relaxed_count_;
    }
  }
}

void SimplexEngine::restore_column(Index j) {
  const size_t s = size_t(j);
  if (!relaxed_[s]) return;
  value_[s] = relaxed_[s] == 1 ? true_hi_[s] : true_lo_[s];
  relaxed_[s] = 0;
  lo_[s] = true_lo_[s];
  hi_[s] = true_hi_[s];
  --relaxed_count_;
}

LpStatus SimplexEngine::solve_primal(bool from_scratch) {
  if (from_scratch || !factorized_) reset_to_slack_basis();
  // Drop any stale phase-1 relaxations, then recompute and re-relax.
  for (Index j = 0; j < ncols_; ++j) {
    if (relaxed_[size_t(j)]) restore_column(j);
  }
  compute_basic_values();
  relax_infeasible_columns();
  return primal_loop();
}

LpStatus SimplexEngine::primal_loop() {
  const long maxit = max_iterations();
  bool phase1 = relaxed_count_ > 0;
  Vector fc = full_cost_vector(phase1);
  long degenerate_run = 0;
  const long bland_after = 5 * long(nrows_ + ncols_);
  // Complementarity-style LPs stall in long degenerate runs; a deterministic
  // cost perturbation breaks the ties, and the true costs are restored (with
  // a short cleanup) once the perturbed problem looks optimal.
  const long perturb_after = 100 + long(nrows_ + ncols_) / 2;
  bool perturbed = false;

  for (long iter = 0; iter < maxit; ++iter, ++total_iters_) {
    if (pivots_since_factor_ >= kRefactorEvery) {
      factorize();
      compute_basic_values();
    }
    if (!perturbed && degenerate_run > perturb_after) {
      for (Index j = 0; j < ncols_; ++j) {
        const unsigned h = unsigned(j) * 2654435761u;
        fc[j] += 1e-7 * (0.5 + double(h % 1024) / 1024.0) * (1.0 + std::abs(fc[j]));
      }
      perturbed = true;
      degenerate_run = 0;
    }
    const bool bland = degenerate_run > bland_after;
    const Vector y = dual_prices(fc);
    Vector d(ncols_);
    d.head(nstruct_) = fc.head(nstruct_) - As_.transpose() * y;
    d.tail(nrows_) = fc.tail(nrows_) - y;

    // Pricing: Dantzig (largest violation), Bland's rule after stalls.
    Index enter = -1;
    double best = kDualTol;
    for (Index j = 0; j < ncols_; ++j) {
      const size_t s = size_t(j);
      if (stat_[s] == VarStatus::Basic || is_fixed(s)) continue;
      double viol = 0.0;
      if (stat_[s] == VarStatus::AtLower) viol = -d[j];
      else if (stat_[s] == VarStatus::AtUpper) viol = d[j];
      else viol = std::abs(d[j]);
      if (viol > best) {
        best = viol;
        enter = j;
        if (bland) break;
      }
    }

    if (enter < 0) {
      if (!phase1) {
        if (perturbed) {
          // Optimal for the perturbed costs: restore and clean up.
          fc = full_cost_vector(false);
          perturbed = false;
          degenerate_run = 0;
          continue;
        }
        return LpStatus::Optimal;
      }
      // Phase-1 optimum: feasible iff every relaxed column is (numerically)
      // back inside its true bounds.
      bool infeasible = false;
      for (Index j = 0; j < ncols_ && !infeasible; ++j) {
        const size_t s = size_t(j);
        if (!relaxed_[s]) continue;
        const double gap = relaxed_[s] == 1 ? value_[s] - true_hi_[s]
                                            : true_lo_[s] - value_[s];
        if (gap > 1e-7) infeasible = true;
      }
      if (infeasible && perturbed) {
        // Rule out a perturbation artifact before concluding infeasibility.
        fc = full_cost_vector(true);
        perturbed = false;
        degenerate_run = 0;
        continue;
      }
      if (infeasible) return LpStatus::Infeasible;
      for (Index j = 0; j < ncols_; ++j) {
        if (relaxed_[size_t(j)]) restore_column(j);
      }
      phase1 = false;
      perturbed = false;
      fc = full_cost_vector(false);
      continue;
    }

    const size_t es = size_t(enter);
    const double dir =
        stat_[es] == VarStatus::AtUpper ? -1.0
        : stat_[es] == VarStatus::AtLower ? 1.0
                                          : (d[enter] < 0.0 ? 1.0 : -1.0);
    const Vector w = basis_column(enter);

    // Ratio test against working bounds; the entering column's own span is a
    // candidate too (bound flip).
    double t_best = kInf;
    if (std::isfinite(lo_[es]) && std::isfinite(hi_[es])) t_best = hi_[es] - lo_[es];
    Index block = -1;  // basis position; -1 = entering's own bound
    double block_rate = 0.0;
    for (Index k = 0; k < nrows_; ++k) {
      const Index jb = basis_[size_t(k)];
      const size_t sb = size_t(jb);
      const double rate = -dir * w[k];
      if (std::abs(rate) <= 1e-11) continue;
      double t;
      if (rate > 0.0) {
        if (!std::isfinite(hi_[sb])) continue;
        t = (hi_[sb] - value_[sb]) / rate;
      } else {
        if (!std::isfinite(lo_[sb])) continue;
        t = (lo_[sb] - value_[sb]) / rate;
      }
      if (t < 0.0) t = 0.0;
      const bool tie = t < t_best + kZeroStep && t > t_best - kZeroStep;
      bool take = t < t_best - kZeroStep;
      if (tie && block >= 0) {
        if (bland) {
          take = jb < basis_[size_t(block)];
        } else {
          // Lexicographic tie-break (rows of B^-1 scaled by the blocking
          // rate): deterministic anti-cycling at degenerate vertices.
          const double cur_rate = block_rate;
          const Index cur = block;
          take = false;
          for (Index c = 0; c < nrows_; ++c) {
            const double a = binv_(k, c) / rate;
            const double bq = binv_(cur, c) / cur_rate;
            if (std::abs(a - bq) <= 1e-12 * std::max(1.0, std::abs(bq))) continue;
            take = a < bq;
            break;
          }
        }
      } else if (tie && block < 0) {
        take = true;  // prefer a pivot over a bound flip on exact ties
      }
      if (take) {
        t_best = t;
        block = k;
        block_rate = rate;
      }
    }

    if (!std::isfinite(t_best)) {
      if (phase1) {
        throw ConvergenceError(
            "simplex: unbounded phase-1 direction (numerical breakdown)");
      }
      return LpStatus::Unbounded;
    }

    degenerate_run = t_best > kPrimalTol ? 0 : degenerate_run + 1;

    // Apply the step.
    value_[es] += dir * t_best;
    for (Index k = 0; k < nrows_; ++k) {
      value_[size_t(basis_[size_t(k)])] -= dir * t_best * w[k];
    }

    if (block < 0) {
      stat_[es] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      value_[es] = dir > 0 ? hi_[es] : lo_[es];
      continue;
    }

    const Index leave = basis_[size_t(block)];
    const size_t ls = size_t(leave);
    if (relaxed_[ls]) {
      // The blocking column reached the true bound it violated: restore its
      // bounds and cost, and pivot it out nonbasic at that bound.
      const bool at_upper = relaxed_[ls] == 1;
      restore_column(leave);
      stat_[ls] = at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      value_[ls] = at_upper ? true_hi_[ls] : true_lo_[ls];
      pivot(enter, block, w);
      perturbed = false;
      if (relaxed_count_ == 0) {
        phase1 = false;
        fc = full_cost_vector(false);
      } else {
        fc = full_cost_vector(true);
      }
      continue;
    }

    stat_[ls] = block_rate > 0.0 ? VarStatus::AtUpper : VarStatus::AtLower;
    value_[ls] = block_rate > 0.0 ? hi_[ls] : lo_[ls];
    pivot(enter, block, w);
  }
  return LpStatus::IterLimit;
}

void SimplexEngine::pivot(Index entering, Index leaving_pos, const Vector& w) {
  const double piv = w[leaving_pos];
  if (std::abs(piv) < 1e-13) {
    throw ConvergenceError("simplex: vanishing pivot element");
  }
  const Index leave = basis_[size_t(leaving_pos)];
  basic_pos_[size_t(leave)] = -1;
  basis_[size_t(leaving_pos)] = entering;
  basic_pos_[size_t(entering)] = leaving_pos;
  stat_[size_t(entering)] = VarStatus::Basic;

  // Product-form update of the explicit inverse.
  Vector eta = w / piv;
  eta[leaving_pos] = 0.0;
  binv_.noalias() -= eta * binv_.row(leaving_pos);
  binv_.row(leaving_pos) /= piv;
  ++pivots_since_factor_;
}

LpStatus SimplexEngine::reoptimize() {
  if (!factorized_) return solve_primal(true);
  if (relaxed_count_ > 0) return solve_primal(false);
  compute_basic_values();

  const long maxit = max_iterations();
  Vector fc = full_cost_vector(false);
  Vector y = dual_prices(fc);
  Vector d(ncols_);
  d.head(nstruct_) = fc.head(nstruct_) - As_.transpose() * y;
  d.tail(nrows_) = fc.tail(nrows_) - y;

  // Bound changes never break dual feasibility, so violations here are
  // numerical noise or status flips we can absorb; otherwise start over.
  // Fixed columns carry no dual-sign requirement at all.
  for (Index j = 0; j < ncols_; ++j) {
    const size_t s = size_t(j);
    if (stat_[s] == VarStatus::Basic || is_fixed(s)) continue;
    double viol = 0.0;
    if (stat_[s] == VarStatus::AtLower) viol = -d[j];
    else if (stat_[s] == VarStatus::AtUpper) viol = d[j];
    else viol = std::abs(d[j]);
    if (viol <= 1e-7) continue;
    if (stat_[s] == VarStatus::AtLower && std::isfinite(hi_[s])) {
      stat_[s] = VarStatus::AtUpper;
      value_[s] = hi_[s];
    } else if (stat_[s] == VarStatus::AtUpper && std::isfinite(lo_[s])) {
      stat_[s] = VarStatus::AtLower;
      value_[s] = lo_[s];
    } else {
      return solve_primal(true);
    }
  }
  compute_basic_values();

  const LpStatus st = dual_loop();
  if (st == LpStatus::IterLimit) return solve_primal(true);
  return st;
}

LpStatus SimplexEngine::dual_loop() {
  // The dual loop is a warm-restart accelerator: when it stalls in a
  // degenerate run, give up early and let the caller fall back to a fresh
  // primal solve rather than burning the full iteration budget.
  const long maxit = std::min(max_iterations(), 2000 + 10 * long(nrows_ + ncols_));
  const long bland_after = 5 * long(nrows_ + ncols_);
  const long stall_after = 200 + long(nrows_ + ncols_);
  long degenerate_run = 0;
  Vector fc = full_cost_vector(false);
  Vector y = dual_prices(fc);
  Vector d(ncols_);
  d.head(nstruct_) = fc.head(nstruct_) - As_.transpose() * y;
  d.tail(nrows_) = fc.tail(nrows_) - y;

  for (long iter = 0; iter < maxit; ++iter, ++total_iters_) {
    if (pivots_since_factor_ >= kRefactorEvery) {
      factorize();
      compute_basic_values();
      y = dual_prices(fc);
      d.head(nstruct_) = fc.head(nstruct_) - As_.transpose() * y;
      d.tail(nrows_) = fc.tail(nrows_) - y;
    }
    const bool bland = iter > bland_after;

    // Leaving variable: largest bound violation among basics.
    Index leave_pos = -1;
    double worst = kPrimalTol;
    bool below = false;
    for (Index k = 0; k < nrows_; ++k) {
      const size_t sb = size_t(basis_[size_t(k)]);
      const double v = value_[sb];
      const double vb = lo_[sb] - v;
      const double va = v - hi_[sb];
      if (vb > worst) {
        worst = vb;
        leave_pos = k;
        below = true;
        if (bland) break;
      }
      if (va > worst) {
        worst = va;
        leave_pos = k;
        below = false;
        if (bland) break;
      }
    }
    if (leave_pos < 0) return LpStatus::Optimal;

    const Index leave = basis_[size_t(leave_pos)];
    const size_t ls = size_t(leave);
    const Vector rho = binv_.row(leave_pos).transpose();
    Vector alpha(ncols_);
    alpha.head(nstruct_) = As_.transpose() * rho;
    alpha.tail(nrows_) = rho;

    // Entering variable: dual ratio test. For a variable leaving at its
    // lower bound the eligible directions push x_leave up, and vice versa.
    Index enter = -1;
    double best_ratio = kInf;
    double best_alpha = 0.0;
    for (Index j = 0; j < ncols_; ++j) {
      const size_t s = size_t(j);
      if (stat_[s] == VarStatus::Basic || is_fixed(s)) continue;
      const double a = alpha[j];
      if (std::abs(a) <= kPivotTol) continue;
      bool ok = false;
      if (stat_[s] == VarStatus::FreeNonbasic) ok = true;
      else if (below) ok = (stat_[s] == VarStatus::AtLower) ? a < 0.0 : a > 0.0;
      else ok = (stat_[s] == VarStatus::AtLower) ? a > 0.0 : a < 0.0;
      if (!ok) continue;
      const double ratio = std::abs(d[j] / a);
      bool take = ratio < best_ratio - 1e-12;
      if (!take && ratio < best_ratio + 1e-12 && enter >= 0) {
        take = bland ? j < enter : std::abs(a) > std::abs(best_alpha);
      }
      if (take || enter < 0) {
        enter = j;
        best_ratio = ratio;
        best_alpha = a;
      }
    }
    if (enter < 0) {
      // No admissible pivot. A violation within the feasibility tolerance is
      // numerical noise at a degenerate vertex, not an infeasibility proof:
      // snap the offender onto its bound and keep scanning.
      if (worst <= kFeasSnapTol) {
        value_[ls] = below ? lo_[ls] : hi_[ls];
        continue;
      }
      // Distrust a certificate built on a stale factorization.
      if (pivots_since_factor_ > 0) {
        factorize();
        compute_basic_values();
        y = dual_prices(fc);
        d.head(nstruct_) = fc.head(nstruct_) - As_.transpose() * y;
        d.tail(nrows_) = fc.tail(nrows_) - y;
        continue;
      }
      return LpStatus::Infeasible;
    }

    const size_t es = size_t(enter);
    const double bound = below ? lo_[ls] : hi_[ls];
    const double delta = (value_[ls] - bound) / best_alpha;

    Vector w = basis_column(enter);
    if (std::abs(w[leave_pos] - best_alpha) >
        kDriftTol * std::max(1.0, std::abs(best_alpha))) {
      factorize();
      compute_basic_values();
      y = dual_prices(fc);
      d.head(nstruct_) = fc.head(nstruct_) - As_.transpose() * y;
      d.tail(nrows_) = fc.tail(nrows_) - y;
      continue;  // retry the iteration on fresh numbers
    }

    // Incremental reduced-cost update (theta = d_e / alpha_e).
    const double theta = d[enter] / best_alpha;
    degenerate_run = std::abs(theta) <= kDualTol ? degenerate_run + 1 : 0;
    if (degenerate_run > stall_after) return LpStatus::IterLimit;
    for (Index j = 0; j < ncols_; ++j) {
      if (stat_[size_t(j)] == VarStatus::Basic) continue;
      d[j] -= theta * alpha[j];
    }
    d[enter] = 0.0;
    d[leave] = -theta;

    // Primal step.
    value_[es] += delta;
    for (Index k = 0; k < nrows_; ++k) {
      value_[size_t(basis_[size_t(k)])] -= delta * w[k];
    }
    stat_[ls] = below ? VarStatus::AtLower : VarStatus::AtUpper;
    value_[ls] = bound;
    pivot(enter, leave_pos, w);
  }
  return LpStatus::IterLimit;
}

double SimplexEngine::objective() const {
  double obj = 0.0;
  for (Index j = 0; j < nstruct_; ++j) obj += cost_[j] * value_[size_t(j)];
  return obj;
}

Vector SimplexEngine::solution() const {
  Vector x(nstruct_);
  for (Index j = 0; j < nstruct_; ++j) x[j] = value_[size_t(j)];
  return x;
}

Vector SimplexEngine::row_duals() const {
  return dual_prices(full_cost_vector(false));
}

BasisSnapshot SimplexEngine::save_basis() const {
  return BasisSnapshot{basis_, stat_};
}

void SimplexEngine::restore_basis(const BasisSnapshot& snap) {
  if (Index(snap.basis.size()) != nrows_ ||
      Index(snap.status.size()) != ncols_) {
    throw InvalidInputError("simplex: basis snapshot size mismatch");
  }
  basis_ = snap.basis;
  stat_ = snap.status;
  std::fill(basic_pos_.begin(), basic_pos_.end(), Index(-1));
  for (Index k = 0; k < nrows_; ++k) basic_pos_[size_t(basis_[size_t(k)])] = k;
  std::fill(relaxed_.begin(), relaxed_.end(), char(0));
  relaxed_count_ = 0;
  lo_ = true_lo_;
  hi_ = true_hi_;
  factorize();
  compute_basic_values();
}

}  // namespace detail

LpResult lp_solve(const LpProblem& lp, long iteration_limit) {
  detail::SimplexEngine engine(lp);
  engine.iteration_limit = iteration_limit;
  LpResult out;
  out.status = engine.solve_primal(true);
  out.iterations = engine.iterations_used();
  if (out.status == LpStatus::Optimal) {
    out.x = engine.solution();
    out.objective = engine.objective();
    out.row_duals = engine.row_duals();
  }
  return out;
}

}  // namespace lipcert
