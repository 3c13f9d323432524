#include "lipcert/certify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

#include "lipcert/numkit.hpp"
#include "lipcert/polytope.hpp"

namespace lipcert {

namespace {

std::string idx_name(const char* stem, Index i) {
  return std::string(stem) + std::to_string(i);
}

std::string pair_name(const char* stem, Index i, Index j) {
  return std::string(stem) + std::to_string(i) + "_" + std::to_string(j);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

/// Componentwise box of the input set, read off the stage-0 input rows, then
/// replicated over the horizon. Used as valid bounds for any input sequence
/// that satisfies the primal rows.
void input_sequence_box(const CondensedQp& qp, Vector* lo, Vector* hi) {
  const Index nu = qp.H.rows();
  lo->setConstant(nu, -kInf);
  hi->setConstant(nu, kInf);
  std::vector<Index> rows;
  for (Index i = 0; i < qp.q(); ++i) {
    if (qp.row_tags[static_cast<size_t>(i)].kind == RowKind::Input &&
        qp.row_tags[static_cast<size_t>(i)].stage == 0) {
      rows.push_back(i);
    }
  }
  if (rows.empty()) return;
  Matrix Cu(static_cast<Index>(rows.size()), qp.m);
  Vector cu(static_cast<Index>(rows.size()));
  for (Index k = 0; k < Cu.rows(); ++k) {
    Cu.row(k) = qp.G.block(rows[static_cast<size_t>(k)], 0, 1, qp.m);
    cu[k] = qp.d[rows[static_cast<size_t>(k)]];
  }
  const Polytope uset(Cu, cu);
  const auto [ulo, uhi] = bounding_box(uset);
  for (int k = 0; k < qp.N; ++k) {
    lo->segment(k * qp.m, qp.m) = ulo;
    hi->segment(k * qp.m, qp.m) = uhi;
  }
}

/// Per-row upper bound on the slack r = E x + d - G U over the state box and
/// the input-sequence box. Every point satisfying the primal rows lies in
/// those boxes, so this is a valid (and usually far tighter) substitute for
/// the configured r_bar in the complementarity linking rows.
Vector slack_upper_bounds(const CondensedQp& qp, const BigMConfig& cfg,
                          const Vector& xlo, const Vector& xhi,
                          const Vector& ulo, const Vector& uhi) {
  const Index q = qp.q();
  Vector out(q);
  for (Index i = 0; i < q; ++i) {
    double hi = qp.d[i];
    for (Index k = 0; k < qp.n && std::isfinite(hi); ++k) {
      const double a = qp.E(i, k);
      if (a == 0.0) continue;
      const double v = a > 0.0 ? xhi[k] : xlo[k];
      hi = std::isfinite(v) ? hi + a * v : kInf;
    }
    for (Index s = 0; s < qp.G.cols() && std::isfinite(hi); ++s) {
      const double a = -qp.G(i, s);
      if (a == 0.0) continue;
      const double v = a > 0.0 ? uhi[s] : ulo[s];
      hi = std::isfinite(v) ? hi + a * v : kInf;
    }
    out[i] = std::isfinite(hi) ? std::min(cfg.r_bar, hi + 1e-6) : cfg.r_bar;
    out[i] = std::max(out[i], 1e-6);
  }
  return out;
}

void export_model(const MilpModel& model, const std::string& dir,
                  const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  export_lp_file(model, (fs::path(dir) / (name + ".lp")).string());
}

struct EncodeContext {
  Vector xlo, xhi;    // state-domain box
  Vector ulo, uhi;    // input-sequence box
  Vector r_hi;        // per-row slack bound for one-sided blocks
};

EncodeContext make_context(const CondensedQp& qp, const BigMConfig& cfg) {
  EncodeContext ctx;
  const Polytope dom = initial_domain(qp);
  if (is_empty(dom)) {
    throw InvalidInputError("state domain is empty; nothing to certify");
  }
  std::tie(ctx.xlo, ctx.xhi) = bounding_box(dom);
  input_sequence_box(qp, &ctx.ulo, &ctx.uhi);
  ctx.r_hi = slack_upper_bounds(qp, cfg, ctx.xlo, ctx.xhi, ctx.ulo, ctx.uhi);
  return ctx;
}

}  // namespace

KktBlock encode_kkt_block(const CondensedQp& qp, const BigMConfig& cfg,
                          const Vector* x_fixed, MilpModel* model) {
  if (x_fixed != nullptr && x_fixed->size() != qp.n) {
    throw InvalidInputError("encode_kkt_block: fixed state has wrong size");
  }
  const EncodeContext ctx = make_context(qp, cfg);
  const Index nu = qp.H.rows();
  const Index q = qp.q();
  KktBlock blk;

  if (x_fixed == nullptr) {
    for (Index k = 0; k < qp.n; ++k) {
      blk.x.push_back(
          model->add_continuous(idx_name("x", k), ctx.xlo[k], ctx.xhi[k]));
    }
  }
  for (Index s = 0; s < nu; ++s) {
    blk.U.push_back(
        model->add_continuous(idx_name("us", s), ctx.ulo[s], ctx.uhi[s]));
  }
  for (Index i = 0; i < q; ++i) {
    const bool fixed = qp.is_fixed(i);
    blk.lam.push_back(model->add_continuous(idx_name("lams", i), 0.0,
                                            fixed ? 0.0 : cfg.lambda_bar));
    blk.r.push_back(model->add_continuous(idx_name("rs", i), 0.0, ctx.r_hi[i]));
    blk.delta.push_back(fixed ? -1 : model->add_binary(idx_name("delta", i)));
  }

  // Stationarity H U + F x + G' lam = 0.
  for (Index t = 0; t < nu; ++t) {
    std::vector<MilpTerm> terms;
    double rhs = 0.0;
    for (Index s = 0; s < nu; ++s) {
      if (qp.H(t, s) != 0.0) terms.push_back({blk.U[s], qp.H(t, s)});
    }
    for (Index k = 0; k < qp.n; ++k) {
      if (qp.F(t, k) == 0.0) continue;
      if (x_fixed != nullptr) {
        rhs -= qp.F(t, k) * (*x_fixed)[k];
      } else {
        terms.push_back({blk.x[k], qp.F(t, k)});
      }
    }
    for (Index i = 0; i < q; ++i) {
      if (qp.G(i, t) != 0.0) terms.push_back({blk.lam[i], qp.G(i, t)});
    }
    model->add_row(std::move(terms), RowSense::EQ, rhs, idx_name("stat", t));
  }

  // Slack definition r + G U - E x = d.
  for (Index i = 0; i < q; ++i) {
    std::vector<MilpTerm> terms;
    double rhs = qp.d[i];
    terms.push_back({blk.r[i], 1.0});
    for (Index s = 0; s < nu; ++s) {
      if (qp.G(i, s) != 0.0) terms.push_back({blk.U[s], qp.G(i, s)});
    }
    for (Index k = 0; k < qp.n; ++k) {
      if (qp.E(i, k) == 0.0) continue;
      if (x_fixed != nullptr) {
        rhs += qp.E(i, k) * (*x_fixed)[k];
      } else {
        terms.push_back({blk.x[k], -qp.E(i, k)});
      }
    }
    model->add_row(std::move(terms), RowSense::EQ, rhs, idx_name("slack", i));
  }

  // Complementarity via indicator bounds: r <= r_hi (1 - delta),
  // lam <= lambda_bar delta.
  for (Index i = 0; i < q; ++i) {
    if (blk.delta[i] < 0) continue;
    model->add_row({{blk.r[i], 1.0}, {blk.delta[i], ctx.r_hi[i]}},
                   RowSense::LE, ctx.r_hi[i], idx_name("ubr", i));
    model->add_row({{blk.lam[i], 1.0}, {blk.delta[i], -cfg.lambda_bar}},
                   RowSense::LE, 0.0, idx_name("ublam", i));
  }
  return blk;
}

SampleBlock encode_sample_block(const CondensedQp& qp, const BigMConfig& cfg,
                                const KktBlock& base, Index j, SampleMode mode,
                                MilpModel* model) {
  const EncodeContext ctx = make_context(qp, cfg);
  const Index nu = qp.H.rows();
  const Index q = qp.q();
  const bool shared = mode == SampleMode::PerturbedShared;
  if (shared && base.x.empty()) {
    throw InvalidInputError(
        "encode_sample_block: perturbed samples need a free-state base block");
  }
  if (shared && (j < 0 || j >= qp.n)) {
    throw InvalidInputError("encode_sample_block: sample index out of range");
  }

  SampleBlock blk;
  const std::string sj = std::to_string(j + 1);
  if (!shared) {
    for (Index k = 0; k < qp.n; ++k) {
      blk.x.push_back(model->add_continuous("x" + sj + "_" + std::to_string(k),
                                            ctx.xlo[k], ctx.xhi[k]));
    }
  }
  for (Index s = 0; s < nu; ++s) {
    blk.U.push_back(model->add_continuous(
        "u" + sj + "_" + std::to_string(s), shared ? -kInf : ctx.ulo[s],
        shared ? kInf : ctx.uhi[s]));
  }
  for (Index i = 0; i < q; ++i) {
    const bool fixed = qp.is_fixed(i);
    const double lam_lo = shared && !fixed ? -cfg.lambda_bar : 0.0;
    const double lam_hi = fixed ? 0.0 : cfg.lambda_bar;
    blk.lam.push_back(model->add_continuous("lam" + sj + "_" + std::to_string(i),
                                            lam_lo, lam_hi));
    const double r_cap = shared ? cfg.r_bar : ctx.r_hi[i];
    blk.r.push_back(model->add_continuous("r" + sj + "_" + std::to_string(i),
                                          shared ? -r_cap : 0.0, r_cap));
  }

  // Stationarity at the sample state.
  for (Index t = 0; t < nu; ++t) {
    std::vector<MilpTerm> terms;
    double rhs = 0.0;
    for (Index s = 0; s < nu; ++s) {
      if (qp.H(t, s) != 0.0) terms.push_back({blk.U[s], qp.H(t, s)});
    }
    for (Index k = 0; k < qp.n; ++k) {
      if (qp.F(t, k) == 0.0) continue;
      terms.push_back({shared ? base.x[k] : blk.x[k], qp.F(t, k)});
    }
    if (shared) rhs -= qp.F(t, j);  // perturbation x + e_j
    for (Index i = 0; i < q; ++i) {
      if (qp.G(i, t) != 0.0) terms.push_back({blk.lam[i], qp.G(i, t)});
    }
    model->add_row(std::move(terms), RowSense::EQ, rhs, "stat" + sj + "_" + std::to_string(t));
  }

  // Slack definition at the sample state.
  for (Index i = 0; i < q; ++i) {
    std::vector<MilpTerm> terms;
    double rhs = qp.d[i];
    terms.push_back({blk.r[i], 1.0});
    for (Index s = 0; s < nu; ++s) {
      if (qp.G(i, s) != 0.0) terms.push_back({blk.U[s], qp.G(i, s)});
    }
    for (Index k = 0; k < qp.n; ++k) {
      if (qp.E(i, k) == 0.0) continue;
      terms.push_back({shared ? base.x[k] : blk.x[k], -qp.E(i, k)});
    }
    if (shared) rhs += qp.E(i, j);
    model->add_row(std::move(terms), RowSense::EQ, rhs, "slack" + sj + "_" + std::to_string(i));
  }

  // Same active set as the base block, through the shared binaries.
  for (Index i = 0; i < q; ++i) {
    if (base.delta[i] < 0) continue;  // pinned rows handled by bounds
    const double r_cap = shared ? cfg.r_bar : ctx.r_hi[i];
    model->add_row({{blk.r[i], 1.0}, {base.delta[i], r_cap}}, RowSense::LE,
                   r_cap, "ubr" + sj + "_" + std::to_string(i));
    model->add_row({{blk.lam[i], 1.0}, {base.delta[i], -cfg.lambda_bar}},
                   RowSense::LE, 0.0, "ublam" + sj + "_" + std::to_string(i));
    if (shared) {
      model->add_row({{blk.r[i], -1.0}, {base.delta[i], r_cap}}, RowSense::LE,
                     r_cap, "lbr" + sj + "_" + std::to_string(i));
      model->add_row({{blk.lam[i], -1.0}, {base.delta[i], -cfg.lambda_bar}},
                     RowSense::LE, 0.0, "lblam" + sj + "_" + std::to_string(i));
    }
  }
  return blk;
}

std::vector<Index> encode_gain(const CondensedQp& qp, const KktBlock& base,
                               const std::vector<SampleBlock>& samples,
                               double gain_cap, MilpModel* model) {
  if (static_cast<Index>(samples.size()) != qp.n) {
    throw InvalidInputError("encode_gain: need one sample block per state dim");
  }
  std::vector<Index> K;
  for (Index t = 0; t < qp.m; ++t) {
    for (Index j = 0; j < qp.n; ++j) {
      K.push_back(model->add_continuous(pair_name("K", t, j), -gain_cap, gain_cap));
    }
  }
  for (Index t = 0; t < qp.m; ++t) {
    for (Index j = 0; j < qp.n; ++j) {
      std::vector<MilpTerm> terms;
      terms.push_back({K[t * qp.n + j], 1.0});
      for (Index s = 0; s < qp.S_sel.cols(); ++s) {
        const double a = qp.S_sel(t, s);
        if (a == 0.0) continue;
        terms.push_back({samples[static_cast<size_t>(j)].U[s], -a});
        terms.push_back({base.U[s], a});
      }
      model->add_row(std::move(terms), RowSense::EQ, 0.0, pair_name("gain", t, j));
    }
  }
  return K;
}

NormBlock encode_norm_block(const std::vector<Index>& K, Index m, Index n,
                            Norm p, double M, MilpModel* model) {
  if (static_cast<Index>(K.size()) != m * n) {
    throw InvalidInputError("encode_norm_block: K block has wrong size");
  }
  NormBlock blk;
  const bool col_sums = p == Norm::One;  // 1-norm: max column sum
  const Index groups = col_sums ? n : m;
  const Index group_size = col_sums ? m : n;

  std::vector<Index> sgn;
  for (Index t = 0; t < m; ++t) {
    for (Index j = 0; j < n; ++j) {
      const Index e = t * n + j;
      blk.k_plus.push_back(
          model->add_continuous(pair_name("Kp", t, j), 0.0, M));
      blk.k_minus.push_back(
          model->add_continuous(pair_name("Km", t, j), 0.0, M));
      sgn.push_back(model->add_binary(pair_name("ksgn", t, j)));
      model->add_row({{K[e], 1.0}, {blk.k_plus[e], -1.0}, {blk.k_minus[e], 1.0}},
                     RowSense::EQ, 0.0, pair_name("ksplit", t, j));
      model->add_row({{blk.k_plus[e], 1.0}, {sgn[e], -M}}, RowSense::LE, 0.0,
                     pair_name("kpos", t, j));
      model->add_row({{blk.k_minus[e], 1.0}, {sgn[e], M}}, RowSense::LE, M,
                     pair_name("kneg", t, j));
    }
  }

  const double sum_cap = M * static_cast<double>(group_size);
  blk.l = model->add_continuous("lnorm", 0.0, sum_cap);
  std::vector<MilpTerm> one_hot;
  for (Index g = 0; g < groups; ++g) {
    const Index c_g = model->add_continuous(idx_name("cnorm", g), 0.0, sum_cap);
    std::vector<MilpTerm> sum{{c_g, 1.0}};
    for (Index e = 0; e < group_size; ++e) {
      const Index entry = col_sums ? e * n + g : g * n + e;
      sum.push_back({blk.k_plus[entry], -1.0});
      sum.push_back({blk.k_minus[entry], -1.0});
    }
    model->add_row(std::move(sum), RowSense::EQ, 0.0, idx_name("csum", g));

    const Index sel = model->add_binary(idx_name("ksel", g));
    one_hot.push_back({sel, 1.0});
    model->add_row({{c_g, 1.0}, {blk.l, -1.0}}, RowSense::LE, 0.0,
                   idx_name("lge", g));
    model->add_row({{blk.l, 1.0}, {c_g, -1.0}, {sel, sum_cap}}, RowSense::LE,
                   sum_cap, idx_name("lle", g));
  }
  model->add_row(std::move(one_hot), RowSense::EQ, 1.0, "kselsum");
  blk.binaries = m * n + groups;
  return blk;
}

MilpModel build_exclusion_milp(const CondensedQp& qp, const BigMConfig& cfg,
                               Index row) {
  if (row < 0 || row >= qp.q()) {
    throw InvalidInputError("build_exclusion_milp: row index out of range");
  }
  if (qp.is_fixed(row)) {
    throw InvalidInputError("build_exclusion_milp: row is already fixed");
  }
  MilpModel model;
  KktBlock base = encode_kkt_block(qp, cfg, nullptr, &model);
  model.set_bounds(base.delta[row], 1.0, 1.0);

  std::vector<SampleBlock> samples;
  for (Index j = 0; j < qp.m; ++j) {
    samples.push_back(encode_sample_block(qp, cfg, base, j,
                                          SampleMode::FreeOneSided, &model));
  }

  // Total variation of the first input over states sharing this active set:
  // maximize sum_j S_j (U_sample_j - U_base).
  std::vector<MilpTerm> obj;
  std::vector<double> base_coef(static_cast<size_t>(qp.S_sel.cols()), 0.0);
  for (Index j = 0; j < qp.m; ++j) {
    for (Index s = 0; s < qp.S_sel.cols(); ++s) {
      const double a = qp.S_sel(j, s);
      if (a == 0.0) continue;
      obj.push_back({samples[static_cast<size_t>(j)].U[s], a});
      base_coef[static_cast<size_t>(s)] -= a;
    }
  }
  for (Index s = 0; s < qp.S_sel.cols(); ++s) {
    if (base_coef[static_cast<size_t>(s)] != 0.0) {
      obj.push_back({base.U[s], base_coef[static_cast<size_t>(s)]});
    }
  }
  model.set_objective(ObjSense::Maximize, std::move(obj));
  return model;
}

std::pair<CondensedQp, ReductionReport> reduce_constraints(
    const CondensedQp& qp, const BigMConfig& cfg, const ReduceOptions& opts) {
  const double t0 = now_seconds();
  CondensedQp cur = qp;
  ReductionReport rep;
  rep.sequential = !opts.parallel;

  std::vector<Index> candidates;
  for (Index i = 0; i < qp.q(); ++i) {
    if (!qp.is_fixed(i)) candidates.push_back(i);
  }

  MilpOptions mo;
  mo.cutoff_above = opts.tolerance_zero;
  mo.node_limit = opts.node_limit_per_row;
  mo.time_limit_seconds = opts.time_limit_per_row;
  mo.integer_tol = 1e-8;

  const auto maybe_export = [&](const MilpModel& model, Index row) {
    if (opts.export_lp_dir.empty()) return;
    const std::string prefix =
        opts.export_prefix.empty() ? "problem" : opts.export_prefix;
    export_model(model, opts.export_lp_dir,
                 prefix + "_exclusion_row" + std::to_string(row));
  };

  const auto classify = [&](const MilpSolution& sol, RowReduction* row) {
    switch (sol.status) {
      case MilpStatus::Infeasible:
        row->verdict = RowVerdict::ExcludedInfeasible;
        row->objective = 0.0;
        break;
      case MilpStatus::Optimal:
        row->objective = sol.objective;
        row->verdict = sol.objective <= opts.tolerance_zero
                           ? RowVerdict::ExcludedZeroGain
                           : RowVerdict::Kept;
        break;
      case MilpStatus::Cutoff:
        row->objective = sol.objective;
        row->verdict = RowVerdict::Kept;
        break;
      default:  // node/time limit, unbounded: keep the row, note the limit
        row->objective = sol.has_assignment ? sol.objective : 0.0;
        row->verdict = RowVerdict::Kept;
        row->conservative = true;
        break;
    }
    row->nodes = sol.nodes;
    row->seconds = sol.wall_seconds;
  };

  if (opts.parallel) {
    // Every row is tested against the input problem; verdicts are
    // independent of scheduling, so the merge is deterministic.
    std::vector<RowReduction> rows(candidates.size());
    std::atomic<size_t> next{0};
    const int nthreads = std::max(
        1, std::min<int>(opts.threads, static_cast<int>(candidates.size())));
    auto work = [&]() {
      while (true) {
        const size_t at = next.fetch_add(1);
        if (at >= candidates.size()) break;
        RowReduction& row = rows[at];
        row.row = candidates[at];
        const MilpModel model = build_exclusion_milp(qp, cfg, row.row);
        maybe_export(model, row.row);
        classify(milp_solve(model, mo), &row);
      }
    };
    if (nthreads == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    for (auto& row : rows) {
      if (row.verdict != RowVerdict::Kept) {
        cur.fixed_dual_rows.push_back(row.row);
      }
      row.fixed_after = static_cast<Index>(cur.fixed_dual_rows.size());
      rep.rows.push_back(row);
    }
    std::sort(cur.fixed_dual_rows.begin(), cur.fixed_dual_rows.end());
  } else {
    for (Index i : candidates) {
      RowReduction row;
      row.row = i;
      const MilpModel model = build_exclusion_milp(cur, cfg, i);
      maybe_export(model, i);
      classify(milp_solve(model, mo), &row);
      if (row.verdict != RowVerdict::Kept) {
        auto& fixed = cur.fixed_dual_rows;
        fixed.insert(std::upper_bound(fixed.begin(), fixed.end(), i), i);
      }
      row.fixed_after = static_cast<Index>(cur.fixed_dual_rows.size());
      rep.rows.push_back(row);
    }
  }

  for (const auto& row : rep.rows) {
    switch (row.verdict) {
      case RowVerdict::Kept:
        ++rep.kept;
        if (row.conservative) ++rep.conservative_kept;
        break;
      case RowVerdict::ExcludedInfeasible:
        ++rep.excluded_infeasible;
        break;
      case RowVerdict::ExcludedZeroGain:
        ++rep.excluded_zero_gain;
        break;
    }
  }
  rep.fixed_rows = cur.fixed_dual_rows;
  rep.wall_seconds = now_seconds() - t0;
  return {std::move(cur), std::move(rep)};
}

SymmetryTuple verify_symmetry(const MpcProblem& prob, const SymmetryTuple& t) {
  SymmetryTuple out = t;
  out.verified = false;
  out.norm_invariant_1 = false;
  out.norm_invariant_inf = false;

  const Index n = prob.n();
  const Index m = prob.m();
  if (t.Theta.rows() != n || t.Theta.cols() != n || t.Omega.rows() != m ||
      t.Omega.cols() != m) {
    throw InvalidInputError("verify_symmetry: transformation dimensions");
  }
  Eigen::FullPivLU<Matrix> theta_lu(t.Theta);
  Eigen::FullPivLU<Matrix> omega_lu(t.Omega);
  if (!theta_lu.isInvertible() || !omega_lu.isInvertible()) {
    throw SingularMatrixError("verify_symmetry: Theta and Omega must be invertible");
  }

  constexpr double tol = 1e-8;
  const Matrix P = resolve_terminal_cost(prob);
  const bool algebra =
      (t.Theta * prob.A - prob.A * t.Theta).lpNorm<Eigen::Infinity>() <= tol &&
      (t.Theta * prob.B - prob.B * t.Omega).lpNorm<Eigen::Infinity>() <= tol &&
      (t.Theta.transpose() * prob.Q * t.Theta - prob.Q)
              .lpNorm<Eigen::Infinity>() <= tol &&
      (t.Omega.transpose() * prob.R * t.Omega - prob.R)
              .lpNorm<Eigen::Infinity>() <= tol &&
      (t.Theta.transpose() * P * t.Theta - P).lpNorm<Eigen::Infinity>() <= tol;

  bool sets = false;
  if (algebra) {
    const Polytope term = resolve_terminal_set(prob);
    sets = set_equal(map_set(t.Theta, prob.X), prob.X, 1e-7) &&
           set_equal(map_set(t.Omega, prob.U_set), prob.U_set, 1e-7) &&
           set_equal(map_set(t.Theta, term), term, 1e-7);
  }
  out.verified = algebra && sets;

  constexpr double ntol = 1e-9;
  out.norm_invariant_1 =
      std::abs(matrix_pnorm(t.Theta, Norm::One) - 1.0) <= ntol &&
      std::abs(matrix_pnorm(t.Omega, Norm::One) - 1.0) <= ntol;
  out.norm_invariant_inf =
      std::abs(matrix_pnorm(t.Theta, Norm::Inf) - 1.0) <= ntol &&
      std::abs(matrix_pnorm(t.Omega, Norm::Inf) - 1.0) <= ntol;
  return out;
}

FinalMilp build_final_milp(const CondensedQp& qp, const BigMConfig& cfg,
                           Norm p,
                           const std::pair<Matrix, Matrix>* transform) {
  FinalMilp fm;
  fm.kkt = encode_kkt_block(qp, cfg, nullptr, &fm.model);
  for (Index j = 0; j < qp.n; ++j) {
    fm.samples.push_back(encode_sample_block(
        qp, cfg, fm.kkt, j, SampleMode::PerturbedShared, &fm.model));
  }
  fm.K = encode_gain(qp, fm.kkt, fm.samples, cfg.gain_m, &fm.model);

  std::vector<Index> target = fm.K;
  double norm_m = cfg.gain_m;
  if (transform != nullptr) {
    const Matrix& omega_inv = transform->first;
    const Matrix& theta = transform->second;
    if (omega_inv.rows() != qp.m || omega_inv.cols() != qp.m ||
        theta.rows() != qp.n || theta.cols() != qp.n) {
      throw InvalidInputError("build_final_milp: transform dimensions");
    }
    // |(Omega^-1 K Theta)_{ab}| <= max|K| * ||Omega^-1||_inf * ||Theta||_1
    norm_m = cfg.gain_m * std::max(1.0, matrix_pnorm(omega_inv, Norm::Inf) *
                                            matrix_pnorm(theta, Norm::One));
    target.clear();
    for (Index a = 0; a < qp.m; ++a) {
      for (Index b = 0; b < qp.n; ++b) {
        target.push_back(
            fm.model.add_continuous(pair_name("Kt", a, b), -norm_m, norm_m));
      }
    }
    for (Index a = 0; a < qp.m; ++a) {
      for (Index b = 0; b < qp.n; ++b) {
        std::vector<MilpTerm> terms{{target[a * qp.n + b], 1.0}};
        for (Index t = 0; t < qp.m; ++t) {
          for (Index s = 0; s < qp.n; ++s) {
            const double coef = omega_inv(a, t) * theta(s, b);
            if (coef != 0.0) terms.push_back({fm.K[t * qp.n + s], -coef});
          }
        }
        fm.model.add_row(std::move(terms), RowSense::EQ, 0.0,
                         pair_name("tgain", a, b));
      }
    }
  }

  fm.norm = encode_norm_block(target, qp.m, qp.n, p, norm_m, &fm.model);
  fm.model.set_objective(ObjSense::Maximize, {{fm.norm.l, 1.0}});
  return fm;
}

namespace {

double halton(long index, int base) {
  double f = 1.0, r = 0.0;
  for (long i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

/// Share of low-discrepancy samples of X that the group maps into x_fun.
/// Advisory only: exact union-coverage certification is out of scope.
double coverage_fraction(const MpcProblem& prob,
                         const std::vector<SymmetryTuple>& tuples) {
  static const int bases[8] = {2, 3, 5, 7, 11, 13, 17, 19};
  const auto [lo, hi] = bounding_box(prob.X);
  if (!lo.allFinite() || !hi.allFinite()) return 0.0;
  const Index n = prob.n();
  if (n > 8) return 0.0;
  std::vector<Eigen::FullPivLU<Matrix>> lus;
  for (const auto& t : tuples) lus.emplace_back(t.Theta);

  long kept = 0, covered = 0;
  for (long draw = 1; draw <= 200000 && kept < 10000; ++draw) {
    Vector x(n);
    for (Index k = 0; k < n; ++k) {
      x[k] = lo[k] + (hi[k] - lo[k]) * halton(draw, bases[k]);
    }
    if (!contains(prob.X, x)) continue;
    ++kept;
    for (const auto& lu : lus) {
      if (contains(*prob.x_fun, lu.solve(x), 1e-7)) {
        ++covered;
        break;
      }
    }
  }
  return kept == 0 ? 0.0 : static_cast<double>(covered) / kept;
}

}  // namespace

LipschitzResult compute_lipschitz(const MpcProblem& prob, Norm p,
                                  const CertifyOptions& opts) {
  const double t0 = now_seconds();
  prob.validate();
  const std::string prefix =
      opts.export_prefix.empty() ? (prob.name.empty() ? "problem" : prob.name)
                                 : opts.export_prefix;

  LipschitzResult res;
  res.p = p;
  CondensedQp qp = condense(prob);

  std::vector<SymmetryTuple> tuples;
  bool all_norm_invariant = true;
  if (opts.use_symmetry && !prob.symmetries.empty()) {
    for (const auto& t : prob.symmetries) {
      SymmetryTuple v = verify_symmetry(prob, t);
      if (!v.verified) {
        throw InvalidInputError(
            "a supplied symmetry tuple failed verification; drop it or run "
            "with symmetry disabled");
      }
      all_norm_invariant = all_norm_invariant &&
                           (p == Norm::One ? v.norm_invariant_1
                                           : v.norm_invariant_inf);
      tuples.push_back(std::move(v));
    }
    // The fundamental domain stands in for the full state domain only when a
    // verified group maps it back over the feasible set.
    if (prob.x_fun.has_value()) {
      qp = substitute_initial_domain(qp, *prob.x_fun);
      res.symmetry_applied = true;
      res.coverage_checked = true;
      res.coverage_fraction = coverage_fraction(prob, tuples);
    }
  }

  if (opts.use_reduction) {
    ReduceOptions ropts = opts.reduce;
    if (ropts.export_lp_dir.empty()) ropts.export_lp_dir = opts.export_lp_dir;
    if (ropts.export_prefix.empty()) ropts.export_prefix = prefix;
    auto [reduced, report] = reduce_constraints(qp, opts.cfg, ropts);
    qp = std::move(reduced);
    res.reduction = std::move(report);
    res.reduction_applied = true;
  }
  res.timings.preprocess_seconds = now_seconds() - t0;

  // Solve one final MILP per norm-preserving situation: a single instance
  // when every tuple leaves the gain norm invariant, otherwise one instance
  // per tuple with the transformed gain in the norm block.
  struct Instance {
    FinalMilp fm;
    MilpSolution sol;
    const SymmetryTuple* tuple = nullptr;
  };
  std::vector<Instance> instances;

  MilpOptions mo;
  mo.node_limit = opts.node_limit;
  mo.time_limit_seconds = opts.time_limit_seconds;
  mo.integer_tol = 1e-8;

  const double t1 = now_seconds();
  if (tuples.empty() || all_norm_invariant) {
    Instance inst;
    inst.fm = build_final_milp(qp, opts.cfg, p);
    if (!opts.export_lp_dir.empty()) {
      export_model(inst.fm.model, opts.export_lp_dir,
                   prefix + "_final_l" + std::string(to_string(p)));
    }
    inst.sol = milp_solve(inst.fm.model, mo);
    instances.push_back(std::move(inst));
  } else {
    res.sigma_instances = static_cast<int>(tuples.size());
    for (size_t k = 0; k < tuples.size(); ++k) {
      Instance inst;
      inst.tuple = &tuples[k];
      const std::pair<Matrix, Matrix> tr{tuples[k].Omega.inverse(),
                                         tuples[k].Theta};
      inst.fm = build_final_milp(qp, opts.cfg, p, &tr);
      if (!opts.export_lp_dir.empty()) {
        export_model(inst.fm.model, opts.export_lp_dir,
                     prefix + "_final_l" + std::string(to_string(p)) +
                         "_sigma" + std::to_string(k));
      }
      inst.sol = milp_solve(inst.fm.model, mo);
      instances.push_back(std::move(inst));
    }
  }
  res.timings.final_milp_seconds = now_seconds() - t1;

  // Aggregate: the Lipschitz constant is the worst case over instances.
  double best = -kInf;
  double upper = -kInf;
  size_t best_at = 0;
  bool inconclusive = false;
  for (size_t k = 0; k < instances.size(); ++k) {
    const MilpSolution& sol = instances[k].sol;
    res.nodes += sol.nodes;
    res.lp_iterations += sol.lp_iterations;
    switch (sol.status) {
      case MilpStatus::Optimal:
        upper = std::max(upper, sol.objective);
        break;
      case MilpStatus::NodeLimit:
      case MilpStatus::TimeLimit:
        inconclusive = true;
        upper = std::max(upper, sol.best_bound);
        break;
      default:
        throw Error("final Lipschitz MILP ended " + to_string(sol.status) +
                    "; the model should be feasible and bounded");
    }
    if (sol.has_assignment && sol.objective > best) {
      best = sol.objective;
      best_at = k;
    }
  }

  const Instance& win = instances[best_at];
  res.binaries_used = win.fm.model.num_binaries();
  if (!win.sol.has_assignment) {
    res.status = CertifyStatus::Inconclusive;
    res.L_star = 0.0;
    res.upper_bound = upper;
    return res;
  }

  res.status = inconclusive ? CertifyStatus::Inconclusive : CertifyStatus::Optimal;
  res.L_star = best;
  res.upper_bound = upper;

  const Vector& v = win.sol.values;
  res.x_star.resize(qp.n);
  for (Index k = 0; k < qp.n; ++k) res.x_star[k] = v[win.fm.kkt.x[k]];
  res.K_star.resize(qp.m, qp.n);
  for (Index t = 0; t < qp.m; ++t) {
    for (Index j = 0; j < qp.n; ++j) {
      res.K_star(t, j) = v[win.fm.K[t * qp.n + j]];
    }
  }
  res.delta_star = Vector::Zero(qp.q());
  for (Index i = 0; i < qp.q(); ++i) {
    if (win.fm.kkt.delta[i] >= 0) {
      res.delta_star[i] = std::round(v[win.fm.kkt.delta[i]]);
    }
  }

  // Post-solve validity checks: the big-M constants must not be binding, the
  // solution must be complementary, and the norm encoding must agree with a
  // direct evaluation of the extracted gain.
  const auto check_block = [&](const std::vector<Index>& lam,
                               const std::vector<Index>& r) {
    for (Index var : lam) {
      if (std::abs(v[var]) > 0.99 * opts.cfg.lambda_bar) {
        throw InvalidInputError(
            "a multiplier reached 99% of lambda_bar; increase lambda_bar");
      }
    }
    for (Index var : r) {
      if (std::abs(v[var]) > 0.99 * opts.cfg.r_bar) {
        throw InvalidInputError(
            "a slack reached 99% of r_bar; increase r_bar");
      }
    }
  };
  check_block(win.fm.kkt.lam, win.fm.kkt.r);
  for (const auto& s : win.fm.samples) check_block(s.lam, s.r);
  if (res.K_star.lpNorm<Eigen::Infinity>() > 0.99 * opts.cfg.gain_m) {
    throw InvalidInputError("a gain entry reached 99% of M; increase M");
  }
  for (Index i = 0; i < qp.q(); ++i) {
    const double prod =
        v[win.fm.kkt.lam[i]] * v[win.fm.kkt.r[i]];
    if (prod > 1e-6) {
      throw Error("final MILP solution violates complementarity");
    }
  }
  Matrix normed = res.K_star;
  if (win.tuple != nullptr) {
    normed = win.tuple->Omega.inverse() * res.K_star * win.tuple->Theta;
  }
  if (std::abs(matrix_pnorm(normed, p) - res.L_star) >
      1e-6 * std::max(1.0, std::abs(res.L_star))) {
    throw Error("norm encoding disagrees with the extracted gain");
  }
  return res;
}

}  // namespace lipcert
