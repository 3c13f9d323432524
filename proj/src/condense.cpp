#include "lipcert/condense.hpp"

#include <algorithm>

#include "lipcert/numkit.hpp"

namespace lipcert {

std::string to_string(const RowTag& tag) {
  switch (tag.kind) {
    case RowKind::State:
      return "state-" + std::to_string(tag.stage) + "[" +
             std::to_string(tag.source_row) + "]";
    case RowKind::Input:
      return "input-" + std::to_string(tag.stage) + "[" +
             std::to_string(tag.source_row) + "]";
    case RowKind::Terminal:
      return "terminal[" + std::to_string(tag.source_row) + "]";
  }
  return "?";
}

bool CondensedQp::is_fixed(Index row) const {
  return std::binary_search(fixed_dual_rows.begin(), fixed_dual_rows.end(), row);
}

void MpcProblem::validate() const {
  const Index nn = n();
  const Index mm = m();
  if (nn < 1 || mm < 1) throw InvalidInputError("mpc: empty dimensions");
  if (A.rows() != A.cols()) throw InvalidInputError("mpc: A must be square");
  if (B.rows() != nn) throw InvalidInputError("mpc: B row count must match A");
  if (Q.rows() != nn || Q.cols() != nn) throw InvalidInputError("mpc: Q must be n x n");
  if (R.rows() != mm || R.cols() != mm) throw InvalidInputError("mpc: R must be m x m");
  if (N < 1) throw InvalidInputError("mpc: horizon must be at least 1");
  require_finite(A, "mpc: A");
  require_finite(B, "mpc: B");
  if (!is_symmetric_positive_definite(Q)) {
    throw InvalidInputError("mpc: Q must be symmetric positive definite");
  }
  if (!is_symmetric_positive_definite(R)) {
    throw InvalidInputError("mpc: R must be symmetric positive definite");
  }
  if (P.has_value()) {
    if (P->rows() != nn || P->cols() != nn) {
      throw InvalidInputError("mpc: P must be n x n");
    }
    if (!is_symmetric_positive_definite(*P)) {
      throw InvalidInputError("mpc: P must be symmetric positive definite");
    }
  }
  auto check_set = [](const Polytope& set, Index dim, const char* what) {
    if (set.dim() != dim) {
      throw InvalidInputError(std::string("mpc: ") + what + " has wrong dimension");
    }
    if (set.num_rows() == 0 || set.trivially_empty()) {
      throw InvalidInputError(std::string("mpc: ") + what + " must be nonempty and bounded");
    }
    if (set.c().minCoeff() <= 0.0) {
      throw InvalidInputError(std::string("mpc: ") + what +
                              " must contain the origin in its interior");
    }
    if (!is_bounded(set)) {
      throw InvalidInputError(std::string("mpc: ") + what + " must be compact");
    }
  };
  check_set(X, nn, "state set");
  check_set(U_set, mm, "input set");
  if (terminal_kind == TerminalKind::Explicit) {
    check_set(terminal_explicit, nn, "terminal set");
  }
  if (x_fun.has_value()) {
    if (x_fun->dim() != nn) {
      throw InvalidInputError("mpc: x_fun has wrong dimension");
    }
    if (is_empty(*x_fun)) throw InvalidInputError("mpc: x_fun is empty");
    if (!includes(X, *x_fun)) {
      throw InvalidInputError("mpc: x_fun must be contained in the state set");
    }
  }
  for (const auto& t : symmetries) {
    if (t.Theta.rows() != nn || t.Theta.cols() != nn ||
        t.Omega.rows() != mm || t.Omega.cols() != mm) {
      throw InvalidInputError("mpc: symmetry tuple has wrong dimensions");
    }
  }
}

Matrix resolve_terminal_cost(const MpcProblem& prob) {
  if (prob.P.has_value()) return *prob.P;
  return dare(prob.A, prob.B, prob.Q, prob.R).P;
}

Polytope resolve_terminal_set(const MpcProblem& prob) {
  switch (prob.terminal_kind) {
    case TerminalKind::StateSet:
      return prob.X;
    case TerminalKind::Explicit:
      return prob.terminal_explicit;
    case TerminalKind::LqrInvariant: {
      const DareSolution lqr = dare(prob.A, prob.B, prob.Q, prob.R);
      const Matrix A_cl = prob.A + prob.B * lqr.K_lqr;
      const Polytope base =
          intersect(prob.X, preimage_set(lqr.K_lqr, prob.U_set));
      return max_invariant_set(A_cl, base);
    }
  }
  throw InvalidInputError("mpc: unknown terminal kind");
}

CondensedQp condense(const MpcProblem& prob) {
  prob.validate();
  const Index n = prob.n();
  const Index m = prob.m();
  const int N = prob.N;
  const Matrix P = resolve_terminal_cost(prob);
  if (!is_symmetric_positive_definite(P)) {
    throw InvalidInputError("mpc: terminal cost is not positive definite");
  }
  const Polytope term = resolve_terminal_set(prob);
  if (term.dim() != n || is_empty(term)) {
    throw InvalidInputError("mpc: terminal set invalid or empty");
  }

  // Prediction matrices: x(k) = A^k x + sum_j A^(k-1-j) B u(j).
  const std::vector<Matrix> Apow = matrix_power_stack(prob.A, N);  // A^1..A^N
  Matrix Phi(N * n, n);
  for (int k = 1; k <= N; ++k) Phi.middleRows((k - 1) * n, n) = Apow[size_t(k - 1)];
  Matrix Gamma = Matrix::Zero(N * n, N * m);
  for (int k = 1; k <= N; ++k) {
    for (int j = 1; j <= k; ++j) {
      const int power = k - j;  // diagonal blocks carry A^0 B = B
      const Matrix blk = power == 0 ? prob.B : Matrix(Apow[size_t(power - 1)] * prob.B);
      Gamma.block((k - 1) * n, (j - 1) * m, n, m) = blk;
    }
  }

  Matrix Qbar = Matrix::Zero(N * n, N * n);
  for (int k = 1; k < N; ++k) Qbar.block((k - 1) * n, (k - 1) * n, n, n) = prob.Q;
  Qbar.block((N - 1) * n, (N - 1) * n, n, n) = P;
  Matrix Rbar = Matrix::Zero(N * m, N * m);
  for (int k = 0; k < N; ++k) Rbar.block(k * m, k * m, m, m) = prob.R;

  CondensedQp qp;
  qp.n = n;
  qp.m = m;
  qp.N = N;
  qp.H = 2.0 * (Gamma.transpose() * Qbar * Gamma + Rbar);
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();  // exact symmetry
  qp.F = 2.0 * Gamma.transpose() * Qbar * Phi;
  qp.S_sel = Matrix::Zero(m, N * m);
  qp.S_sel.leftCols(m) = Matrix::Identity(m, m);
  if (!is_symmetric_positive_definite(qp.H)) {
    throw InvalidInputError("mpc: condensed Hessian is not positive definite");
  }

  const Matrix& Cx = prob.X.C();
  const Vector& cx = prob.X.c();
  const Matrix& Cu = prob.U_set.C();
  const Vector& cu = prob.U_set.c();
  const Index nx_rows = Cx.rows();
  const Index nu_rows = Cu.rows();
  const Index nt_rows = term.num_rows();
  const Index q = nx_rows + N * nu_rows + (N - 1) * nx_rows + nt_rows;

  qp.G = Matrix::Zero(q, N * m);
  qp.E = Matrix::Zero(q, n);
  qp.d = Vector::Zero(q);
  qp.row_tags.resize(size_t(q));

  Index row = 0;
  auto emit_state = [&](int stage) {
    if (stage == 0) {
      qp.E.middleRows(row, nx_rows) = -Cx;
    } else {
      const Matrix Phi_k = Phi.middleRows((stage - 1) * n, n);
      const Matrix Gamma_k = Gamma.middleRows((stage - 1) * n, n);
      qp.G.middleRows(row, nx_rows) = Cx * Gamma_k;
      qp.E.middleRows(row, nx_rows) = -Cx * Phi_k;
    }
    qp.d.segment(row, nx_rows) = cx;
    for (Index i = 0; i < nx_rows; ++i) {
      qp.row_tags[size_t(row + i)] = RowTag{RowKind::State, stage, i};
    }
    row += nx_rows;
  };
  auto emit_input = [&](int stage) {
    qp.G.block(row, stage * m, nu_rows, m) = Cu;
    qp.d.segment(row, nu_rows) = cu;
    for (Index i = 0; i < nu_rows; ++i) {
      qp.row_tags[size_t(row + i)] = RowTag{RowKind::Input, stage, i};
    }
    row += nu_rows;
  };

  emit_state(0);
  for (int k = 0; k < N; ++k) {
    emit_input(k);
    if (k + 1 <= N - 1) emit_state(k + 1);
  }
  // Terminal rows constrain x(N).
  {
    const Matrix Phi_N = Phi.middleRows((N - 1) * n, n);
    const Matrix Gamma_N = Gamma.middleRows((N - 1) * n, n);
    qp.G.middleRows(row, nt_rows) = term.C() * Gamma_N;
    qp.E.middleRows(row, nt_rows) = -term.C() * Phi_N;
    qp.d.segment(row, nt_rows) = term.c();
    for (Index i = 0; i < nt_rows; ++i) {
      qp.row_tags[size_t(row + i)] = RowTag{RowKind::Terminal, N, i};
    }
    row += nt_rows;
  }
  if (row != q) throw Error("mpc: internal row accounting error");
  return qp;
}

Polytope initial_domain(const CondensedQp& qp) {
  std::vector<Index> rows;
  for (Index i = 0; i < qp.q(); ++i) {
    const RowTag& t = qp.row_tags[size_t(i)];
    if (t.kind == RowKind::State && t.stage == 0) rows.push_back(i);
  }
  if (rows.empty()) throw InvalidInputError("mpc: qp has no state-0 rows");
  Matrix C(Index(rows.size()), qp.n);
  Vector c(Index(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    C.row(Index(k)) = -qp.E.row(rows[k]);
    c[Index(k)] = qp.d[rows[k]];
  }
  return Polytope(std::move(C), std::move(c));
}

CondensedQp substitute_initial_domain(const CondensedQp& qp,
                                      const Polytope& x_fun) {
  if (x_fun.dim() != qp.n) {
    throw InvalidInputError("mpc: x_fun dimension mismatch");
  }
  if (is_empty(x_fun)) throw InvalidInputError("mpc: x_fun is empty");
  const Polytope current = initial_domain(qp);
  if (!includes(current, x_fun)) {
    throw InvalidInputError("mpc: x_fun is not contained in the current x(0) domain");
  }

  std::vector<Index> state0, others;
  for (Index i = 0; i < qp.q(); ++i) {
    const RowTag& t = qp.row_tags[size_t(i)];
    (t.kind == RowKind::State && t.stage == 0 ? state0 : others).push_back(i);
  }
  const Index insert_at = state0.front();
  const Index new_rows = x_fun.num_rows();
  const Index q_new = Index(others.size()) + new_rows;

  CondensedQp out = qp;
  out.G = Matrix::Zero(q_new, qp.G.cols());
  out.E = Matrix::Zero(q_new, qp.n);
  out.d = Vector::Zero(q_new);
  out.row_tags.assign(size_t(q_new), RowTag{});
  std::vector<Index> new_index(size_t(qp.q()), -1);

  Index row = 0;
  auto copy_old = [&](Index i) {
    out.G.row(row) = qp.G.row(i);
    out.E.row(row) = qp.E.row(i);
    out.d[row] = qp.d[i];
    out.row_tags[size_t(row)] = qp.row_tags[size_t(i)];
    new_index[size_t(i)] = row;
    ++row;
  };
  for (Index i = 0; i < insert_at; ++i) {
    if (std::find(state0.begin(), state0.end(), i) == state0.end()) copy_old(i);
  }
  for (Index i = 0; i < new_rows; ++i) {
    out.E.row(row) = -x_fun.C().row(i);
    out.d[row] = x_fun.c()[i];
    out.row_tags[size_t(row)] = RowTag{RowKind::State, 0, i};
    ++row;
  }
  for (Index i = insert_at; i < qp.q(); ++i) {
    if (std::find(state0.begin(), state0.end(), i) == state0.end()) copy_old(i);
  }
  if (row != q_new) throw Error("mpc: internal substitution accounting error");

  out.fixed_dual_rows.clear();
  for (const Index f : qp.fixed_dual_rows) {
    const Index ni = new_index[size_t(f)];
    if (ni >= 0) out.fixed_dual_rows.push_back(ni);
  }
  std::sort(out.fixed_dual_rows.begin(), out.fixed_dual_rows.end());
  return out;
}

}  // namespace lipcert
