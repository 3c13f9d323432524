#include "lipcert/numkit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace lipcert {

namespace {

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& A) {
  if (A.rows() != A.cols()) throw InvalidInputError("solve_linear: matrix must be square");
  require_finite(A, "solve_linear");
  Eigen::PartialPivLU<Matrix> lu(A);
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (pivots.size() > 0 && pivots.minCoeff() < 1e-12) {
    throw SingularMatrixError("solve_linear: pivot below 1e-12, matrix singular to working precision");
  }
  return lu;
}

}  // namespace

Vector solve_linear(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw InvalidInputError("solve_linear: dimension mismatch");
  return checked_lu(A).solve(b);
}

Matrix solve_left(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) throw InvalidInputError("solve_left: dimension mismatch");
  return checked_lu(A).solve(B);
}

Matrix solve_right(const Matrix& B, const Matrix& A) {
  // B A^{-1} = (A^{-T} B^T)^T
  if (A.cols() != B.cols()) throw InvalidInputError("solve_right: dimension mismatch");
  return checked_lu(A.transpose()).solve(B.transpose()).transpose();
}

double spectral_radius(const Matrix& A) {
  if (A.rows() != A.cols()) throw InvalidInputError("spectral_radius: matrix must be square");
  if (A.rows() == 0) return 0.0;
  require_finite(A, "spectral_radius");
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

DareSolution dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  int max_iterations, double tol) {
  const Index n = A.rows();
  const Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw InvalidInputError("dare: dimension mismatch");
  }
  if (!is_symmetric_positive_definite(Q) || !is_symmetric_positive_definite(R)) {
    throw InvalidInputError("dare: Q and R must be symmetric positive definite");
  }

  Matrix P = Q;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (!(P.cwiseAbs().maxCoeff() < 1e150)) {
      throw ConvergenceError("dare: iteration diverged (system stabilizable?)");
    }
    const Matrix BtP = B.transpose() * P;
    const Matrix S = R + BtP * B;
    const Matrix K = solve_left(S, BtP * A);  // (R+B'PB)^{-1} B'PA
    Matrix Pn = Q + A.transpose() * P * A - (BtP * A).transpose() * K;
    Pn = 0.5 * (Pn + Pn.transpose());
    const double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    if (diff <= tol) break;
  }
  if (it == max_iterations) {
    throw ConvergenceError("dare: fixed-point iteration did not converge (system stabilizable?)");
  }

  DareSolution sol;
  sol.P = P;
  const Matrix BtP = B.transpose() * P;
  sol.K_lqr = -solve_left(R + BtP * B, BtP * A);
  sol.iterations = it + 1;

  const Matrix closed = A + B * sol.K_lqr;
  if (spectral_radius(closed) >= 1.0) {
    throw ConvergenceError("dare: closed loop not contractive");
  }
  return sol;
}

std::vector<Matrix> matrix_power_stack(const Matrix& A, int N) {
  if (A.rows() != A.cols()) throw InvalidInputError("matrix_power_stack: matrix must be square");
  if (N < 1) throw InvalidInputError("matrix_power_stack: N must be >= 1");
  std::vector<Matrix> powers;
  powers.reserve(size_t(N));
  powers.push_back(A);
  for (int k = 1; k < N; ++k) powers.push_back(powers.back() * A);
  return powers;
}

bool is_symmetric_positive_definite(const Matrix& M, double sym_tol) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > sym_tol) return false;
  Eigen::LLT<Matrix> llt(0.5 * (M + M.transpose()));
  return llt.info() == Eigen::Success;
}

}  // namespace lipcert
