#pragma once

#include <vector>

#include "lipcert/types.hpp"

namespace lipcert {

/// Induced matrix p-norm for p in {1, inf}: max absolute column sum
/// respectively max absolute row sum.
template <typename Derived>
double matrix_pnorm(const Eigen::MatrixBase<Derived>& K, Norm p) {
  if (K.rows() == 0 || K.cols() == 0) return 0.0;
  if (p == Norm::One) return K.cwiseAbs().colwise().sum().maxCoeff();
  return K.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Solves A x = b by partial-pivot LU. Throws SingularMatrixError when a
/// pivot magnitude falls below 1e-12.
Vector solve_linear(const Matrix& A, const Vector& b);

/// Matrix right-division X = B A^{-1} through the same factorization.
Matrix solve_right(const Matrix& B, const Matrix& A);

/// Matrix left-division X = A^{-1} B.
Matrix solve_left(const Matrix& A, const Matrix& B);

/// Estimate of the spectral radius via normalized repeated squaring
/// (Gelfand's formula evaluated at k = 2^12).
double spectral_radius(const Matrix& A);

struct DareSolution {
  Matrix P;
  Matrix K_lqr;
  int iterations = 0;
};

/// Discrete algebraic Riccati equation solved by fixed-point iteration from
/// P0 = Q. Returns the cost matrix and the LQR gain K = -(R+B'PB)^{-1}B'PA.
/// Throws ConvergenceError when the iteration limit is hit or the closed loop
/// is not contractive.
DareSolution dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  int max_iterations = 10000, double tol = 1e-12);

/// [A^1, A^2, ..., A^N].
std::vector<Matrix> matrix_power_stack(const Matrix& A, int N);

/// True when M is symmetric (1e-8) and its Cholesky factorization succeeds.
bool is_symmetric_positive_definite(const Matrix& M, double sym_tol = 1e-8);

}  // namespace lipcert
