#include <doctest.h>

#include <random>

#include "lipcert/numkit.hpp"

using namespace lipcert;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Residual of the discrete Riccati equation at P.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& P) {
  const Matrix T = R + B.transpose() * P * B;
  const Matrix rhs = Q + A.transpose() * P * A -
                     A.transpose() * P * B * T.inverse() * B.transpose() * P * A;
  return (P - rhs).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("matrix_pnorm matches hand values") {
  Matrix K(2, 3);
  K << 1, -2, 3, -4, 5, -6;
  CHECK(matrix_pnorm(K, Norm::One) == doctest::Approx(9.0));   // col |3|+|6|
  CHECK(matrix_pnorm(K, Norm::Inf) == doctest::Approx(15.0));  // row |4|+|5|+|6|
  CHECK(matrix_pnorm(Matrix(0, 0), Norm::One) == 0.0);
}

TEST_CASE("solve_linear agrees with Eigen and rejects singular input") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 5;
    Matrix A(n, n);
    Vector b(n);
    do {
      for (Index i = 0; i < n; ++i) {
        b[i] = u(rng);
        for (Index j = 0; j < n; ++j) A(i, j) = u(rng);
      }
    } while (std::abs(A.determinant()) < 1e-3);
    const Vector x = solve_linear(A, b);
    CHECK((A * x - b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((x - A.fullPivLu().solve(b)).cwiseAbs().maxCoeff() < 1e-8);
  }
  Matrix S = mat2(1, 2, 2, 4);  // rank 1
  CHECK_THROWS_AS(solve_linear(S, Vector::Ones(2)), SingularMatrixError);
}

TEST_CASE("solve_left and solve_right are the two-sided inverses") {
  Matrix A = mat2(3, 1, -1, 2);
  Matrix B(2, 2);
  B << 1, 0, 2, 5;
  CHECK((A * solve_left(A, B) - B).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((solve_right(B, A) * A - B).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral_radius on diagonal and rotation-scaled matrices") {
  Matrix D = mat2(0.5, 0, 0, -0.25);
  CHECK(spectral_radius(D) == doctest::Approx(0.5).epsilon(1e-6));
  const double s = 0.9, phi = 0.7;
  Matrix Rot = mat2(std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi));
  CHECK(spectral_radius(s * Rot) == doctest::Approx(s).epsilon(1e-6));
}

TEST_CASE("matrix_power_stack") {
  Matrix A = mat2(1, 1, 0, 1);
  const auto powers = matrix_power_stack(A, 3);
  REQUIRE(powers.size() == 3);
  CHECK((powers[0] - A).cwiseAbs().maxCoeff() == 0.0);
  CHECK(powers[2](0, 1) == doctest::Approx(3.0));  // A^3 upper entry
}

TEST_CASE("is_symmetric_positive_definite") {
  CHECK(is_symmetric_positive_definite(mat2(2, 0.5, 0.5, 1)));
  CHECK_FALSE(is_symmetric_positive_definite(mat2(1, 2, 2, 1)));   // indefinite
  CHECK_FALSE(is_symmetric_positive_definite(mat2(1, 0.2, 0, 1)));  // asymmetric
}

// Reference P, K, and closed-loop spectral radius computed with an
// independent Schur-based Riccati solver.
TEST_CASE("dare reproduces independent reference solutions") {
  struct Fixture {
    Matrix A, B, Q, R, P, K;
    double rho;
  };
  std::vector<Fixture> fixtures;

  {  // double integrator, scalar input
    Fixture f;
    f.A = mat2(1, 1, 0, 1);
    f.B = Matrix(2, 1);
    f.B << 0.5, 1;
    f.Q = Matrix::Identity(2, 2);
    f.R = Matrix::Constant(1, 1, 0.1);
    f.P = mat2(2.059876904316467, 0.5916079783099626, 0.5916079783099626,
               1.4228356217750675);
    f.K = Matrix(1, 2);
    f.K << -0.6166952615172828, -1.2703163262008546;
    f.rho = 0.2904;
    fixtures.push_back(f);
  }
  {  // swap system
    Fixture f;
    f.A = mat2(0, 1, 1, 0);
    f.B = Matrix(2, 1);
    f.B << 2, 4;
    f.Q = Matrix::Identity(2, 2);
    f.R = Matrix::Constant(1, 1, 4.5);
    f.P = mat2(5.0 / 3.0, -5.0 / 6.0, -5.0 / 6.0, 8.0 / 3.0);
    f.K = Matrix(1, 2);
    f.K << -2.0 / 9.0, 0.0;
    f.rho = 0.6228;
    fixtures.push_back(f);
  }
  {  // unstable spiral, two inputs
    Fixture f;
    f.A = mat2(1.1, 0.2, -0.2, 1.1);
    f.B = mat2(0.5, 0, 0, 0.4);
    f.Q = Matrix::Identity(2, 2);
    f.R = 0.1 * Matrix::Identity(2, 2);
    f.P = mat2(1.394823442805946, -0.03200147852973576, -0.03200147852973576,
               1.5504568874830567);
    f.K = mat2(-1.711621965522373, -0.29955900445560935, 0.3653322078204738,
               -1.958089190199389);
    f.rho = 0.2829;
    fixtures.push_back(f);
  }
  {  // 2x unstable, invertible input map
    Fixture f;
    f.A = 2.0 * Matrix::Identity(2, 2);
    f.B = mat2(1, 1, 1, -1);
    f.Q = Matrix::Identity(2, 2);
    f.R = Matrix::Identity(2, 2);
    f.P = 2.6861406616345076 * Matrix::Identity(2, 2);
    f.K = mat2(-0.8430703308172535, -0.8430703308172536, -0.8430703308172535,
               0.8430703308172536);
    f.rho = 0.3139;
    fixtures.push_back(f);
  }
  {  // triple integrator discretization
    Fixture f;
    f.A = Matrix(3, 3);
    f.A << 1, 0.5, 0.125, 0, 1, 0.5, 0, 0, 1;
    f.B = Matrix(3, 1);
    f.B << 0.02, 0.125, 0.5;
    f.Q = Matrix::Identity(3, 3);
    f.R = Matrix::Constant(1, 1, 1.0);
    f.P = Matrix(3, 3);
    f.P << 5.425192699790933, 5.0018807825185, 2.172400344240655,
        5.0018807825185, 10.645213013401744, 5.192202840632019,
        2.172400344240655, 5.192202840632019, 5.7047764740954126;
    f.K = Matrix(1, 3);
    f.K << -0.549468928301328, -1.490487409291158, -1.7468108888535174;
    f.rho = 0.7045;
    fixtures.push_back(f);
  }

  for (const auto& f : fixtures) {
    CAPTURE(f.A);
    const DareSolution sol = dare(f.A, f.B, f.Q, f.R);
    CHECK((sol.P - f.P).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((sol.K_lqr - f.K).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(dare_residual(f.A, f.B, f.Q, f.R, sol.P) < 1e-8);
    CHECK(spectral_radius(f.A + f.B * sol.K_lqr) ==
          doctest::Approx(f.rho).epsilon(1e-3));
  }
}

TEST_CASE("dare rejects unstabilizable data") {
  // x2 is uncontrollable and strictly unstable: no stabilizing solution.
  Matrix A = mat2(1.5, 0, 0, 2.0);
  Matrix B(2, 1);
  B << 1, 0;
  CHECK_THROWS_AS(dare(A, B, Matrix::Identity(2, 2), Matrix::Identity(1, 1)),
                  ConvergenceError);
}
