#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "lipcert/numkit.hpp"
#include "lipcert/oracle.hpp"
#include "lipcert/problem_io.hpp"

using namespace lipcert;

namespace {

MpcProblem toy_problem() {
  MpcProblem p;
  p.name = "toy";
  p.A = Matrix::Constant(1, 1, 1.0);
  p.B = Matrix::Constant(1, 1, 1.0);
  p.Q = Matrix::Constant(1, 1, 1.0);
  p.R = Matrix::Constant(1, 1, 1.0);
  p.P = Matrix::Constant(1, 1, 1.0);
  p.N = 1;
  p.X = Polytope::symmetric_box(Vector::Constant(1, 1.0));
  p.U_set = Polytope::symmetric_box(Vector::Constant(1, 1.0));
  return p;
}

/// Scalar problem whose law saturates: u = clamp(-0.99x, +-0.2).
MpcProblem saturating_problem() {
  MpcProblem p = toy_problem();
  p.R = Matrix::Constant(1, 1, 0.01 / 2.0);
  p.P = Matrix::Constant(1, 1, 1.0);
  p.Q = Matrix::Constant(1, 1, 1.0);
  p.U_set = Polytope::symmetric_box(Vector::Constant(1, 0.2));
  // H = 2(1 + 0.005) = 2.01, F = 2: unconstrained gain -2/2.01 = -0.995.
  return p;
}

Vector vec1(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("toy QP solution is the unconstrained optimum inside the box") {
  const CondensedQp qp = condense(toy_problem());
  const QpSolution sol = qp_solve(qp, vec1(1.0));
  REQUIRE(sol.feasible);
  CHECK(sol.U[0] == doctest::Approx(-0.5));
  CHECK(sol.active_set.empty());
  CHECK(sol.lambda.cwiseAbs().maxCoeff() == 0.0);

  CHECK_FALSE(qp_solve(qp, vec1(1.5)).feasible);  // outside the state box
}

TEST_CASE("saturating law activates the input bound") {
  const CondensedQp qp = condense(saturating_problem());
  const QpSolution inner = qp_solve(qp, vec1(0.1));
  REQUIRE(inner.feasible);
  CHECK(inner.U[0] == doctest::Approx(-0.1 * 2.0 / 2.01).epsilon(1e-9));
  CHECK(inner.active_set.empty());

  const QpSolution sat = qp_solve(qp, vec1(0.9));
  REQUIRE(sat.feasible);
  CHECK(sat.U[0] == doctest::Approx(-0.2));
  REQUIRE(sat.active_set.size() == 1);
  // The active row is the lower input bound -u <= 0.2 (row 3).
  CHECK(qp.row_tags[size_t(sat.active_set[0])].kind == RowKind::Input);
  CHECK(sat.lambda[sat.active_set[0]] > 0.0);
}

TEST_CASE("QP solutions satisfy the KKT system on a bundled problem") {
  const CondensedQp qp = condense(bundled_system("system1").problem);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(-25.0, 25.0), uv(-5.0, 5.0);
  int feasible = 0;
  for (int k = 0; k < 60; ++k) {
    Vector x(2);
    x << ux(rng), uv(rng);
    const QpSolution sol = qp_solve(qp, x);
    if (!sol.feasible) continue;
    ++feasible;
    // Primal feasibility.
    const Vector slack = qp.E * x + qp.d - qp.G * sol.U;
    CHECK(slack.minCoeff() > -1e-7);
    // Stationarity and sign of the multipliers.
    const Vector grad =
        qp.H * sol.U + qp.F * x + qp.G.transpose() * sol.lambda;
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(sol.lambda.minCoeff() >= 0.0);
    // Complementarity over the reported active set.
    for (const Index i : sol.active_set) {
      CHECK(std::abs(slack[i]) < 1e-6);
    }
  }
  CHECK(feasible > 20);
}

TEST_CASE("local_gain closed forms") {
  const CondensedQp qp = condense(saturating_problem());
  Matrix K;
  Vector b;

  local_gain(qp, {}, &K, &b);
  CHECK(K(0, 0) == doctest::Approx(-2.0 / 2.01));
  CHECK(b[0] == doctest::Approx(0.0));

  // Saturated segment: u pinned at -0.2, zero gain.
  const QpSolution sat = qp_solve(qp, vec1(0.9));
  REQUIRE(sat.active_set.size() == 1);
  local_gain(qp, sat.active_set, &K, &b);
  CHECK(K(0, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(b[0] == doctest::Approx(-0.2));

  // A state-0 row (zero G block) cannot define a gain segment.
  CHECK_THROWS_AS(local_gain(qp, {0}, &K, &b), InvalidInputError);
  // Out-of-range rows are rejected.
  CHECK_THROWS_AS(local_gain(qp, {qp.q()}, &K, &b), InvalidInputError);
}

TEST_CASE("grid census separates the saturated and linear segments") {
  const CondensedQp qp = condense(saturating_problem());
  const Polytope domain = Polytope::symmetric_box(Vector::Constant(1, 1.0));
  const GridResult grid = grid_lipschitz(qp, domain, 201, Norm::One);
  CHECK(grid.map.size() == 201);  // every sample is feasible
  REQUIRE(grid.census.size() == 3);
  CHECK(grid.L_lower == doctest::Approx(2.0 / 2.01));
  // Census in first-appearance order: left saturation, middle, right.
  CHECK(grid.map.front().gain_norm == doctest::Approx(0.0).scale(1.0));
  CHECK(grid.map[100].gain_norm == doctest::Approx(2.0 / 2.01));
}

TEST_CASE("toy grid sees one linear segment") {
  const CondensedQp qp = condense(toy_problem());
  const GridResult grid =
      grid_lipschitz(qp, Polytope::symmetric_box(Vector::Constant(1, 1.0)),
                     101, Norm::Inf);
  CHECK(grid.map.size() == 101);
  REQUIRE(grid.census.size() == 1);
  CHECK(grid.L_lower == doctest::Approx(0.5));
  CHECK(grid.census[0].active_set.empty());
}

TEST_CASE("grid sweep is deterministic and thread-count independent") {
  const CondensedQp qp = condense(bundled_system("system3").problem);
  const Polytope domain = bundled_system("system3").problem.X;
  const GridResult a = grid_lipschitz(qp, domain, 41, Norm::One, 1);
  const GridResult b = grid_lipschitz(qp, domain, 41, Norm::One, 4);
  CHECK(a.L_lower == b.L_lower);
  REQUIRE(a.map.size() == b.map.size());
  REQUIRE(a.census.size() == b.census.size());
  for (size_t i = 0; i < a.map.size(); ++i) {
    CHECK(a.map[i].segment_id == b.map[i].segment_id);
    CHECK(a.map[i].x == b.map[i].x);
  }
}

TEST_CASE("gain map CSV has a header and one line per feasible sample") {
  const CondensedQp qp = condense(toy_problem());
  const GridResult grid = grid_lipschitz(
      qp, Polytope::symmetric_box(Vector::Constant(1, 1.0)), 11, Norm::One);
  const std::string path = "oracle_test_map.csv";
  write_gain_map_csv(grid, 1, 1, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,segment_id,gain_norm,u1");
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 11);
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("grid oracle on 3-state systems stays within the guard") {
  const MpcProblem prob = bundled_system("system5").problem;
  const CondensedQp qp = condense(prob);
  const GridResult grid = grid_lipschitz(qp, prob.X, 9, Norm::Inf, 2);
  CHECK(grid.map.size() > 0);
  CHECK(grid.map.size() <= 9 * 9 * 9);
  CHECK(grid.L_lower > 0.0);

  CHECK_THROWS_AS(grid_lipschitz(qp, prob.X, 1, Norm::One), InvalidInputError);
}
