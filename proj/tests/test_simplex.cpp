#include <doctest.h>

#include <random>

#include "lipcert/simplex.hpp"

using namespace lipcert;

namespace {

LpProblem make_lp(Index rows, Index cols) {
  LpProblem lp;
  lp.A = Matrix::Zero(rows, cols);
  lp.sense.assign(static_cast<size_t>(rows), RowSense::LE);
  lp.b = Vector::Zero(rows);
  lp.cost = Vector::Zero(cols);
  lp.lower = Vector::Zero(cols);
  lp.upper = Vector::Constant(cols, kInf);
  return lp;
}

}  // namespace

TEST_CASE("two-variable LP with a known vertex optimum") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0  ->  (8/5, 6/5).
  LpProblem lp = make_lp(2, 2);
  lp.A << 1, 2, 3, 1;
  lp.b << 4, 6;
  lp.cost << -1, -1;  // minimize the negative
  const LpResult res = lp_solve(lp);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.objective == doctest::Approx(-14.0 / 5.0));
  CHECK(res.x[0] == doctest::Approx(8.0 / 5.0));
  CHECK(res.x[1] == doctest::Approx(6.0 / 5.0));
}

TEST_CASE("equality and GE rows") {
  // min x + y s.t. x + y = 2, x - y >= 1, 0 <= x,y <= 5  ->  obj 2.
  LpProblem lp = make_lp(2, 2);
  lp.A << 1, 1, 1, -1;
  lp.sense = {RowSense::EQ, RowSense::GE};
  lp.b << 2, 1;
  lp.cost << 1, 1;
  lp.upper = Vector::Constant(2, 5.0);
  const LpResult res = lp_solve(lp);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.objective == doctest::Approx(2.0));
  CHECK(res.x[0] - res.x[1] >= 1.0 - 1e-9);
}

TEST_CASE("bounded variables off zero") {
  // min -x with -3 <= x <= -1: optimum at the upper bound -1.
  LpProblem lp = make_lp(1, 1);
  lp.A << 1;
  lp.b << 100;
  lp.cost << -1;
  lp.lower << -3;
  lp.upper << -1;
  const LpResult res = lp_solve(lp);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.x[0] == doctest::Approx(-1.0));
}

TEST_CASE("free variables through an equality row") {
  // min y s.t. y >= x - 1, y >= -x - 1, x free  ->  y = -1 at x = 0... the
  // rows force y >= |x| - 1, so the optimum is y = -1.
  LpProblem lp = make_lp(2, 2);
  lp.A << -1, 1, 1, 1;  // -x + y >= -1, x + y >= -1
  lp.sense = {RowSense::GE, RowSense::GE};
  lp.b << -1, -1;
  lp.cost << 0, 1;
  lp.lower = Vector::Constant(2, -kInf);
  lp.upper = Vector::Constant(2, kInf);
  const LpResult res = lp_solve(lp);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.objective == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded detection") {
  LpProblem bad = make_lp(2, 1);
  bad.A << 1, -1;
  bad.b << 1, -2;  // x <= 1 and x >= 2
  bad.cost << 1;
  CHECK(lp_solve(bad).status == LpStatus::Infeasible);

  LpProblem unb = make_lp(1, 1);
  unb.A << 0;
  unb.b << 0;
  unb.cost << -1;  // minimize -x, x unbounded above
  CHECK(lp_solve(unb).status == LpStatus::Unbounded);
}

TEST_CASE("duals satisfy strong duality on inequality LPs") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Index nr = 2 + trial % 4, nc = 1 + trial % 3;
    LpProblem lp = make_lp(nr, nc);
    for (Index i = 0; i < nr; ++i) {
      for (Index j = 0; j < nc; ++j) lp.A(i, j) = u(rng);
      lp.b[i] = 1.0 + std::abs(u(rng));  // origin strictly feasible
    }
    for (Index j = 0; j < nc; ++j) lp.cost[j] = u(rng);
    lp.lower = Vector::Constant(nc, -2.0);
    lp.upper = Vector::Constant(nc, 2.0);
    const LpResult res = lp_solve(lp);
    REQUIRE(res.status == LpStatus::Optimal);
    REQUIRE(res.row_duals.size() == nr);
    // Lagrangian bound: obj == y'b + sum over variables of the bound term
    // min(d_j lo_j, d_j hi_j) with d = c - A'y, and y <= 0 for LE rows in
    // minimize form.
    const Vector d = lp.cost - lp.A.transpose() * res.row_duals;
    double bound = res.row_duals.dot(lp.b);
    for (Index j = 0; j < nc; ++j) {
      bound += std::min(d[j] * lp.lower[j], d[j] * lp.upper[j]);
    }
    CHECK(res.objective == doctest::Approx(bound).epsilon(1e-7));
    for (Index i = 0; i < nr; ++i) CHECK(res.row_duals[i] <= 1e-9);
  }
}

TEST_CASE("warm restart after a bound change matches a fresh solve") {
  LpProblem lp = make_lp(2, 2);
  lp.A << 1, 1, 1, -1;
  lp.b << 2, 1;
  lp.cost << -1, -0.5;
  lp.upper = Vector::Constant(2, 10.0);

  detail::SimplexEngine engine(lp);
  REQUIRE(engine.solve_primal() == LpStatus::Optimal);
  const double first = engine.objective();

  engine.set_var_bounds(0, 0.0, 0.25);  // tighten x
  REQUIRE(engine.reoptimize() == LpStatus::Optimal);

  LpProblem tight = lp;
  tight.upper[0] = 0.25;
  const LpResult fresh = lp_solve(tight);
  REQUIRE(fresh.status == LpStatus::Optimal);
  CHECK(engine.objective() == doctest::Approx(fresh.objective).epsilon(1e-9));
  CHECK(engine.objective() >= first - 1e-9);  // tightening cannot improve

  engine.set_var_bounds(0, 0.0, 10.0);  // relax back
  REQUIRE(engine.reoptimize() == LpStatus::Optimal);
  CHECK(engine.objective() == doctest::Approx(first).epsilon(1e-9));
}

TEST_CASE("basis snapshot save and restore") {
  LpProblem lp = make_lp(2, 2);
  lp.A << 1, 2, 2, 1;
  lp.b << 3, 3;
  lp.cost << -1, -1;
  lp.upper = Vector::Constant(2, 5.0);
  detail::SimplexEngine engine(lp);
  REQUIRE(engine.solve_primal() == LpStatus::Optimal);
  const auto snap = engine.save_basis();
  const double obj = engine.objective();

  engine.set_var_bounds(1, 0.0, 0.1);
  REQUIRE(engine.reoptimize() == LpStatus::Optimal);
  CHECK(engine.objective() != doctest::Approx(obj));

  engine.set_var_bounds(1, 0.0, 5.0);
  engine.restore_basis(snap);
  REQUIRE(engine.reoptimize() == LpStatus::Optimal);
  CHECK(engine.objective() == doctest::Approx(obj).epsilon(1e-9));
}
