// Shared helpers for the unit and acceptance suites: a random MILP generator
// and an exhaustive-enumeration reference solver.
#pragma once

#include <random>
#include <string>

#include "lipcert/milp.hpp"

namespace testsupport {

using namespace lipcert;

/// Random bounded MILP: `nb` binaries, a few boxed continuous variables,
/// mixed-sense rows with small integer-ish coefficients. Always bounded.
/// Most instances are anchored to a known-feasible point so the suites
/// exercise optimality; a fully random minority covers infeasibility.
inline MilpModel random_milp(std::mt19937& rng, int nb) {
  std::uniform_int_distribution<int> nci(1, 3), nri(2, 6), si(0, 5);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int nc = nci(rng), nr = nri(rng);

  MilpModel m;
  std::vector<Index> vars;
  std::vector<double> anchor;
  for (int i = 0; i < nb; ++i) {
    vars.push_back(m.add_binary("d" + std::to_string(i)));
    anchor.push_back(double(si(rng) % 2));
  }
  for (int i = 0; i < nc; ++i) {
    vars.push_back(m.add_continuous("x" + std::to_string(i), -3.0, 3.0));
    anchor.push_back(std::round(coef(rng) * 2) / 2.0);
  }
  const bool anchored = unit(rng) < 0.7;

  for (int r = 0; r < nr; ++r) {
    std::vector<MilpTerm> terms;
    double at_anchor = 0.0;
    for (size_t k = 0; k < vars.size(); ++k) {
      if (si(rng) < 3) {
        const double c = std::round(coef(rng) * 2) / 2.0;
        terms.push_back({vars[k], c});
        at_anchor += c * anchor[k];
      }
    }
    if (terms.empty()) {
      terms.push_back({vars[0], 1.0});
      at_anchor = anchor[0];
    }
    const int s = si(rng);
    const RowSense sense = s < 3   ? RowSense::LE
                           : s < 5 ? RowSense::GE
                                   : RowSense::EQ;
    double rhs = std::round(coef(rng) * 4) / 2.0;
    if (anchored) {
      const double slack = std::abs(std::round(coef(rng) * 2) / 2.0);
      rhs = sense == RowSense::LE   ? at_anchor + slack
            : sense == RowSense::GE ? at_anchor - slack
                                    : at_anchor;
    }
    m.add_row(std::move(terms), sense, rhs, "r" + std::to_string(r));
  }

  std::vector<MilpTerm> obj;
  for (const Index v : vars) obj.push_back({v, coef(rng)});
  m.set_objective(si(rng) < 3 ? ObjSense::Maximize : ObjSense::Minimize,
                  std::move(obj));
  return m;
}

struct EnumResult {
  bool feasible = false;
  double objective = 0.0;  // model sense
};

/// Reference optimum: try every binary assignment, solve the LP that remains.
inline EnumResult enumerate_reference(const MilpModel& model) {
  std::vector<Index> bins;
  for (Index j = 0; j < model.num_vars(); ++j) {
    if (model.variables()[static_cast<size_t>(j)].kind == VarKind::Binary) {
      bins.push_back(j);
    }
  }
  EnumResult out;
  const bool maximize = model.objective_sense() == ObjSense::Maximize;
  for (long mask = 0; mask < (1L << bins.size()); ++mask) {
    MilpModel fixed = model;
    for (size_t k = 0; k < bins.size(); ++k) {
      const double v = (mask >> k) & 1 ? 1.0 : 0.0;
      fixed.set_bounds(bins[k], v, v);
    }
    const LpResult res = lp_relax_solve(fixed);
    if (res.status != LpStatus::Optimal) continue;
    if (!out.feasible || (maximize ? res.objective > out.objective
                                   : res.objective < out.objective)) {
      out.objective = res.objective;
    }
    out.feasible = true;
  }
  return out;
}

}  // namespace testsupport
