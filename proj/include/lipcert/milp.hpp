#pragma once

#include <string>
#include <vector>

#include "lipcert/simplex.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

enum class VarKind { Continuous, Binary };
enum class ObjSense { Minimize, Maximize, Feasibility };

enum class MilpStatus {
  Optimal,
  Infeasible,
  Unbounded,
  NodeLimit,
  TimeLimit,
  Cutoff,  // stopped early because an incumbent beat opts.cutoff_above
};

std::string to_string(MilpStatus s);

struct MilpVariable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct MilpTerm {
  Index var = 0;
  double coef = 0.0;
};

struct MilpRow {
  std::string name;
  std::vector<MilpTerm> terms;
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
};

/// Sparse mixed-integer linear program with named variables.
class MilpModel {
 public:
  Index add_variable(std::string name, VarKind kind, double lower, double upper);
  Index add_continuous(std::string name, double lower, double upper);
  Index add_free(std::string name) { return add_continuous(std::move(name), -kInf, kInf); }
  Index add_binary(std::string name);

  void add_row(std::vector<MilpTerm> terms, RowSense sense, double rhs,
               std::string name = "");
  void set_objective(ObjSense sense, std::vector<MilpTerm> terms);

  void set_bounds(Index var, double lower, double upper);
  void set_kind(Index var, VarKind kind);

  Index num_vars() const { return Index(vars_.size()); }
  Index num_rows() const { return Index(rows_.size()); }
  Index num_binaries() const;
  const std::vector<MilpVariable>& variables() const { return vars_; }
  const std::vector<MilpRow>& rows() const { return rows_; }
  ObjSense objective_sense() const { return obj_sense_; }
  const std::vector<MilpTerm>& objective_terms() const { return obj_terms_; }

  Index find_variable(const std::string& name) const;  // -1 when absent

  /// Throws InvalidInputError on malformed models (bad indices, reversed or
  /// non-finite-where-required bounds, binaries outside [0,1], duplicate
  /// variable names).
  void validate() const;

 private:
  std::vector<MilpVariable> vars_;
  std::vector<MilpRow> rows_;
  ObjSense obj_sense_ = ObjSense::Feasibility;
  std::vector<MilpTerm> obj_terms_;
};

struct MilpOptions {
  long node_limit = 50'000'000;
  double time_limit_seconds = kInf;
  double rel_gap = 1e-9;       // |incumbent - bound| <= rel_gap * max(1,|incumbent|)
  double integer_tol = 1e-6;
  double cutoff_above = kInf;  // early stop once the incumbent (in the model's
                               // own sense) strictly exceeds this value
};

struct MilpSolution {
  MilpStatus status = MilpStatus::NodeLimit;
  bool has_assignment = false;
  double objective = 0.0;   // model sense
  double best_bound = 0.0;  // model sense
  Vector values;            // by variable index; empty unless has_assignment
  long nodes = 0;
  long lp_iterations = 0;
  double wall_seconds = 0.0;

  double value_of(const MilpModel& model, const std::string& name) const;
};

/// Deterministic serial branch-and-bound: best-bound node selection (FIFO on
/// ties for optimization, depth-first on ties for pure feasibility models),
/// most-fractional branching (lowest index on ties), warm-started dual
/// simplex per node.
MilpSolution milp_solve(const MilpModel& model, const MilpOptions& opts = {});

/// The LP relaxation of `model` as a bounded-variable LP (binaries become
/// continuous on their bounds).
LpProblem to_lp_problem(const MilpModel& model);

/// Solve the LP relaxation only. Objective is reported in the model's sense.
LpResult lp_relax_solve(const MilpModel& model);

/// CPLEX-style LP text format, for cross-checking against external solvers.
void export_lp_file(const MilpModel& model, const std::string& path);
std::string to_lp_string(const MilpModel& model);
MilpModel read_lp_file(const std::string& path);
MilpModel parse_lp_string(const std::string& text);

}  // namespace lipcert
