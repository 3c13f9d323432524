#include "lipcert/milp.hpp"

#include <cstdio>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace lipcert {

std::string to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::Unbounded: return "unbounded";
    case MilpStatus::NodeLimit: return "node-limit";
    case MilpStatus::TimeLimit: return "time-limit";
    case MilpStatus::Cutoff: return "cutoff";
  }
  return "unknown";
}

Index MilpModel::add_variable(std::string name, VarKind kind, double lower,
                              double upper) {
  if (kind == VarKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  vars_.push_back(MilpVariable{std::move(name), kind, lower, upper});
  return Index(vars_.size()) - 1;
}

Index MilpModel::add_continuous(std::string name, double lower, double upper) {
  return add_variable(std::move(name), VarKind::Continuous, lower, upper);
}

Index MilpModel::add_binary(std::string name) {
  return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0);
}

void MilpModel::add_row(std::vector<MilpTerm> terms, RowSense sense, double rhs,
                        std::string name) {
  rows_.push_back(MilpRow{std::move(name), std::move(terms), sense, rhs});
}

void MilpModel::set_objective(ObjSense sense, std::vector<MilpTerm> terms) {
  obj_sense_ = sense;
  obj_terms_ = std::move(terms);
}

void MilpModel::set_bounds(Index var, double lower, double upper) {
  if (var < 0 || var >= num_vars()) {
    throw InvalidInputError("milp: bad variable index in set_bounds");
  }
  vars_[size_t(var)].lower = lower;
  vars_[size_t(var)].upper = upper;
}

void MilpModel::set_kind(Index var, VarKind kind) {
  if (var < 0 || var >= num_vars()) {
    throw InvalidInputError("milp: bad variable index in set_kind");
  }
  vars_[size_t(var)].kind = kind;
}

Index MilpModel::num_binaries() const {
  Index n = 0;
  for (const auto& v : vars_) {
    if (v.kind == VarKind::Binary) ++n;
  }
  return n;
}

Index MilpModel::find_variable(const std::string& name) const {
  for (size_t j = 0; j < vars_.size(); ++j) {
    if (vars_[j].name == name) return Index(j);
  }
  return -1;
}

void MilpModel::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& v : vars_) {
    if (v.name.empty()) throw InvalidInputError("milp: unnamed variable");
    if (!seen.insert(v.name).second) {
      throw InvalidInputError("milp: duplicate variable name '" + v.name + "'");
    }
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw InvalidInputError("milp: bad bounds on '" + v.name + "'");
    }
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw InvalidInputError("milp: binary '" + v.name + "' outside [0,1]");
    }
  }
  auto check_terms = [&](const std::vector<MilpTerm>& terms, const char* where) {
    for (const auto& t : terms) {
      if (t.var < 0 || t.var >= num_vars()) {
        throw InvalidInputError(std::string("milp: bad variable index in ") + where);
      }
      if (!std::isfinite(t.coef)) {
        throw InvalidInputError(std::string("milp: non-finite coefficient in ") + where);
      }
    }
  };
  for (const auto& r : rows_) {
    check_terms(r.terms, "row");
    if (!std::isfinite(r.rhs)) throw InvalidInputError("milp: non-finite rhs");
  }
  check_terms(obj_terms_, "objective");
  if (obj_sense_ == ObjSense::Feasibility && !obj_terms_.empty()) {
    throw InvalidInputError("milp: feasibility objective must have no terms");
  }
}

double MilpSolution::value_of(const MilpModel& model,
                              const std::string& name) const {
  const Index j = model.find_variable(name);
  if (j < 0) throw InvalidInputError("milp: unknown variable '" + name + "'");
  if (!has_assignment || j >= values.size()) {
    throw InvalidInputError("milp: no assignment available");
  }
  return values[j];
}

LpProblem to_lp_problem(const MilpModel& model) {
  model.validate();
  const Index n = model.num_vars();
  const Index m = model.num_rows();
  LpProblem lp;
  lp.A = Matrix::Zero(m, n);
  lp.b = Vector::Zero(m);
  lp.sense.resize(size_t(m));
  lp.cost = Vector::Zero(n);
  lp.lower = Vector::Zero(n);
  lp.upper = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    lp.lower[j] = model.variables()[size_t(j)].lower;
    lp.upper[j] = model.variables()[size_t(j)].upper;
  }
  for (Index i = 0; i < m; ++i) {
    const MilpRow& r = model.rows()[size_t(i)];
    for (const auto& t : r.terms) lp.A(i, t.var) += t.coef;
    lp.sense[size_t(i)] = r.sense;
    lp.b[i] = r.rhs;
  }
  const double sign = model.objective_sense() == ObjSense::Maximize ? -1.0 : 1.0;
  if (model.objective_sense() != ObjSense::Feasibility) {
    for (const auto& t : model.objective_terms()) lp.cost[t.var] += sign * t.coef;
  }
  return lp;
}

LpResult lp_relax_solve(const MilpModel& model) {
  LpResult res = lp_solve(to_lp_problem(model));
  if (model.objective_sense() == ObjSense::Maximize) {
    res.objective = -res.objective;
  }
  return res;
}

namespace {

struct BnbNode {
  Index fix_var = -1;  // -1 at the root
  char fix_val = 0;
  std::shared_ptr<const BnbNode> parent;
  double bound = -kInf;  // internal (minimization) LP bound inherited at creation
  long seq = 0;
};

struct NodeOrder {
  // Best-bound first (smallest internal bound). Ties are FIFO for
  // optimization models; feasibility models have identical bounds
  // everywhere, where FIFO degenerates into breadth-first search, so they
  // dive LIFO instead to reach integral leaves quickly.
  bool dive_on_ties = false;
  bool operator()(const std::shared_ptr<const BnbNode>& a,
                  const std::shared_ptr<const BnbNode>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return dive_on_ties ? a->seq < b->seq : a->seq > b->seq;
  }
};

void collect_fixings(const BnbNode* node, std::vector<std::pair<Index, char>>* out) {
  out->clear();
  for (const BnbNode* n = node; n != nullptr && n->fix_var >= 0; n = n->parent.get()) {
    out->emplace_back(n->fix_var, n->fix_val);
  }
}

}  // namespace

MilpSolution milp_solve(const MilpModel& model, const MilpOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  LpProblem lp = to_lp_problem(model);
  const double sense_sign =
      model.objective_sense() == ObjSense::Maximize ? -1.0 : 1.0;
  auto to_model_sense = [&](double internal) { return sense_sign * internal; };

  std::vector<Index> binaries;
  for (Index j = 0; j < model.num_vars(); ++j) {
    if (model.variables()[size_t(j)].kind == VarKind::Binary) binaries.push_back(j);
  }

  detail::SimplexEngine engine(lp);
  MilpSolution out;

  const LpStatus root = engine.solve_primal(true);
  out.lp_iterations = engine.iterations_used();
  if (root == LpStatus::Infeasible) {
    out.status = MilpStatus::Infeasible;
    out.nodes = 1;
    out.wall_seconds = elapsed();
    return out;
  }
  if (root == LpStatus::Unbounded) {
    out.status = MilpStatus::Unbounded;
    out.nodes = 1;
    out.wall_seconds = elapsed();
    return out;
  }
  if (root != LpStatus::Optimal) {
    throw ConvergenceError("milp: root LP hit the iteration limit");
  }

  double incumbent = kInf;  // internal sense
  Vector incumbent_values;
  bool have_incumbent = false;
  double best_bound_internal = engine.objective();

  auto gap_eps = [&] {
    return opts.rel_gap * std::max(1.0, std::abs(incumbent));
  };

  NodeOrder order;
  order.dive_on_ties = model.objective_sense() == ObjSense::Feasibility;
  std::priority_queue<std::shared_ptr<const BnbNode>,
                      std::vector<std::shared_ptr<const BnbNode>>, NodeOrder>
      queue(order);
  long seq_counter = 0;
  auto root_node = std::make_shared<BnbNode>();
  root_node->bound = engine.objective();
  root_node->seq = seq_counter++;
  queue.push(root_node);

  std::vector<std::pair<Index, char>> fixings, applied;
  MilpStatus final_status = MilpStatus::Optimal;
  bool stopped_early = false;

  while (!queue.empty()) {
    if (out.nodes >= opts.node_limit) {
      final_status = MilpStatus::NodeLimit;
      stopped_early = true;
      break;
    }
    if (std::isfinite(opts.time_limit_seconds) &&
        elapsed() > opts.time_limit_seconds) {
      final_status = MilpStatus::TimeLimit;
      stopped_early = true;
      break;
    }

    auto node = queue.top();
    queue.pop();
    if (have_incumbent && node->bound >= incumbent - gap_eps()) continue;
    best_bound_internal = node->bound;

    // Swap the engine's variable bounds from the previous node to this one.
    collect_fixings(node.get(), &fixings);
    for (const auto& [var, val] : applied) {
      engine.set_var_bounds(var, model.variables()[size_t(var)].lower,
                            model.variables()[size_t(var)].upper);
    }
    for (const auto& [var, val] : fixings) {
      engine.set_var_bounds(var, double(val), double(val));
    }
    applied = fixings;

    const long it_before = engine.iterations_used();
    LpStatus st = node->fix_var < 0
                      ? LpStatus::Optimal  // root LP already solved above
                      : engine.reoptimize();
    out.lp_iterations += engine.iterations_used() - it_before;
    ++out.nodes;
#ifdef LIPCERT_MILP_TRACE
    if (engine.iterations_used() - it_before > 5000 || st == LpStatus::IterLimit) {
      std::fprintf(stderr, "TRACE node %ld st=%d iters=%ld depth=%zu\n", out.nodes,
                   int(st), engine.iterations_used() - it_before, fixings.size());
    }
    if (st == LpStatus::IterLimit) {
      LpProblem dump = lp;
      for (const auto& [var, val] : fixings) {
        dump.lower[var] = double(val);
        dump.upper[var] = double(val);
      }
      FILE* f = std::fopen("/tmp/stall_lp.txt", "w");
      std::fprintf(f, "%ld %ld\n", long(dump.rows()), long(dump.cols()));
      for (Index i = 0; i < dump.rows(); ++i) {
        for (Index j = 0; j < dump.cols(); ++j) std::fprintf(f, "%.17g ", dump.A(i, j));
        std::fprintf(f, "\n");
      }
      for (Index i = 0; i < dump.rows(); ++i) std::fprintf(f, "%d ", int(dump.sense[size_t(i)]));
      std::fprintf(f, "\n");
      for (Index i = 0; i < dump.rows(); ++i) std::fprintf(f, "%.17g ", dump.b[i]);
      std::fprintf(f, "\n");
      for (Index j = 0; j < dump.cols(); ++j) std::fprintf(f, "%.17g ", dump.cost[j]);
      std::fprintf(f, "\n");
      for (Index j = 0; j < dump.cols(); ++j) std::fprintf(f, "%.17g ", dump.lower[j]);
      std::fprintf(f, "\n");
      for (Index j = 0; j < dump.cols(); ++j) std::fprintf(f, "%.17g ", dump.upper[j]);
      std::fprintf(f, "\n");
      std::fclose(f);
      std::fprintf(stderr, "TRACE dumped /tmp/stall_lp.txt\n");
    }
#endif

    if (st == LpStatus::Infeasible) continue;
    if (st != LpStatus::Optimal) {
      throw ConvergenceError("milp: node LP did not converge");
    }
    const double bound = engine.objective();
    if (have_incumbent && bound >= incumbent - gap_eps()) continue;

    // Most-fractional binary, lowest index on ties.
    Index branch_var = -1;
    double worst_frac = opts.integer_tol;
    for (const Index j : binaries) {
      const double v = engine.value_of(j);
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > worst_frac + 1e-12) {
        worst_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      // Integral: new incumbent.
      if (bound < incumbent) {
        incumbent = bound;
        incumbent_values = engine.solution();
        have_incumbent = true;
        if (to_model_sense(incumbent) > opts.cutoff_above) {
          final_status = MilpStatus::Cutoff;
          stopped_early = true;
          break;
        }
      }
      continue;
    }

    for (char val : {char(0), char(1)}) {
      auto child = std::make_shared<BnbNode>();
      child->fix_var = branch_var;
      child->fix_val = val;
      child->parent = node;
      child->bound = bound;
      child->seq = seq_counter++;
      queue.push(child);
    }
  }

  if (!stopped_early) {
    final_status = have_incumbent ? MilpStatus::Optimal : MilpStatus::Infeasible;
    best_bound_internal = incumbent;
  } else if (!queue.empty()) {
    // Remaining open nodes cap how good the true optimum could still be.
    best_bound_internal = std::min(best_bound_internal, queue.top()->bound);
  }

  out.status = final_status;
  out.has_assignment = have_incumbent;
  if (have_incumbent) {
    out.objective = to_model_sense(incumbent);
    out.values = incumbent_values;
  }
  out.best_bound = to_model_sense(best_bound_internal);
  out.wall_seconds = elapsed();
  return out;
}

}  // namespace lipcert
