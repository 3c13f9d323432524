// lipcert command line: certify | reduce | oracle | benchmark | export.
//
// Exit codes: 0 every requested computation reached optimal, 1 input error,
// 2 a computation was inconclusive (node/time limit).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lipcert/certify.hpp"
#include "lipcert/condense.hpp"
#include "lipcert/milp.hpp"
#include "lipcert/numkit.hpp"
#include "lipcert/oracle.hpp"
#include "lipcert/problem_io.hpp"
#include "lipcert/report.hpp"

namespace {

using namespace lipcert;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInconclusive = 2;

/// Worker budget: hardware concurrency capped by LIPCERT_THREADS.
int worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  int threads = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("LIPCERT_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) threads = std::min(threads, cap);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring non-numeric LIPCERT_THREADS\n";
    }
  }
  return threads;
}

std::vector<Norm> parse_norms(const std::string& s) {
  if (s == "1") return {Norm::One};
  if (s == "inf") return {Norm::Inf};
  if (s == "both") return {Norm::One, Norm::Inf};
  throw InvalidInputError("--norm must be one of 1, inf, both");
}

/// A path on disk, or the name of a bundled benchmark system.
ProblemFile load_or_bundled(const std::string& arg) {
  if (std::filesystem::exists(arg)) return load_problem_file(arg);
  const std::string stem = std::filesystem::path(arg).stem().string();
  for (const auto& [name, pf] : bundled_systems()) {
    if (name == stem) return pf;
  }
  throw InvalidInputError("cannot open problem file: " + arg +
                          " (not a file or bundled system)");
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write: " + path);
  out << text;
}

struct CommonFlags {
  std::string norm = "both";
  bool no_reduction = false;
  bool no_symmetry = false;
  bool parallel_conservative = false;
  bool deterministic = true;
  double time_limit = 0.0;  // seconds; 0 = use the problem file's value
  std::string export_lp;
  std::string json_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags* f, bool with_pipeline) {
  cmd->add_option("--norm", f->norm, "Which induced norm: 1, inf, both")
      ->check(CLI::IsMember({"1", "inf", "both"}));
  cmd->add_option("--json", f->json_path,
                  "Write a machine-readable JSON report to this path ('-' for stdout)");
  cmd->add_flag("--deterministic,!--no-deterministic", f->deterministic,
                "Omit wall-clock fields from JSON so repeated runs are byte-identical (default on)");
  if (with_pipeline) {
    cmd->add_flag("--no-reduction", f->no_reduction,
                  "Skip the constraint-exclusion preprocessing");
    cmd->add_flag("--no-symmetry", f->no_symmetry,
                  "Ignore symmetry tuples and the fundamental domain");
    cmd->add_flag("--parallel-conservative", f->parallel_conservative,
                  "Check exclusion rows in parallel against the unreduced problem");
    cmd->add_option("--export-lp", f->export_lp,
                    "Dump every constructed MILP in LP format into this directory");
    cmd->add_option("--time-limit", f->time_limit,
                    "Final-MILP time limit in seconds (overrides the problem file)");
  }
}

CertifyOptions make_certify_options(const ProblemFile& pf, const CommonFlags& f) {
  CertifyOptions o;
  o.use_reduction = !f.no_reduction;
  o.use_symmetry = !f.no_symmetry;
  o.cfg.lambda_bar = pf.options.lambda_bar;
  o.cfg.r_bar = pf.options.r_bar;
  o.cfg.gain_m = pf.options.big_m;
  o.time_limit_seconds = f.time_limit > 0 ? f.time_limit : pf.options.time_limit;
  o.reduce.parallel = f.parallel_conservative;
  o.reduce.threads = f.parallel_conservative ? worker_threads() : 1;
  o.export_lp_dir = f.export_lp;
  return o;
}

int cmd_certify(const std::string& file, const CommonFlags& f) {
  const ProblemFile pf = load_or_bundled(file);
  std::vector<RunReport> runs;
  bool inconclusive = false;
  for (Norm p : parse_norms(f.norm)) {
    const LipschitzResult res =
        compute_lipschitz(pf.problem, p, make_certify_options(pf, f));
    inconclusive = inconclusive || res.status != CertifyStatus::Optimal;
    runs.push_back(make_run_report(pf.problem.name, res));
  }
  print_report_table(std::cout, runs, !f.deterministic);
  if (!f.json_path.empty()) {
    write_text(f.json_path, report_to_json(runs, f.deterministic));
  }
  return inconclusive ? kExitInconclusive : kExitOk;
}

const char* to_string(RowVerdict v) {
  switch (v) {
    case RowVerdict::Kept: return "kept";
    case RowVerdict::ExcludedInfeasible: return "excluded-infeasible";
    case RowVerdict::ExcludedZeroGain: return "excluded-zero-gain";
  }
  return "?";
}

int cmd_reduce(const std::string& file, const CommonFlags& f) {
  const ProblemFile pf = load_or_bundled(file);
  const MpcProblem& prob = pf.problem;
  prob.validate();
  CondensedQp qp = condense(prob);

  if (!f.no_symmetry && !prob.symmetries.empty() && prob.x_fun.has_value()) {
    for (const auto& t : prob.symmetries) {
      if (!verify_symmetry(prob, t).verified) {
        throw InvalidInputError(
            "a supplied symmetry tuple failed verification; drop it or run "
            "with --no-symmetry");
      }
    }
    qp = substitute_initial_domain(qp, *prob.x_fun);
  }

  BigMConfig cfg;
  cfg.lambda_bar = pf.options.lambda_bar;
  cfg.r_bar = pf.options.r_bar;
  cfg.gain_m = pf.options.big_m;
  ReduceOptions ro;
  ro.parallel = f.parallel_conservative;
  ro.threads = f.parallel_conservative ? worker_threads() : 1;
  ro.export_lp_dir = f.export_lp;
  ro.export_prefix = prob.name;
  const auto [reduced, report] = reduce_constraints(qp, cfg, ro);

  std::cout << "system " << prob.name << ": " << qp.q() << " rows, "
            << report.rows.size() << " candidates ("
            << (report.sequential ? "sequential" : "parallel-conservative")
            << ")\n";
  std::cout << "  row  tag             verdict               objective\n";
  for (const auto& row : report.rows) {
    const std::string tag = to_string(qp.row_tags[row.row]);
    std::printf("  %3ld  %-14s  %-20s  %10.4g%s\n", long(row.row), tag.c_str(),
                to_string(row.verdict), row.objective,
                row.conservative ? "  (limit hit, kept conservatively)" : "");
  }
  std::cout << "kept " << report.kept << ", excluded "
            << report.excluded_infeasible << " infeasible + "
            << report.excluded_zero_gain << " zero-gain; "
            << reduced.q() - static_cast<Index>(reduced.fixed_dual_rows.size())
            << " complementarity binaries remain\n";

  if (!f.json_path.empty()) {
    Json doc = Json::object();
    doc["tool"] = "lipcert";
    doc["system"] = prob.name;
    doc["mode"] = report.sequential ? "sequential" : "parallel-conservative";
    doc["rows_total"] = qp.q();
    Json rows = Json::array();
    for (const auto& row : report.rows) {
      Json r = Json::object();
      r["row"] = row.row;
      r["tag"] = to_string(qp.row_tags[row.row]);
      r["verdict"] = to_string(row.verdict);
      r["objective"] = row.objective;
      if (row.conservative) r["conservative"] = true;
      r["fixed_after"] = row.fixed_after;
      if (!f.deterministic) {
        r["nodes"] = row.nodes;
        r["seconds"] = row.seconds;
      }
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    doc["fixed_rows"] = report.fixed_rows;
    doc["kept"] = report.kept;
    doc["excluded_infeasible"] = report.excluded_infeasible;
    doc["excluded_zero_gain"] = report.excluded_zero_gain;
    if (report.conservative_kept > 0) {
      doc["kept_conservative"] = report.conservative_kept;
    }
    if (!f.deterministic) doc["wall_seconds"] = report.wall_seconds;
    write_text(f.json_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_oracle(const std::string& file, const CommonFlags& f, int resolution,
               const std::string& csv_path) {
  const ProblemFile pf = load_or_bundled(file);
  const MpcProblem& prob = pf.problem;
  prob.validate();
  if (prob.n() > 3) {
    throw InvalidInputError("the grid oracle supports at most 3 state dims");
  }
  const CondensedQp qp = condense(prob);
  const int res = resolution > 0 ? resolution : pf.options.resolution;
  const std::vector<Norm> norms = parse_norms(f.norm);

  // One grid pass; the segment census is norm-independent, so both norms are
  // evaluated from the same sweep.
  const GridResult grid =
      grid_lipschitz(qp, prob.X, res, norms.front(), worker_threads());
  std::vector<std::pair<Norm, double>> lower;
  for (Norm p : norms) {
    double l = 0.0;
    for (const auto& seg : grid.census) {
      l = std::max(l, matrix_pnorm(seg.K, p));
    }
    lower.emplace_back(p, l);
  }

  std::cout << "system " << prob.name << ": resolution " << res << ", "
            << grid.map.size() << " feasible samples, " << grid.census.size()
            << " affine segments\n";
  for (const auto& [p, l] : lower) {
    std::cout << "  L_" << to_string(p) << " lower bound: " << l << "\n";
  }
  if (!csv_path.empty()) {
    write_gain_map_csv(grid, prob.n(), prob.m(), csv_path);
    std::cout << "  gain map written to " << csv_path << "\n";
  }

  if (!f.json_path.empty()) {
    Json doc = Json::object();
    doc["tool"] = "lipcert";
    doc["system"] = prob.name;
    doc["resolution"] = res;
    doc["feasible_samples"] = grid.map.size();
    doc["segments"] = grid.census.size();
    Json lj = Json::object();
    for (const auto& [p, l] : lower) lj[to_string(p)] = l;
    doc["L_lower"] = std::move(lj);
    write_text(f.json_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

/// Reference binary counts for the bundled benchmarks (reduction only /
/// reduction + symmetry), used for side-by-side display.
struct BinaryRef {
  const char* row;
  int reduced;
  int symmetric;
};
constexpr BinaryRef kBinaryRefs[] = {
    {"system1-X", 22, 12}, {"system1-S", 22, 12}, {"system2-X", 32, 17},
    {"system2-S", 32, 17}, {"system3-X", 18, 15}, {"system3-S", 16, 16},
    {"system4-X", 36, 12}, {"system4-S", 36, 12}, {"system5-X", 28, 22},
    {"system5-S", 28, 22},
};

const BinaryRef* binary_ref(const std::string& row) {
  for (const auto& ref : kBinaryRefs) {
    if (row == ref.row) return &ref;
  }
  return nullptr;
}

int cmd_benchmark(const CommonFlags& f, bool quick) {
  std::vector<RunReport> runs;
  bool inconclusive = false;
  for (const auto& [name, pf] : bundled_systems()) {
    if (quick && name != "system1" && name != "system2" && name != "system3") {
      continue;
    }
    for (const TerminalKind term :
         {TerminalKind::StateSet, TerminalKind::LqrInvariant}) {
      ProblemFile variant = pf;
      variant.problem.terminal_kind = term;
      variant.problem.name =
          name + (term == TerminalKind::StateSet ? "-X" : "-S");
      for (Norm p : parse_norms(f.norm)) {
        const LipschitzResult res =
            compute_lipschitz(variant.problem, p, make_certify_options(variant, f));
        inconclusive = inconclusive || res.status != CertifyStatus::Optimal;
        runs.push_back(make_run_report(variant.problem.name, res));
        const RunReport& rr = runs.back();
        std::cout << rr.system << "  L_" << to_string(p) << " = " << rr.L_star
                  << "  (" << rr.binaries_after << " binaries, " << rr.status
                  << ")\n";
      }
    }
  }

  std::cout << "\n";
  print_report_table(std::cout, runs, !f.deterministic);
  std::cout << "\nbinaries vs reference (reduction only / reduction+symmetry):\n";
  std::printf("  %-12s %8s %8s %10s\n", "row", "measured", "ref-red", "ref-sym");
  for (const auto& rr : runs) {
    if (rr.p != Norm::One) continue;  // counts are norm-specific; show L1
    const BinaryRef* ref = binary_ref(rr.system);
    if (ref == nullptr) continue;
    std::printf("  %-12s %8ld %8d %10d\n", rr.system.c_str(),
                long(rr.binaries_after), ref->reduced, ref->symmetric);
  }

  if (!f.json_path.empty()) {
    write_text(f.json_path, report_to_json(runs, f.deterministic));
  }
  return inconclusive ? kExitInconclusive : kExitOk;
}

int cmd_export(const std::string& file, const CommonFlags& f,
               const std::string& out_dir) {
  const ProblemFile pf = load_or_bundled(file);
  const MpcProblem& prob = pf.problem;
  prob.validate();
  std::filesystem::create_directories(out_dir);
  const std::string prefix =
      (std::filesystem::path(out_dir) / prob.name).string();

  CondensedQp qp = condense(prob);
  std::vector<SymmetryTuple> tuples;
  bool inv1 = true, invinf = true;
  if (!f.no_symmetry && !prob.symmetries.empty()) {
    for (const auto& t : prob.symmetries) {
      SymmetryTuple v = verify_symmetry(prob, t);
      if (!v.verified) {
        throw InvalidInputError(
            "a supplied symmetry tuple failed verification; drop it or run "
            "with --no-symmetry");
      }
      inv1 = inv1 && v.norm_invariant_1;
      invinf = invinf && v.norm_invariant_inf;
      tuples.push_back(std::move(v));
    }
    if (prob.x_fun.has_value()) qp = substitute_initial_domain(qp, *prob.x_fun);
  }

  BigMConfig cfg;
  cfg.lambda_bar = pf.options.lambda_bar;
  cfg.r_bar = pf.options.r_bar;
  cfg.gain_m = pf.options.big_m;

  int written = 0;
  if (!f.no_reduction) {
    ReduceOptions ro;
    ro.export_lp_dir = out_dir;
    ro.export_prefix = prob.name;
    const auto [reduced, report] = reduce_constraints(qp, cfg, ro);
    qp = reduced;
    written += static_cast<int>(report.rows.size());
  }
  for (Norm p : parse_norms(f.norm)) {
    const bool invariant = p == Norm::One ? inv1 : invinf;
    if (tuples.empty() || invariant) {
      const FinalMilp fm = build_final_milp(qp, cfg, p);
      export_lp_file(fm.model,
                     prefix + "_final_l" + std::string(to_string(p)) + ".lp");
      ++written;
    } else {
      for (size_t k = 0; k < tuples.size(); ++k) {
        const std::pair<Matrix, Matrix> tr{tuples[k].Omega.inverse(),
                                           tuples[k].Theta};
        const FinalMilp fm = build_final_milp(qp, cfg, p, &tr);
        export_lp_file(fm.model, prefix + "_final_l" +
                                     std::string(to_string(p)) + "_sigma" +
                                     std::to_string(k) + ".lp");
        ++written;
      }
    }
  }
  std::cout << "wrote " << written << " LP files to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lipcert: exact Lipschitz constants of linear MPC laws via "
      "mixed-integer programming"};
  app.require_subcommand(1);

  CommonFlags cf, rf, of, bf, ef;
  std::string certify_file, reduce_file, oracle_file, export_file;
  std::string oracle_csv, export_dir;
  int oracle_resolution = 0;
  bool quick = false;

  CLI::App* certify =
      app.add_subcommand("certify", "Compute the exact Lipschitz constant");
  certify->add_option("problem", certify_file,
                      "Problem file (or bundled system name)")->required();
  add_common_flags(certify, &cf, true);

  CLI::App* reduce = app.add_subcommand(
      "reduce", "Run only the constraint-exclusion preprocessing");
  reduce->add_option("problem", reduce_file,
                     "Problem file (or bundled system name)")->required();
  add_common_flags(reduce, &rf, true);

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Grid-sample the explicit law (independent cross-check)");
  oracle->add_option("problem", oracle_file,
                     "Problem file (or bundled system name)")->required();
  of.norm = "1";
  add_common_flags(oracle, &of, false);
  oracle->add_option("--resolution", oracle_resolution,
                     "Grid points per state axis (default: problem file)");
  oracle->add_option("--csv", oracle_csv, "Write the sampled gain map here");

  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Certify the bundled systems with both terminal sets");
  add_common_flags(benchmark, &bf, true);
  benchmark->add_flag("--quick", quick, "Only systems 1-3");

  CLI::App* exporter = app.add_subcommand(
      "export", "Write every constructed MILP as an LP-format file");
  exporter->add_option("problem", export_file,
                       "Problem file (or bundled system name)")->required();
  exporter->add_option("--out", export_dir, "Output directory")->required();
  add_common_flags(exporter, &ef, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help/usage or the parse error
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (certify->parsed()) return cmd_certify(certify_file, cf);
    if (reduce->parsed()) return cmd_reduce(reduce_file, rf);
    if (oracle->parsed())
      return cmd_oracle(oracle_file, of, oracle_resolution, oracle_csv);
    if (benchmark->parsed()) return cmd_benchmark(bf, quick);
    if (exporter->parsed()) return cmd_export(export_file, ef, export_dir);
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
