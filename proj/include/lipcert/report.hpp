#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lipcert/certify.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

/// One pipeline run (system x norm) in reporting form.
struct RunReport {
  std::string system;
  Norm p = Norm::One;
  std::string status;  // "optimal" | "inconclusive"
  double L_star = 0.0;
  double upper_bound = 0.0;
  Index binaries_before = 0;  // final-MILP binaries with no reduction
  Index binaries_after = 0;   // binaries actually used
  bool reduction_applied = false;
  bool symmetry_applied = false;
  int sigma_instances = 1;
  int rows_kept = 0;
  int rows_excluded_infeasible = 0;
  int rows_excluded_zero_gain = 0;
  int rows_kept_conservative = 0;
  double preprocess_seconds = 0.0;
  double final_milp_seconds = 0.0;
  long nodes = 0;
  Vector x_star;
  Matrix K_star;
  bool coverage_checked = false;
  double coverage_fraction = 0.0;
  bool oracle_checked = false;
  double oracle_l_lower = 0.0;
  double oracle_u_max_diff = 0.0;  // |S U*_milp - S U*_qp| at the witness
};

RunReport make_run_report(const std::string& system, const LipschitzResult& r);

/// Machine-readable report. With `deterministic` (the default) wall-clock
/// fields are omitted so repeated runs produce byte-identical output.
std::string report_to_json(const std::vector<RunReport>& runs,
                           bool deterministic = true);

/// Human-readable fixed-width table.
void print_report_table(std::ostream& os, const std::vector<RunReport>& runs,
                        bool show_times = true);

}  // namespace lipcert
