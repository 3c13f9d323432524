#include "lipcert/report.hpp"

#include <iomanip>
#include <json.hpp>
#include <ostream>

namespace lipcert {

namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

RunReport make_run_report(const std::string& system, const LipschitzResult& r) {
  RunReport rep;
  rep.system = system;
  rep.p = r.p;
  rep.status = r.status == CertifyStatus::Optimal ? "optimal" : "inconclusive";
  rep.L_star = r.L_star;
  rep.upper_bound = r.upper_bound;
  rep.binaries_after = r.binaries_used;
  // Every excluded row would otherwise carry one complementarity binary.
  rep.binaries_before = r.binaries_used + r.reduction.excluded_infeasible +
                        r.reduction.excluded_zero_gain;
  rep.reduction_applied = r.reduction_applied;
  rep.symmetry_applied = r.symmetry_applied;
  rep.sigma_instances = r.sigma_instances;
  rep.rows_kept = r.reduction.kept;
  rep.rows_excluded_infeasible = r.reduction.excluded_infeasible;
  rep.rows_excluded_zero_gain = r.reduction.excluded_zero_gain;
  rep.rows_kept_conservative = r.reduction.conservative_kept;
  rep.preprocess_seconds = r.timings.preprocess_seconds;
  rep.final_milp_seconds = r.timings.final_milp_seconds;
  rep.nodes = r.nodes;
  rep.x_star = r.x_star;
  rep.K_star = r.K_star;
  rep.coverage_checked = r.coverage_checked;
  rep.coverage_fraction = r.coverage_fraction;
  return rep;
}

std::string report_to_json(const std::vector<RunReport>& runs,
                           bool deterministic) {
  Json doc = Json::object();
  doc["tool"] = "lipcert";
  Json arr = Json::array();
  for (const auto& run : runs) {
    Json j = Json::object();
    j["system"] = run.system;
    j["norm"] = to_string(run.p);
    j["status"] = run.status;
    j["L_star"] = run.L_star;
    if (run.status != "optimal") j["upper_bound"] = run.upper_bound;
    j["binaries_before"] = run.binaries_before;
    j["binaries_after"] = run.binaries_after;
    j["reduction_applied"] = run.reduction_applied;
    j["symmetry_applied"] = run.symmetry_applied;
    if (run.sigma_instances > 1) j["sigma_instances"] = run.sigma_instances;
    if (run.reduction_applied) {
      Json red = Json::object();
      red["kept"] = run.rows_kept;
      red["excluded_infeasible"] = run.rows_excluded_infeasible;
      red["excluded_zero_gain"] = run.rows_excluded_zero_gain;
      if (run.rows_kept_conservative > 0) {
        red["kept_conservative"] = run.rows_kept_conservative;
      }
      j["reduction"] = std::move(red);
    }
    if (run.coverage_checked) j["coverage_fraction"] = run.coverage_fraction;
    if (run.x_star.size() > 0) j["x_star"] = vector_json(run.x_star);
    if (run.K_star.size() > 0) j["K_star"] = matrix_json(run.K_star);
    if (run.oracle_checked) {
      Json oc = Json::object();
      oc["L_lower"] = run.oracle_l_lower;
      oc["witness_input_max_diff"] = run.oracle_u_max_diff;
      j["oracle"] = std::move(oc);
    }
    if (!deterministic) {
      j["preprocess_seconds"] = run.preprocess_seconds;
      j["final_milp_seconds"] = run.final_milp_seconds;
      j["nodes"] = run.nodes;
    }
    arr.push_back(std::move(j));
  }
  doc["runs"] = std::move(arr);
  return doc.dump(2) + "\n";
}

void print_report_table(std::ostream& os, const std::vector<RunReport>& runs,
                        bool show_times) {
  os << std::left << std::setw(16) << "system" << std::setw(6) << "norm"
     << std::setw(12) << "L*" << std::setw(10) << "binaries" << std::setw(14)
     << "status";
  if (show_times) {
    os << std::setw(12) << "prep [s]" << std::setw(12) << "milp [s]";
  }
  os << "\n";
  for (const auto& run : runs) {
    os << std::left << std::setw(16) << run.system << std::setw(6)
       << to_string(run.p) << std::setw(12) << std::setprecision(6)
       << run.L_star << std::setw(10) << run.binaries_after << std::setw(14)
       << run.status;
    if (show_times) {
      os << std::setw(12) << std::setprecision(4) << run.preprocess_seconds
         << std::setw(12) << run.final_milp_seconds;
    }
    os << "\n";
  }
  os.flush();
}

}  // namespace lipcert
