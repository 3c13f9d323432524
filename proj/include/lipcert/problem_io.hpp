#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lipcert/condense.hpp"
#include "lipcert/types.hpp"

namespace lipcert {

/// Tuning knobs carried inside a problem file's optional "options" object.
struct ProblemOptions {
  double lambda_bar = 1e4;
  double r_bar = 1e4;
  double big_m = 1e4;
  double time_limit = kInf;  // seconds, final MILP
  int resolution = 201;      // grid oracle points per axis
};

struct ProblemFile {
  MpcProblem problem;
  ProblemOptions options;
};

/// Strict parse: unknown keys anywhere in the document are rejected and
/// named. `name` becomes the problem's display name (usually the file stem).
ProblemFile parse_problem(const std::string& json_text, const std::string& name);

ProblemFile load_problem_file(const std::string& path);

/// Canonical serialization; parse -> serialize -> parse is the identity on
/// every valid document.
std::string serialize_problem(const ProblemFile& pf);

/// The benchmark systems compiled into the library, sorted by name.
std::vector<std::pair<std::string, ProblemFile>> bundled_systems();

ProblemFile bundled_system(const std::string& name);

}  // namespace lipcert
