#include "lipcert/problem_io.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "lipcert/systems_data.hpp"

namespace lipcert {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) {
  throw InvalidInputError("problem file: " + msg);
}

void check_keys(const Json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key()) == 0) {
      fail("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

Matrix parse_matrix(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    fail("\"" + key + "\" must be a non-empty array of rows");
  }
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      fail("\"" + key + "\" has ragged rows");
    }
    for (Index k = 0; k < cols; ++k) {
      const auto& cell = row[static_cast<size_t>(k)];
      if (!cell.is_number()) fail("\"" + key + "\" entries must be numbers");
      out(i, k) = cell.get<double>();
    }
  }
  return out;
}

Vector parse_vector(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) {
    fail("\"" + key + "\" must be a non-empty array");
  }
  Vector out(static_cast<Index>(j.size()));
  for (Index i = 0; i < out.size(); ++i) {
    const auto& cell = j[static_cast<size_t>(i)];
    if (!cell.is_number()) fail("\"" + key + "\" entries must be numbers");
    out[i] = cell.get<double>();
  }
  return out;
}

Polytope parse_set(const Json& j, const std::string& key) {
  if (!j.is_object()) fail("\"" + key + "\" must be an object with C and c");
  check_keys(j, "\"" + key + "\"", {"C", "c"});
  if (!j.contains("C")) fail("missing key \"C\" in \"" + key + "\"");
  if (!j.contains("c")) fail("missing key \"c\" in \"" + key + "\"");
  return Polytope(parse_matrix(j["C"], key + ".C"),
                  parse_vector(j["c"], key + ".c"));
}

const Json& require(const Json& doc, const std::string& key) {
  if (!doc.contains(key)) fail("missing key \"" + key + "\"");
  return doc.at(key);
}

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

Json set_json(const Polytope& set) {
  Json out = Json::object();
  out["C"] = matrix_json(set.C());
  out["c"] = vector_json(set.c());
  return out;
}

}  // namespace

ProblemFile parse_problem(const std::string& json_text,
                          const std::string& name) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");
  check_keys(doc, "problem file",
             {"A", "B", "Q", "R", "P", "N", "X", "U", "terminal", "symmetries",
              "x_fun", "options"});

  ProblemFile pf;
  MpcProblem& p = pf.problem;
  p.name = name;
  p.A = parse_matrix(require(doc, "A"), "A");
  p.B = parse_matrix(require(doc, "B"), "B");
  p.Q = parse_matrix(require(doc, "Q"), "Q");
  p.R = parse_matrix(require(doc, "R"), "R");
  if (doc.contains("P")) p.P = parse_matrix(doc["P"], "P");
  const Json& nval = require(doc, "N");
  if (!nval.is_number_integer() || nval.get<long>() < 1) {
    fail("\"N\" must be a positive integer");
  }
  p.N = nval.get<int>();
  p.X = parse_set(require(doc, "X"), "X");
  p.U_set = parse_set(require(doc, "U"), "U");

  const Json& term = require(doc, "terminal");
  if (term.is_string()) {
    const std::string kind = term.get<std::string>();
    if (kind == "state-set") {
      p.terminal_kind = TerminalKind::StateSet;
    } else if (kind == "lqr-invariant") {
      p.terminal_kind = TerminalKind::LqrInvariant;
    } else {
      fail("\"terminal\" must be \"state-set\", \"lqr-invariant\", or a set");
    }
  } else if (term.is_object()) {
    p.terminal_kind = TerminalKind::Explicit;
    p.terminal_explicit = parse_set(term, "terminal");
  } else {
    fail("\"terminal\" must be \"state-set\", \"lqr-invariant\", or a set");
  }

  if (doc.contains("symmetries")) {
    const Json& syms = doc["symmetries"];
    if (!syms.is_array()) fail("\"symmetries\" must be an array");
    for (size_t i = 0; i < syms.size(); ++i) {
      const Json& s = syms[i];
      const std::string where = "\"symmetries\"[" + std::to_string(i) + "]";
      if (!s.is_object()) fail(where + " must be an object");
      check_keys(s, where, {"theta", "omega"});
      if (!s.contains("theta")) fail("missing key \"theta\" in " + where);
      if (!s.contains("omega")) fail("missing key \"omega\" in " + where);
      SymmetryTuple t;
      t.Theta = parse_matrix(s["theta"], "theta");
      t.Omega = parse_matrix(s["omega"], "omega");
      p.symmetries.push_back(std::move(t));
    }
  }
  if (doc.contains("x_fun")) p.x_fun = parse_set(doc["x_fun"], "x_fun");

  if (doc.contains("options")) {
    const Json& o = doc["options"];
    if (!o.is_object()) fail("\"options\" must be an object");
    check_keys(o, "\"options\"",
               {"lambda_bar", "r_bar", "M", "time_limit", "resolution"});
    const auto num = [&](const char* key, double* out) {
      if (!o.contains(key)) return;
      if (!o[key].is_number()) fail(std::string("\"options.") + key + "\" must be a number");
      *out = o[key].get<double>();
      if (*out <= 0) fail(std::string("\"options.") + key + "\" must be positive");
    };
    num("lambda_bar", &pf.options.lambda_bar);
    num("r_bar", &pf.options.r_bar);
    num("M", &pf.options.big_m);
    num("time_limit", &pf.options.time_limit);
    if (o.contains("resolution")) {
      if (!o["resolution"].is_number_integer() || o["resolution"].get<long>() < 2) {
        fail("\"options.resolution\" must be an integer >= 2");
      }
      pf.options.resolution = o["resolution"].get<int>();
    }
  }
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw InvalidInputError("cannot open problem file: " + path);
  std::ostringstream text;
  text << file.rdbuf();
  std::string stem = path;
  const size_t slash = stem.find_last_of("/\\");
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const size_t dot = stem.rfind('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_problem(text.str(), stem);
}

std::string serialize_problem(const ProblemFile& pf) {
  const MpcProblem& p = pf.problem;
  Json doc = Json::object();
  doc["A"] = matrix_json(p.A);
  doc["B"] = matrix_json(p.B);
  doc["Q"] = matrix_json(p.Q);
  doc["R"] = matrix_json(p.R);
  if (p.P.has_value()) doc["P"] = matrix_json(*p.P);
  doc["N"] = p.N;
  doc["X"] = set_json(p.X);
  doc["U"] = set_json(p.U_set);
  switch (p.terminal_kind) {
    case TerminalKind::StateSet:
      doc["terminal"] = "state-set";
      break;
    case TerminalKind::LqrInvariant:
      doc["terminal"] = "lqr-invariant";
      break;
    case TerminalKind::Explicit:
      doc["terminal"] = set_json(p.terminal_explicit);
      break;
  }
  if (!p.symmetries.empty()) {
    Json syms = Json::array();
    for (const auto& t : p.symmetries) {
      Json s = Json::object();
      s["theta"] = matrix_json(t.Theta);
      s["omega"] = matrix_json(t.Omega);
      syms.push_back(std::move(s));
    }
    doc["symmetries"] = std::move(syms);
  }
  if (p.x_fun.has_value()) doc["x_fun"] = set_json(*p.x_fun);

  Json opts = Json::object();
  const ProblemOptions def;
  if (pf.options.lambda_bar != def.lambda_bar) opts["lambda_bar"] = pf.options.lambda_bar;
  if (pf.options.r_bar != def.r_bar) opts["r_bar"] = pf.options.r_bar;
  if (pf.options.big_m != def.big_m) opts["M"] = pf.options.big_m;
  if (pf.options.time_limit != def.time_limit) opts["time_limit"] = pf.options.time_limit;
  if (pf.options.resolution != def.resolution) opts["resolution"] = pf.options.resolution;
  if (!opts.empty()) doc["options"] = std::move(opts);

  return doc.dump(2) + "\n";
}

std::vector<std::pair<std::string, ProblemFile>> bundled_systems() {
  std::vector<std::pair<std::string, ProblemFile>> out;
  for (const auto& [name, text] : data::k_systems) {
    out.emplace_back(name, parse_problem(text, name));
  }
  return out;
}

ProblemFile bundled_system(const std::string& name) {
  for (const auto& [sys, text] : data::k_systems) {
    if (name == sys) return parse_problem(text, name);
  }
  throw InvalidInputError("unknown bundled system: " + name);
}

}  // namespace lipcert
