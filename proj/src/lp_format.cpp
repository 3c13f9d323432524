#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "lipcert/milp.hpp"

namespace lipcert {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ostream& os, const std::vector<MilpTerm>& terms,
                 const MilpModel& model) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    const double a = std::abs(t.coef);
    os << (t.coef < 0.0 ? (first ? "- " : " - ") : (first ? "" : " + "));
    if (a != 1.0) os << fmt_double(a) << ' ';
    os << model.variables()[size_t(t.var)].name;
    first = false;
  }
  if (first) os << "0 " << model.variables()[0].name;
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::LE: return "<=";
    case RowSense::GE: return ">=";
    case RowSense::EQ: return "=";
  }
  return "<=";
}

}  // namespace

std::string to_lp_string(const MilpModel& model) {
  model.validate();
  if (model.num_vars() == 0) {
    throw InvalidInputError("lp export: model has no variables");
  }
  std::ostringstream os;
  os << (model.objective_sense() == ObjSense::Maximize ? "Maximize" : "Minimize")
     << "\n obj: ";
  if (model.objective_sense() == ObjSense::Feasibility ||
      model.objective_terms().empty()) {
    os << "0 " << model.variables()[0].name;
  } else {
    write_terms(os, model.objective_terms(), model);
  }
  os << "\nSubject To\n";
  for (size_t i = 0; i < model.rows().size(); ++i) {
    const MilpRow& r = model.rows()[i];
    os << ' ' << (r.name.empty() ? "c" + std::to_string(i) : r.name) << ": ";
    write_terms(os, r.terms, model);
    os << ' ' << sense_text(r.sense) << ' ' << fmt_double(r.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : model.variables()) {
    const bool lo_fin = std::isfinite(v.lower);
    const bool hi_fin = std::isfinite(v.upper);
    if (v.kind == VarKind::Binary) {
      // [0,1] is implied by the Binary section; only tighter bounds matter.
      if (v.lower > 0.0 || v.upper < 1.0) {
        os << ' ' << fmt_double(v.lower) << " <= " << v.name << " <= "
           << fmt_double(v.upper) << '\n';
      }
      continue;
    }
    if (!lo_fin && !hi_fin) {
      os << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      os << ' ' << v.name << " = " << fmt_double(v.lower) << '\n';
    } else if (lo_fin && hi_fin) {
      os << ' ' << fmt_double(v.lower) << " <= " << v.name << " <= "
         << fmt_double(v.upper) << '\n';
    } else if (lo_fin) {
      if (v.lower != 0.0) os << ' ' << v.name << " >= " << fmt_double(v.lower) << '\n';
      // lower bound 0 with a free upper bound is the LP-format default
    } else {
      os << " -inf <= " << v.name << " <= " << fmt_double(v.upper) << '\n';
    }
  }
  bool any_binary = false;
  for (const auto& v : model.variables()) {
    if (v.kind == VarKind::Binary) {
      if (!any_binary) os << "Binary\n";
      any_binary = true;
      os << ' ' << v.name << '\n';
    }
  }
  os << "End\n";
  return os.str();
}

void export_lp_file(const MilpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("lp export: cannot open '" + path + "' for writing");
  out << to_lp_string(model);
  if (!out) throw Error("lp export: write to '" + path + "' failed");
}

namespace {

struct LpTokenizer {
  explicit LpTokenizer(const std::string& text) : text_(text) {}

  // Tokens: names, numbers, operators (<=, >=, =, +, -, :). Comments run from
  // '\' to end of line.
  std::string next() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\\') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ >= text_.size()) return {};
    const char c = text_[pos_];
    if (c == '<' || c == '>') {
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '=') ++pos_;
      return c == '<' ? "<=" : ">=";
    }
    if (c == '=') {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '<' || text_[pos_] == '>')) {
        const char d = text_[pos_++];
        return d == '<' ? "<=" : ">=";
      }
      return "=";
    }
    if (c == '+' || c == '-' || c == ':') {
      ++pos_;
      return std::string(1, c);
    }
    size_t start = pos_;
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '<' || d == '>' ||
          d == '=' || d == ':' || d == '+' || d == '\\') {
        break;
      }
      // '-' terminates a token unless it is part of an exponent like 1e-5.
      if (d == '-') {
        const char prev = text_[pos_ - 1];
        const bool in_exponent =
            pos_ > start && (prev == 'e' || prev == 'E') &&
            std::isdigit(static_cast<unsigned char>(text_[start]));
        if (!in_exponent) break;
      }
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  std::string peek() {
    const size_t saved = pos_;
    std::string t = next();
    pos_ = saved;
    return t;
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;
};

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_number(const std::string& t, double* out) {
  if (t.empty()) return false;
  const std::string l = lower(t);
  if (l == "inf" || l == "+inf" || l == "infinity") {
    *out = kInf;
    return true;
  }
  if (l == "-inf" || l == "-infinity") {
    *out = -kInf;
    return true;
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = std::abs(v) >= 1e30 ? (v > 0 ? kInf : -kInf) : v;
  return true;
}

// Reads a possibly signed number that the tokenizer may have split into a
// sign token and a magnitude token.
bool next_number(LpTokenizer& tok, double* out) {
  std::string t = tok.next();
  double sign = 1.0;
  while (t == "+" || t == "-") {
    if (t == "-") sign = -sign;
    t = tok.next();
  }
  if (!is_number(t, out)) return false;
  *out *= sign;
  return true;
}

// Section keywords, lowercase. "subject to" and "such that" arrive as two
// tokens; the caller glues them.
bool is_section(const std::string& l) {
  return l == "maximize" || l == "max" || l == "maximise" || l == "minimize" ||
         l == "min" || l == "minimise" || l == "subject" || l == "such" ||
         l == "st" || l == "s.t." || l == "bounds" || l == "bound" ||
         l == "binary" || l == "binaries" || l == "bin" || l == "general" ||
         l == "generals" || l == "gen" || l == "end" || l == "free";
}

}  // namespace

MilpModel parse_lp_string(const std::string& text) {
  MilpModel model;
  std::unordered_map<std::string, Index> index_of;
  auto var_of = [&](const std::string& name) {
    auto it = index_of.find(name);
    if (it != index_of.end()) return it->second;
    const Index j = model.add_continuous(name, 0.0, kInf);  // LP default bounds
    index_of.emplace(name, j);
    return j;
  };

  LpTokenizer tok(text);
  enum Section { None, Objective, Rows, Bounds, Binaries };
  Section section = None;
  ObjSense sense = ObjSense::Minimize;
  std::vector<MilpTerm> obj_terms;

  // Reads `[name:] [+-] [coef] var ...` until a sense token, section keyword,
  // or end of input; returns the terms and leaves the stopper in `stop`.
  auto read_terms = [&](std::string first, std::string* stop,
                        std::string* label) -> std::vector<MilpTerm> {
    std::vector<MilpTerm> terms;
    double sign = 1.0;
    bool have_coef = false;
    double coef = 1.0;
    std::string t = std::move(first);
    bool checked_label = false;
    while (true) {
      if (t.empty() || t == "<=" || t == ">=" || t == "=") {
        *stop = t;
        return terms;
      }
      const std::string l = lower(t);
      if (is_section(l) && !have_coef && sign == 1.0) {
        *stop = t;
        return terms;
      }
      if (!checked_label && label != nullptr && tok.peek() == ":") {
        tok.next();  // consume ':'
        *label = t;
        t = tok.next();
        checked_label = true;
        continue;
      }
      checked_label = true;
      if (t == "+") {
        // sign unchanged
      } else if (t == "-") {
        sign = -sign;
      } else {
        double v;
        if (is_number(t, &v)) {
          if (have_coef) throw InvalidInputError("lp parse: two numbers in a row");
          coef = v;
          have_coef = true;
        } else {
          const Index vj = var_of(t);
          const double c = sign * coef;
          if (c != 0.0) terms.push_back(MilpTerm{vj, c});
          sign = 1.0;
          coef = 1.0;
          have_coef = false;
        }
      }
      t = tok.next();
    }
  };

  std::string t = tok.next();
  while (!t.empty()) {
    const std::string l = lower(t);
    if (l == "maximize" || l == "max" || l == "maximise") {
      sense = ObjSense::Maximize;
      section = Objective;
      std::string stop, label;
      std::string first = tok.next();
      obj_terms = read_terms(first, &stop, &label);
      t = stop;
      continue;
    }
    if (l == "minimize" || l == "min" || l == "minimise") {
      sense = ObjSense::Minimize;
      section = Objective;
      std::string stop, label;
      obj_terms = read_terms(tok.next(), &stop, &label);
      t = stop;
      continue;
    }
    if (l == "subject" || l == "such") {
      tok.next();  // "to" / "that"
      section = Rows;
      t = tok.next();
      continue;
    }
    if (l == "st" || l == "s.t.") {
      section = Rows;
      t = tok.next();
      continue;
    }
    if (l == "bounds" || l == "bound") {
      section = Bounds;
      t = tok.next();
      continue;
    }
    if (l == "binary" || l == "binaries" || l == "bin") {
      section = Binaries;
      t = tok.next();
      continue;
    }
    if (l == "general" || l == "generals" || l == "gen") {
      throw InvalidInputError("lp parse: general integers are not supported");
    }
    if (l == "end") break;

    switch (section) {
      case Rows: {
        std::string stop, label;
        std::vector<MilpTerm> terms = read_terms(t, &stop, &label);
        if (stop != "<=" && stop != ">=" && stop != "=") {
          throw InvalidInputError("lp parse: constraint without a sense");
        }
        double rhs;
        if (!next_number(tok, &rhs)) {
          throw InvalidInputError("lp parse: constraint without a numeric rhs");
        }
        const RowSense rs = stop == "<=" ? RowSense::LE
                            : stop == ">=" ? RowSense::GE
                                           : RowSense::EQ;
        model.add_row(std::move(terms), rs, rhs, label);
        t = tok.next();
        break;
      }
      case Bounds: {
        // Forms: `x free`, `lo <= x <= hi`, `x <= hi`, `x >= lo`, `x = v`.
        if (t == "-" || t == "+") {
          const std::string mag = tok.next();
          t = (t == "-" ? "-" : "") + mag;
        }
        double num;
        if (is_number(t, &num)) {
          std::string op = tok.next();
          if (op != "<=" && op != ">=") {
            throw InvalidInputError("lp parse: malformed bound line");
          }
          const std::string name = tok.next();
          const Index j = var_of(name);
          auto v = model.variables()[size_t(j)];
          if (op == "<=") v.lower = num; else v.upper = num;
          std::string nxt = tok.peek();
          if (nxt == "<=" || nxt == ">=") {
            tok.next();
            double hi;
            if (!next_number(tok, &hi)) {
              throw InvalidInputError("lp parse: malformed double bound");
            }
            if (op == "<=") v.upper = hi; else v.lower = hi;
          }
          model.set_bounds(j, v.lower, v.upper);
          t = tok.next();
        } else {
          const Index j = var_of(t);
          auto v = model.variables()[size_t(j)];
          std::string op = tok.next();
          const std::string lop = lower(op);
          if (lop == "free") {
            model.set_bounds(j, -kInf, kInf);
            t = tok.next();
          } else if (op == "<=" || op == ">=" || op == "=") {
            double num2;
            if (!next_number(tok, &num2)) {
              throw InvalidInputError("lp parse: bound without a number");
            }
            if (op == "<=") v.upper = num2;
            else if (op == ">=") v.lower = num2;
            else v.lower = v.upper = num2;
            model.set_bounds(j, v.lower, v.upper);
            t = tok.next();
          } else {
            throw InvalidInputError("lp parse: malformed bound line near '" +
                                    op + "'");
          }
        }
        break;
      }
      case Binaries: {
        const Index j = var_of(t);
        const auto& v = model.variables()[size_t(j)];
        // LP default bounds [0, inf) tighten to [0,1]; explicit bounds stay.
        const double lo = std::max(0.0, v.lower);
        const double hi = v.upper == kInf ? 1.0 : std::min(1.0, v.upper);
        model.set_bounds(j, lo, hi);
        model.set_kind(j, VarKind::Binary);
        t = tok.next();
        break;
      }
      default:
        throw InvalidInputError("lp parse: unexpected token '" + t + "'");
    }
  }

  model.set_objective(obj_terms.empty() ? ObjSense::Feasibility : sense,
                      std::move(obj_terms));
  model.validate();
  return model;
}

MilpModel read_lp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("lp read: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_lp_string(ss.str());
}

}  // namespace lipcert
