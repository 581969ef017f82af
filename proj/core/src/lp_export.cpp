#include "p2psched/lp_export.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace p2psched::milp {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Sanitizes names into the [A-Za-z0-9_] alphabet with a non-digit lead
/// character, deduplicating collisions. Records changed names in `mapping`.
class NamePool {
 public:
  std::string intern(const std::string& original) {
    std::string s;
    s.reserve(original.size());
    for (char c : original) s.push_back(is_word_char(c) ? c : '_');
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) ||
        s[0] == '.')
      s.insert(0, "v_");
    std::string candidate = s;
    int suffix = 2;
    while (!used_.insert(candidate).second)
      candidate = s + "_" + std::to_string(suffix++);
    if (candidate != original) mapping_.emplace_back(candidate, original);
    return candidate;
  }

  const std::vector<std::pair<std::string, std::string>>& mapping() const {
    return mapping_;
  }

 private:
  std::unordered_set<std::string> used_;
  std::vector<std::pair<std::string, std::string>> mapping_;
};

/// Accumulates `+ c x` tokens with line wrapping.
class RowWriter {
 public:
  explicit RowWriter(std::ostream& out, std::string head)
      : out_(out), line_(std::move(head)) {}

  void term(double coef, const std::string& name) {
    std::string tok = (coef < 0 ? "- " : "+ ") + fmt(std::abs(coef)) + " " + name;
    push(tok);
  }
  void constant(double v) {
    if (v == 0.0) return;
    push((v < 0 ? "- " : "+ ") + fmt(std::abs(v)));
  }
  void raw(const std::string& tok) { push(tok); }

  void finish() {
    out_ << line_ << "\n";
    line_.clear();
  }

 private:
  void push(const std::string& tok) {
    if (line_.size() + tok.size() + 1 > 72) {
      out_ << line_ << "\n";
      line_ = "  ";
    } else if (!line_.empty()) {
      line_ += " ";
    }
    line_ += tok;
  }

  std::ostream& out_;
  std::string line_;
};

const char* relation_text(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    default: return ">=";
  }
}

}  // namespace

void export_lp_format(const MilpModel& model, std::ostream& out) {
  model.ensure_valid();

  NamePool pool;
  std::vector<std::string> var_names;
  var_names.reserve(model.num_variables());
  for (const Variable& v : model.variables())
    var_names.push_back(pool.intern(v.name));
  std::vector<std::string> con_names;
  con_names.reserve(model.num_constraints());
  for (const Constraint& c : model.constraints())
    con_names.push_back(pool.intern(c.name));

  out << "Maximize\n";
  {
    RowWriter row(out, " obj:");
    bool any = false;
    for (int j = 0; j < model.num_variables(); ++j) {
      double c = model.objective_coef(j);
      if (c == 0.0) continue;
      row.term(c, var_names[j]);
      any = true;
    }
    if (model.objective_offset() != 0.0) {
      row.constant(model.objective_offset());
      any = true;
    }
    if (!any && model.num_variables() > 0) row.term(0.0, var_names[0]);
    row.finish();
  }

  out << "Subject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& con = model.constraint(i);
    RowWriter row(out, " " + con_names[i] + ":");
    bool any = false;
    for (const Term& t : con.terms) {
      if (t.coef == 0.0) continue;
      row.term(t.coef, var_names[t.var]);
      any = true;
    }
    if (!any) {
      if (model.num_variables() == 0)
        throw std::invalid_argument("constraint '" + con.name +
                                    "' has no terms and no variable exists");
      row.term(0.0, var_names[0]);
    }
    row.raw(std::string(relation_text(con.relation)) + " " + fmt(con.rhs));
    row.finish();
  }

  out << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variable(j);
    const std::string& name = var_names[j];
    bool lo_inf = v.lower == -kInf, up_inf = v.upper == kInf;
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0)
      continue;  // Binary section default
    if (v.kind == VarKind::Continuous && v.lower == 0.0 && up_inf)
      continue;  // LP-format default
    if (lo_inf && up_inf) {
      out << " " << name << " free\n";
    } else if (v.lower == v.upper) {
      out << " " << name << " = " << fmt(v.lower) << "\n";
    } else if (lo_inf) {
      out << " -infinity <= " << name << " <= " << fmt(v.upper) << "\n";
    } else if (up_inf) {
      out << " " << name << " >= " << fmt(v.lower) << "\n";
    } else if (v.lower == 0.0) {
      out << " " << name << " <= " << fmt(v.upper) << "\n";
    } else {
      out << " " << fmt(v.lower) << " <= " << name << " <= " << fmt(v.upper)
          << "\n";
    }
  }

  bool any_binary = false;
  for (const Variable& v : model.variables())
    if (v.kind == VarKind::Binary) any_binary = true;
  if (any_binary) {
    out << "Binary\n";
    std::string line;
    for (int j = 0; j < model.num_variables(); ++j) {
      if (model.variable(j).kind != VarKind::Binary) continue;
      if (line.size() + var_names[j].size() + 1 > 72) {
        out << line << "\n";
        line.clear();
      }
      line += " " + var_names[j];
    }
    if (!line.empty()) out << line << "\n";
  }

  out << "End\n";
  if (!pool.mapping().empty()) {
    out << "\\ name mapping: written_name = original_name\n";
    for (const auto& [written, original] : pool.mapping())
      out << "\\ " << written << " = " << original << "\n";
  }
}

std::string export_lp_string(const MilpModel& model) {
  std::ostringstream os;
  export_lp_format(model, os);
  return os.str();
}

void export_lp_file(const MilpModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  export_lp_format(model, os);
  os.close();
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace p2psched::milp
