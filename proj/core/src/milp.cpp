#include "p2psched/milp.hpp"

#include <cmath>
#include <sstream>

namespace p2psched::milp {

int MilpModel::add_variable(std::string name, VarKind kind, double lower,
                            double upper) {
  int id = static_cast<int>(variables_.size());
  var_ids_.emplace(name, id);
  variables_.push_back(Variable{std::move(name), kind, lower, upper});
  objective_coefs_.push_back(0.0);
  return id;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms,
                              Relation rel, double rhs) {
  int id = static_cast<int>(constraints_.size());
  con_ids_.emplace(name, id);
  constraints_.push_back(Constraint{std::move(name), std::move(terms), rel, rhs});
  return id;
}

void MilpModel::set_objective_coef(int var, double coef) {
  objective_coefs_.at(var) = coef;
}

void MilpModel::add_objective_coef(int var, double coef) {
  objective_coefs_.at(var) += coef;
}

void MilpModel::set_bounds(int var, double lower, double upper) {
  Variable& v = variables_.at(var);
  v.lower = lower;
  v.upper = upper;
}

int MilpModel::variable_id(const std::string& name) const {
  auto it = var_ids_.find(name);
  if (it == var_ids_.end())
    throw std::out_of_range("no variable named '" + name + "'");
  return it->second;
}

std::vector<std::string> MilpModel::validate() const {
  std::vector<std::string> out;
  // name uniqueness: the maps collapse duplicates, so compare sizes
  if (var_ids_.size() != variables_.size()) {
    for (std::size_t j = 0; j < variables_.size(); ++j)
      if (var_ids_.at(variables_[j].name) != static_cast<int>(j))
        out.push_back("duplicate variable name '" + variables_[j].name + "'");
  }
  if (con_ids_.size() != constraints_.size()) {
    for (std::size_t i = 0; i < constraints_.size(); ++i)
      if (con_ids_.at(constraints_[i].name) != static_cast<int>(i))
        out.push_back("duplicate constraint name '" + constraints_[i].name + "'");
  }
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    const Variable& v = variables_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      out.push_back("variable '" + v.name + "' has empty bound range");
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0))
      out.push_back("binary variable '" + v.name + "' has bounds outside [0,1]");
  }
  for (const Constraint& c : constraints_) {
    for (const Term& t : c.terms)
      if (t.var < 0 || t.var >= num_variables())
        out.push_back("constraint '" + c.name + "' references unknown variable id " +
                      std::to_string(t.var));
  }
  return out;
}

void MilpModel::ensure_valid() const {
  auto v = validate();
  if (!v.empty()) throw std::invalid_argument("invalid model: " + v.front());
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

void SolveOptions::ensure_valid() const {
  if (!(abs_gap >= 0) || !(feas_tol > 0) || !(int_tol > 0) || !(time_budget_s > 0))
    throw std::invalid_argument("solve options must be positive");
  if (std::isnan(cutoff) || cutoff == kInf)
    throw std::invalid_argument("cutoff must be a value or -infinity");
}

double eval_objective(const MilpModel& model, const std::vector<double>& values) {
  double obj = model.objective_offset();
  for (int j = 0; j < model.num_variables(); ++j)
    obj += model.objective_coef(j) * values.at(j);
  return obj;
}

std::vector<std::string> check_solution(const MilpModel& model,
                                        const std::vector<double>& values,
                                        double feas_tol, double int_tol) {
  std::vector<std::string> out;
  if (values.size() != static_cast<std::size_t>(model.num_variables())) {
    out.push_back("value vector has wrong length");
    return out;
  }
  auto describe = [](double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
  };
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variable(j);
    double x = values[j];
    if (x < v.lower - feas_tol || x > v.upper + feas_tol)
      out.push_back("variable '" + v.name + "' = " + describe(x) +
                    " violates bounds [" + describe(v.lower) + ", " +
                    describe(v.upper) + "]");
    if (v.kind == VarKind::Binary && std::fabs(x - std::round(x)) > int_tol)
      out.push_back("binary variable '" + v.name + "' = " + describe(x) +
                    " is fractional");
  }
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& c = model.constraint(i);
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coef * values[t.var];
    bool ok = true;
    switch (c.relation) {
      case Relation::LessEqual: ok = lhs <= c.rhs + feas_tol; break;
      case Relation::GreaterEqual: ok = lhs >= c.rhs - feas_tol; break;
      case Relation::Equal: ok = std::fabs(lhs - c.rhs) <= feas_tol; break;
    }
    if (!ok)
      out.push_back("constraint '" + c.name + "' violated: lhs = " + describe(lhs) +
                    ", rhs = " + describe(c.rhs));
  }
  return out;
}

}  // namespace p2psched::milp
