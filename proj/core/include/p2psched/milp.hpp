#ifndef P2PSCHED_MILP_HPP
#define P2PSCHED_MILP_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

// Solver-agnostic MILP representation plus the built-in solvers:
// an exact bounded-variable simplex for the LP relaxation and a
// best-first branch-and-bound for the mixed-integer problem.

namespace p2psched::milp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : std::uint8_t { Continuous, Binary };
enum class Relation : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

/// One linear term: coefficient on an existing variable.
struct Term {
  int var = -1;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// Linear model with continuous and binary variables, maximize sense.
///
/// Invariants (checked by validate()): variable and constraint names are
/// unique, every term references an existing variable, binary variables
/// have bounds within [0,1].
class MilpModel {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper);
  int add_continuous(std::string name, double lower, double upper) {
    return add_variable(std::move(name), VarKind::Continuous, lower, upper);
  }
  int add_binary(std::string name) {
    return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0);
  }

  int add_constraint(std::string name, std::vector<Term> terms, Relation rel,
                     double rhs);

  void set_objective_coef(int var, double coef);
  void add_objective_coef(int var, double coef);
  void set_objective_offset(double offset) { objective_offset_ = offset; }
  void add_objective_offset(double offset) { objective_offset_ += offset; }

  /// Tightens a variable's bounds (used by branching and presolve-style
  /// restrictions). Does not relax beyond the original declaration.
  void set_bounds(int var, double lower, double upper);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Variable& variable(int j) const { return variables_.at(j); }
  const Constraint& constraint(int i) const { return constraints_.at(i); }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  double objective_coef(int var) const { return objective_coefs_.at(var); }
  const std::vector<double>& objective_coefs() const { return objective_coefs_; }
  double objective_offset() const { return objective_offset_; }

  int variable_id(const std::string& name) const;
  bool has_variable(const std::string& name) const {
    return var_ids_.count(name) > 0;
  }

  /// Returns human-readable descriptions of invariant violations; empty
  /// when the model is well-formed.
  std::vector<std::string> validate() const;
  void ensure_valid() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<double> objective_coefs_;
  double objective_offset_ = 0.0;
  std::unordered_map<std::string, int> var_ids_;
  std::unordered_map<std::string, int> con_ids_;
};

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, Unbounded, TimeLimit };

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;       // indexed by variable id; empty if no incumbent
  double objective = -kInf;
  std::int64_t node_count = 0;      // LP relaxations solved
  double gap = 0.0;                 // absolute bound gap (0 when proven optimal)
  std::vector<double> incumbent_history;  // objective of each accepted incumbent

  bool has_values() const { return !values.empty(); }
  double value(int var) const { return values.at(var); }
};

struct SolveOptions {
  double abs_gap = 1e-6;     // absolute optimality gap, objective units
  double feas_tol = 1e-7;    // bound/row feasibility tolerance
  double int_tol = 1e-6;     // integrality tolerance on binaries
  double time_budget_s = 600.0;
  std::int64_t max_nodes = std::numeric_limits<std::int64_t>::max();
  // Known objective cutoff: the solver only looks for solutions strictly
  // better than this and prunes the rest of the tree. With a finite cutoff,
  // an Infeasible result means "no solution better than the cutoff exists
  // (within abs_gap)". Used to chain sequential related solves.
  double cutoff = -kInf;

  void ensure_valid() const;
};

/// Thrown when simplex pivots degrade below the stability floor even after
/// the Bland's-rule fallback and a refactorization retry.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves the LP relaxation (binary kinds are treated as plain bounded
/// continuous variables). Deterministic: Dantzig pricing and ratio ties are
/// broken by lowest variable index, with Bland's rule as the anti-cycling
/// fallback. Returns a vertex-optimal solution, or Infeasible/Unbounded.
Solution solve_lp(const MilpModel& model, const SolveOptions& options = {});

/// Best-first branch-and-bound on the binary variables. Branches on the
/// most-fractional binary (ties by lowest index); children are explored
/// down-branch first. Returns Optimal when the tree is exhausted within the
/// budget, else TimeLimit with the incumbent and remaining absolute gap.
Solution solve_milp(const MilpModel& model, const SolveOptions& options = {});

/// Residual-style feasibility check of a value assignment against bounds,
/// rows, and binary integrality. Returns violation descriptions.
std::vector<std::string> check_solution(const MilpModel& model,
                                        const std::vector<double>& values,
                                        double feas_tol = 1e-6,
                                        double int_tol = 1e-5);

/// Objective value of an assignment (linear terms plus offset).
double eval_objective(const MilpModel& model, const std::vector<double>& values);

}  // namespace p2psched::milp

#endif  // P2PSCHED_MILP_HPP
