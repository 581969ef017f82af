#ifndef P2PSCHED_SRC_PRESOLVE_HPP
#define P2PSCHED_SRC_PRESOLVE_HPP

#include <utility>
#include <vector>

#include "p2psched/milp.hpp"
#include "simplex.hpp"

// Root presolve: singleton rows, forcing rows, bound propagation, dual
// fixing, implied-free column substitution on equality rows, and connected-
// component decomposition. Reductions are recorded on a postsolve stack so
// original variable values can be reconstructed exactly.

namespace p2psched::milp::detail {

struct PostsolveEntry {
  enum class Kind { Fixed, Substituted } kind = Kind::Fixed;
  int var = -1;
  double value = 0.0;  // Fixed
  // Substituted: var = (rhs - sum terms) / coef
  double rhs = 0.0, coef = 1.0;
  std::vector<std::pair<int, double>> terms;
};

struct Component {
  CompLp lp;
  std::vector<int> orig_cols;  // local column -> original variable id
};

struct Presolved {
  SolveStatus status = SolveStatus::Optimal;  // Infeasible/Unbounded short-circuit
  double fixed_obj = 0.0;  // objective offset + eliminated contributions
  std::vector<Component> components;  // ordered by smallest original var id
  std::vector<PostsolveEntry> stack;
  int orig_n = 0;
};

/// integer_aware additionally rounds propagated binary bounds to {0,1};
/// it must be false when the caller needs the exact continuous relaxation.
Presolved presolve(const MilpModel& model, const SolveOptions& options,
                   bool integer_aware);

/// Scatters per-component solutions back to original variable space and
/// replays the reduction stack.
std::vector<double> postsolve(const Presolved& pre,
                              const std::vector<std::vector<double>>& comp_values);

}  // namespace p2psched::milp::detail

#endif  // P2PSCHED_SRC_PRESOLVE_HPP
