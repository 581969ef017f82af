#ifndef P2PSCHED_TESTS_SUPPORT_ORACLE_HPP
#define P2PSCHED_TESTS_SUPPORT_ORACLE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "p2psched/milp.hpp"

// Reference optimum by exhaustive enumeration: every assignment of the free
// binary variables is fixed in turn and the remaining pure LP is solved.
// This is independent of the branch-and-bound search, so it serves as ground
// truth for small models.

struct OracleResult {
  p2psched::milp::SolveStatus status = p2psched::milp::SolveStatus::Infeasible;
  double objective = -p2psched::milp::kInf;
};

inline std::vector<int> free_binary_columns(
    const p2psched::milp::MilpModel& model) {
  std::vector<int> cols;
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variable(j);
    if (v.kind == p2psched::milp::VarKind::Binary && v.upper - v.lower > 0.5) {
      cols.push_back(j);
    }
  }
  return cols;
}

inline OracleResult oracle_best(const p2psched::milp::MilpModel& model,
                                const p2psched::milp::SolveOptions& options =
                                    p2psched::milp::SolveOptions{}) {
  using p2psched::milp::MilpModel;
  using p2psched::milp::Solution;
  using p2psched::milp::solve_lp;
  using p2psched::milp::SolveStatus;

  const std::vector<int> bins = free_binary_columns(model);
  if (bins.size() > 20) {
    throw std::runtime_error("oracle_best: too many free binaries (" +
                             std::to_string(bins.size()) + ")");
  }

  OracleResult best;
  bool saw_unbounded = false;
  const std::uint64_t combos = std::uint64_t{1} << bins.size();
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    MilpModel fixed = model;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const double v = ((mask >> b) & 1u) != 0 ? 1.0 : 0.0;
      fixed.set_bounds(bins[b], v, v);
    }
    Solution sol = solve_lp(fixed, options);
    if (sol.status == SolveStatus::Unbounded) saw_unbounded = true;
    if (sol.status == SolveStatus::Optimal && sol.objective > best.objective) {
      best.status = SolveStatus::Optimal;
      best.objective = sol.objective;
    }
  }
  if (best.status != SolveStatus::Optimal && saw_unbounded) {
    return {SolveStatus::Unbounded, p2psched::milp::kInf};
  }
  return best;
}

#endif  // P2PSCHED_TESTS_SUPPORT_ORACLE_HPP
