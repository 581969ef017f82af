#ifndef P2PSCHED_SRC_SIMPLEX_HPP
#define P2PSCHED_SRC_SIMPLEX_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <vector>

#include "p2psched/milp.hpp"

// Internal bounded-variable revised simplex. Works on a computational form
// with interval rows:  row_lo <= a'x <= row_up,  col_lo <= x <= col_up.
// One logical variable per row turns the system into  A x - s = 0  with
// s in [row_lo, row_up]; the basis is maintained as a dense LU of the basis
// matrix plus product-form eta updates, refactorized periodically.

namespace p2psched::milp::detail {

/// One connected component of the presolved problem, in local column ids.
struct CompLp {
  int n = 0;  // structural columns
  std::vector<double> obj;  // maximize
  std::vector<double> lo, up;
  std::vector<std::uint8_t> is_binary;
  std::vector<double> row_lo, row_up;
  // CSC over structural columns
  std::vector<int> col_ptr;  // n+1
  std::vector<int> row_idx;
  std::vector<double> vals;

  int m() const { return static_cast<int>(row_lo.size()); }
};

enum class VStat : std::int8_t { AtLower, AtUpper, Basic, FreeZero };

/// Thrown when the shared wall-clock deadline expires mid-solve.
class DeadlineExceeded : public std::exception {
 public:
  const char* what() const noexcept override { return "solve deadline exceeded"; }
};

/// Internal control-flow signal: a phase-2 ray was detected.
struct Unboundedness {};

struct LpRun {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = -kInf;  // structural objective, no offsets
};

class SimplexEngine {
 public:
  using Clock = std::chrono::steady_clock;

  SimplexEngine(const CompLp& lp, double feas_tol, Clock::time_point deadline);
  ~SimplexEngine();  // out of line: LuState is incomplete here

  /// Two-phase primal from the all-logical basis; ignores current state.
  LpRun primal_solve();

  /// Dual simplex from the current (restored) basis after bound changes.
  /// Falls back to a fresh primal solve if the warm basis stalls or turns
  /// dual-infeasible beyond tolerance.
  LpRun dual_resolve();

  void reset_bounds_to_root();
  void tighten(int col, double lo, double up);  // structural column

  const std::vector<VStat>& state() const { return vstat_; }
  /// Restores a saved basis/bound-status snapshot (refactorizes only when it
  /// differs from the current state) and recomputes primal values.
  void load_state(const std::vector<VStat>& snapshot);

  double value(int col) const { return xval_[col]; }
  double lower(int col) const { return lo_[col]; }  // current node bounds
  double upper(int col) const { return up_[col]; }
  std::vector<double> structural_values() const {
    return {xval_.begin(), xval_.begin() + lp_.n};
  }
  double structural_objective() const;
  std::int64_t iterations() const { return iterations_; }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kRatioTieTol = 1e-12;
  static constexpr int kRefactorInterval = 100;
  static constexpr std::int64_t kDegenerateLimit = 5000;
  static constexpr std::int64_t kIterationLimit = 2'000'000;

  struct Eta {
    int pos;                 // basis position pivoted
    std::vector<double> w;   // FTRAN'd entering column at pivot time
  };

  int n_, m_, total_;  // structural, rows, n+m

  const CompLp& lp_;
  double feas_tol_;
  Clock::time_point deadline_;

  std::vector<double> root_lo_, root_up_;  // immutable node-0 bounds, n+m
  std::vector<double> lo_, up_;            // current bounds, n+m
  std::vector<double> cost_;               // n+m, logicals 0
  std::vector<VStat> vstat_;               // n+m
  std::vector<int> basis_;                 // m: variable at each basis position
  std::vector<int> basis_pos_;             // n+m: position or -1
  std::vector<double> xval_;               // n+m

  struct LuState;                     // Eigen kept out of this header
  std::unique_ptr<LuState> lu_;
  std::vector<Eta> etas_;

  std::int64_t iterations_ = 0;
  bool factorized_ = false;

  bool is_fixed(int j) const { return up_[j] - lo_[j] <= 1e-11; }
  double bound_of(int j, VStat s) const {
    return s == VStat::AtUpper ? up_[j] : s == VStat::AtLower ? lo_[j] : 0.0;
  }
  void scatter_column(int j, std::vector<double>& dense, double scale) const;

  void refactorize();
  void recompute_basics();                       // x_B from nonbasic values
  void snap_nonbasics();                         // nonbasic values onto bounds
  void ftran(std::vector<double>& v) const;      // v <- B^{-1} v
  void btran(std::vector<double>& v) const;      // v <- B^{-T} v
  std::vector<double> ftran_column(int j) const; // B^{-1} A_j
  std::vector<double> reduced_costs(const std::vector<double>& cost_basic) const;

  double infeasibility() const;
  void phase_costs(std::vector<double>& cb, bool phase1) const;

  // returns false when no eligible entering column exists (optimal for the
  // given costs)
  bool primal_iterate(bool phase1, bool bland, bool& degenerate);
  LpRun primal_loop(bool phase1);

  void check_deadline() const;
  void pivot(int entering, int leave_pos, VStat leaving_stat, double step,
             int direction, const std::vector<double>& w);
};

}  // namespace p2psched::milp::detail

#endif  // P2PSCHED_SRC_SIMPLEX_HPP
