#ifndef P2PSCHED_SCHEDULER_HPP
#define P2PSCHED_SCHEDULER_HPP

#include <string>
#include <vector>

#include "p2psched/milp.hpp"
#include "p2psched/model.hpp"

// Translates an Instance plus a set of guest-EV scenarios into the
// day-ahead scheduling MILP, and decomposes solved schedules into the
// per-category profit ledger.

namespace p2psched::scheduler {

/// Per-unit-hour decision roles. Continuous unless noted.
///   PT2G      kWh sold to the grid (requires sell mode, v = 1)
///   PTFG      total kWh bought from the grid
///   PTUIDFG   grid purchase covering uninterruptible load + EV charging share
///   PTIDFG    grid purchase covering interruptible load (blocked when v = 1)
///   DR        curtailed kWh under demand response
///   SelfSupply PV kWh consumed on site
///   P2PSell   kWh sold into the peer-to-peer market (blocked when r = 1)
///   P2PBuy    kWh bought from the peer-to-peer market (requires r = 1)
///   ENS       interruptible kWh left unserved
///   V         binary sell-mode flag
///   R         binary p2p-buyer-mode flag
enum class Role : int {
  PT2G = 0,
  PTFG,
  PTUIDFG,
  PTIDFG,
  DR,
  SelfSupply,
  P2PSell,
  P2PBuy,
  ENS,
  V,
  R,
};
constexpr int kRolesPerUnitHour = 11;

/// Per-EV roles, indexed (ev, community, hour) within the EV's window.
///   UEV   binary: EV is plugged at this community this hour
///   CHEV  kWh charged, DCHEV kWh discharged, SOC stored kWh at end of hour
enum class EvRole : int { UEV = 0, CHEV, DCHEV, SOC };
constexpr int kEvRolesPerHour = 4;

/// Bijective map from (role, c, u, t) / (role, ev, c, t) / (ev, c) tuples to
/// model variable ids and names.
class VariableIndex {
 public:
  int var(Role role, int c, int u, int t) const;
  /// EV-hour variable; valid only for t inside the EV's window.
  int ev_var(EvRole role, int ev, int c, int t) const;
  /// Binary: EV `ev` is assigned to community `c` for the day.
  int vev(int ev, int c) const;
  bool ev_hour_in_window(int ev, int t) const;

  int num_communities() const { return communities_; }
  int units_per_community() const { return units_; }
  int horizon() const { return horizon_; }
  int num_evs() const { return static_cast<int>(ev_arrival_.size()); }
  int ev_arrival(int ev) const { return ev_arrival_.at(ev); }
  int ev_departure(int ev) const { return ev_departure_.at(ev); }
  /// Scenario weight baked into the EV-linked model coefficients.
  double ev_weight(int ev) const { return ev_weights_.at(ev); }

 private:
  friend struct ModelBuilder;
  int communities_ = 0, units_ = 0, horizon_ = 0;
  int unit_block_base_ = 0;               // id of first per-unit-hour variable
  std::vector<int> ev_vev_base_;          // per ev: id of VEV_{ev,0}
  std::vector<int> ev_hour_base_;         // per ev: id of first (c,t) block
  std::vector<int> ev_arrival_, ev_departure_;
  std::vector<double> ev_weights_;
};

/// The profit ledger of one schedule: revenues positive, costs negative,
/// ens_penalty stored as the subtracted magnitude.
/// Identity: total = grid + dr + p2p + social_welfare + parking + standby
///                   + ev_exchange - ens_penalty.
struct ProfitBreakdown {
  double grid = 0.0;
  double dr = 0.0;
  double p2p = 0.0;
  double social_welfare = 0.0;
  double parking = 0.0;
  double standby = 0.0;
  double ens_penalty = 0.0;
  double ev_exchange = 0.0;
  double total = 0.0;
};

struct ProfitReport {
  ProfitBreakdown aggregate;
  std::vector<std::vector<ProfitBreakdown>> per_unit;  // [c][u]
};

struct BuiltModel {
  milp::MilpModel model;
  VariableIndex index;
};

/// Builds the full scheduling MILP for the instance and the given EV set.
/// EV-linked revenue and allocation terms are scaled by each scenario's
/// weight; pass weight-1 scenarios to model a concrete fleet.
/// Throws std::invalid_argument if the instance is invalid or an EV window
/// cannot reach its target state of charge at the maximum charge rate.
BuiltModel build_model(const model::Instance& instance,
                       const std::vector<model::EvScenario>& evs);

/// Recomputes every ledger category directly from variable values and
/// prices, independently of the solver's objective. Throws std::logic_error
/// if the recomputed total deviates from the solution objective by more
/// than 1e-6 (a model-builder bug).
ProfitReport evaluate_profit(const milp::Solution& solution,
                             const model::Instance& instance,
                             const VariableIndex& index);

enum class Strategy { Monolithic, TwoStage };

Strategy parse_strategy(const std::string& name);
const char* to_string(Strategy s);

struct ScheduleResult {
  milp::Solution solution;
  VariableIndex index;
};

/// Solves the scheduling problem. Monolithic solves the full MILP;
/// TwoStage enumerates the (small) set of daily EV-to-community assignments,
/// fixes the assignment binaries, solves the remaining mode MILP per
/// assignment, and returns the best. Objectives agree when both complete;
/// assignment ties prefer the lexicographically smallest assignment vector.
ScheduleResult fix_assignment_and_solve(const model::Instance& instance,
                                        const std::vector<model::EvScenario>& evs,
                                        Strategy strategy,
                                        const milp::SolveOptions& options = {});

}  // namespace p2psched::scheduler

#endif  // P2PSCHED_SCHEDULER_HPP
