#include "p2psched/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace p2psched::scheduler {

using milp::MilpModel;
using milp::Relation;
using milp::Solution;
using milp::SolveOptions;
using milp::SolveStatus;
using milp::Term;
using model::EvScenario;
using model::Instance;

// ---------------------------------------------------------------- indexing

namespace {

[[noreturn]] void index_error(const char* what) {
  throw std::out_of_range(std::string("VariableIndex: ") + what);
}

const char* role_tag(Role r) {
  switch (r) {
    case Role::PT2G: return "pt2g";
    case Role::PTFG: return "ptfg";
    case Role::PTUIDFG: return "ptuidfg";
    case Role::PTIDFG: return "ptidfg";
    case Role::DR: return "dr";
    case Role::SelfSupply: return "ss";
    case Role::P2PSell: return "p2ps";
    case Role::P2PBuy: return "p2pb";
    case Role::ENS: return "ens";
    case Role::V: return "v";
    default: return "r";
  }
}

const char* ev_role_tag(EvRole r) {
  switch (r) {
    case EvRole::UEV: return "uev";
    case EvRole::CHEV: return "chev";
    case EvRole::DCHEV: return "dchev";
    default: return "soc";
  }
}

std::string cut_name(const char* tag, int c, int u, int t) {
  return std::string(tag) + "_c" + std::to_string(c) + "_u" +
         std::to_string(u) + "_t" + std::to_string(t);
}

std::string ev_name(const char* tag, int ev, int c, int t) {
  return std::string(tag) + "_ev" + std::to_string(ev) + "_c" +
         std::to_string(c) + "_t" + std::to_string(t);
}

std::string vev_name(int ev, int c) {
  return "vev_ev" + std::to_string(ev) + "_c" + std::to_string(c);
}

}  // namespace

int VariableIndex::var(Role role, int c, int u, int t) const {
  if (c < 0 || c >= communities_ || u < 0 || u >= units_ || t < 0 ||
      t >= horizon_)
    index_error("unit-hour tuple out of range");
  int cell = (c * units_ + u) * horizon_ + t;
  return unit_block_base_ + cell * kRolesPerUnitHour + static_cast<int>(role);
}

int VariableIndex::ev_var(EvRole role, int ev, int c, int t) const {
  if (ev < 0 || ev >= num_evs() || c < 0 || c >= communities_)
    index_error("ev-hour tuple out of range");
  if (!ev_hour_in_window(ev, t)) index_error("hour outside the EV's window");
  int window = ev_departure_[ev] - ev_arrival_[ev];
  int cell = c * window + (t - ev_arrival_[ev]);
  return ev_hour_base_[ev] + cell * kEvRolesPerHour + static_cast<int>(role);
}

int VariableIndex::vev(int ev, int c) const {
  if (ev < 0 || ev >= num_evs() || c < 0 || c >= communities_)
    index_error("vev tuple out of range");
  return ev_vev_base_[ev] + c;
}

bool VariableIndex::ev_hour_in_window(int ev, int t) const {
  if (ev < 0 || ev >= num_evs()) index_error("ev id out of range");
  return t >= ev_arrival_[ev] && t < ev_departure_[ev];
}

// ------------------------------------------------------------- validation

namespace {

void require_instance_valid(const Instance& in) {
  std::vector<std::string> issues = model::validate(in);
  if (issues.empty()) return;
  std::string msg = "instance invalid:";
  for (const std::string& s : issues) msg += "\n  - " + s;
  throw std::invalid_argument(msg);
}

void require_evs_valid(const std::vector<EvScenario>& evs, int horizon) {
  for (const EvScenario& ev : evs) {
    if (!(0 <= ev.arrival_hour && ev.arrival_hour < ev.departure_hour &&
          ev.departure_hour <= horizon))
      throw std::invalid_argument("EV '" + ev.id +
                                  "': window must lie inside the horizon");
    if (!(0.0 <= ev.arrival_soc && ev.arrival_soc <= ev.target_soc &&
          ev.target_soc <= 1.0))
      throw std::invalid_argument("EV '" + ev.id +
                                  "': need 0 <= soc <= target_soc <= 1");
    if (!(ev.capacity > 0) || ev.max_charge_rate < 0 ||
        ev.max_discharge_rate < 0 || ev.weight < 0)
      throw std::invalid_argument("EV '" + ev.id +
                                  "': capacity must be positive, rates and "
                                  "weight non-negative");
    double window = ev.departure_hour - ev.arrival_hour;
    if (window * ev.max_charge_rate <
        (ev.target_soc - ev.arrival_soc) * ev.capacity - 1e-9)
      throw std::invalid_argument(
          "EV '" + ev.id +
          "': window too short to reach target state of charge at the "
          "maximum charge rate");
  }
}

// --------------------------------------------------------------- builder

struct Cut {  // cursor over one (c,u,t) cell
  int c, u, t;
};

}  // namespace

struct ModelBuilder {
  const Instance& in;
  const std::vector<EvScenario>& evs;
  MilpModel model;
  VariableIndex ix;

  int C, U, T;

  ModelBuilder(const Instance& instance, const std::vector<EvScenario>& fleet)
      : in(instance), evs(fleet) {
    C = in.num_communities;
    U = in.units_per_community;
    T = in.horizon;
    ix.communities_ = C;
    ix.units_ = U;
    ix.horizon_ = T;
    for (const EvScenario& ev : evs) {
      ix.ev_arrival_.push_back(ev.arrival_hour);
      ix.ev_departure_.push_back(ev.departure_hour);
      ix.ev_weights_.push_back(ev.weight);
    }
  }

  const model::UnitProfile& prof(int c, int u) const {
    return in.profiles[c][u];
  }

  /// Weighted guest-EV charge-rate headroom allocated to each unit of
  /// community c at hour t (used for bounds and the sell-mode gate).
  double ev_charge_headroom(int t) const {
    double s = 0.0;
    for (const EvScenario& ev : evs)
      if (ev.available(t)) s += ev.weight * ev.max_charge_rate;
    return s / U;
  }
  double ev_discharge_headroom(int t) const {
    double s = 0.0;
    for (const EvScenario& ev : evs)
      if (ev.available(t)) s += ev.weight * ev.max_discharge_rate;
    return s / U;
  }

  void add_unit_hour_variables() {
    ix.unit_block_base_ = model.num_variables();
    for (int c = 0; c < C; ++c)
      for (int u = 0; u < U; ++u)
        for (int t = 0; t < T; ++t) {
          const model::UnitProfile& p = prof(c, u);
          double pv = p.pv_generation[t];
          double id = p.interruptible_load[t];
          double uid = p.uninterruptible_load[t];
          double callable = p.dr_callable[t];
          double ch = ev_charge_headroom(t);
          double sell_cap = pv + ev_discharge_headroom(t);

          model.add_continuous(cut_name("pt2g", c, u, t), 0.0, sell_cap);
          model.add_continuous(cut_name("ptfg", c, u, t), 0.0, uid + ch + id);
          model.add_continuous(cut_name("ptuidfg", c, u, t), 0.0, uid + ch);
          model.add_continuous(cut_name("ptidfg", c, u, t), 0.0, id);
          model.add_continuous(cut_name("dr", c, u, t), 0.0, callable);
          model.add_continuous(cut_name("ss", c, u, t), 0.0, std::min(pv, id));
          model.add_continuous(cut_name("p2ps", c, u, t), 0.0, pv);
          model.add_continuous(cut_name("p2pb", c, u, t), 0.0, id);
          model.add_continuous(cut_name("ens", c, u, t), 0.0, id);
          int v = model.add_binary(cut_name("v", c, u, t));
          int r = model.add_binary(cut_name("r", c, u, t));
          // degenerate-hour determinism: a mode flag with nothing to gate
          // is pinned to 0
          if (sell_cap <= 0.0) model.set_bounds(v, 0.0, 0.0);
          if (id <= 0.0) model.set_bounds(r, 0.0, 0.0);
        }
  }

  void add_ev_variables() {
    for (std::size_t e = 0; e < evs.size(); ++e) {
      const EvScenario& ev = evs[e];
      ix.ev_vev_base_.push_back(model.num_variables());
      for (int c = 0; c < C; ++c) model.add_binary(vev_name(int(e), c));
      ix.ev_hour_base_.push_back(model.num_variables());
      for (int c = 0; c < C; ++c)
        for (int t = ev.arrival_hour; t < ev.departure_hour; ++t) {
          model.add_binary(ev_name("uev", int(e), c, t));
          model.add_continuous(ev_name("chev", int(e), c, t), 0.0,
                               ev.max_charge_rate);
          model.add_continuous(ev_name("dchev", int(e), c, t), 0.0,
                               ev.max_discharge_rate);
          model.add_continuous(ev_name("soc", int(e), c, t), 0.0, ev.capacity);
        }
    }
  }

  void set_objective() {
    const model::PriceSeries& pr = in.prices;
    for (int c = 0; c < C; ++c)
      for (int u = 0; u < U; ++u)
        for (int t = 0; t < T; ++t) {
          double g = pr.grid_price[t];
          model.set_objective_coef(ix.var(Role::PT2G, c, u, t), g);
          model.set_objective_coef(ix.var(Role::PTFG, c, u, t), -g);
          model.set_objective_coef(ix.var(Role::DR, c, u, t),
                                   pr.dr_incentive[t] + pr.dr_fine[t]);
          model.add_objective_offset(-pr.dr_fine[t] *
                                     prof(c, u).dr_callable[t]);
          double p2p = pr.p2p_price[c][t];
          model.set_objective_coef(ix.var(Role::P2PSell, c, u, t),
                                   p2p + pr.social_welfare_value[t]);
          model.set_objective_coef(ix.var(Role::P2PBuy, c, u, t), -p2p);
          model.set_objective_coef(ix.var(Role::SelfSupply, c, u, t),
                                   pr.social_welfare_value[t]);
          model.set_objective_coef(ix.var(Role::ENS, c, u, t),
                                   -pr.ens_price[t]);
        }
    model.add_objective_offset(pr.standby_payment * C * U * T);
    for (std::size_t e = 0; e < evs.size(); ++e) {
      const EvScenario& ev = evs[e];
      double w = ev.weight;
      for (int c = 0; c < C; ++c)
        for (int t = ev.arrival_hour; t < ev.departure_hour; ++t) {
          model.set_objective_coef(ix.ev_var(EvRole::UEV, int(e), c, t),
                                   w * pr.parking_fee);
          model.set_objective_coef(ix.ev_var(EvRole::CHEV, int(e), c, t),
                                   w * pr.ev_charge_price[t]);
          model.set_objective_coef(ix.ev_var(EvRole::DCHEV, int(e), c, t),
                                   -w * pr.ev_discharge_price[t]);
        }
    }
  }

  std::vector<int> evs_available(int t) const {
    std::vector<int> out;
    for (std::size_t e = 0; e < evs.size(); ++e)
      if (evs[e].available(t)) out.push_back(int(e));
    return out;
  }

  void add_unit_hour_constraints() {
    for (int c = 0; c < C; ++c)
      for (int u = 0; u < U; ++u)
        for (int t = 0; t < T; ++t) {
          const model::UnitProfile& p = prof(c, u);
          double pv = p.pv_generation[t];
          double id = p.interruptible_load[t];
          double uid = p.uninterruptible_load[t];
          std::vector<int> avail = evs_available(t);

          int pt2g = ix.var(Role::PT2G, c, u, t);
          int ptfg = ix.var(Role::PTFG, c, u, t);
          int ptuidfg = ix.var(Role::PTUIDFG, c, u, t);
          int ptidfg = ix.var(Role::PTIDFG, c, u, t);
          int dr = ix.var(Role::DR, c, u, t);
          int ss = ix.var(Role::SelfSupply, c, u, t);
          int sell = ix.var(Role::P2PSell, c, u, t);
          int buy = ix.var(Role::P2PBuy, c, u, t);
          int ens = ix.var(Role::ENS, c, u, t);
          int v = ix.var(Role::V, c, u, t);
          int r = ix.var(Role::R, c, u, t);

          // interruptible-load balance: every sheddable kWh is either
          // supplied (PV, DR, grid, P2P) or unserved
          model.add_constraint(cut_name("bal", c, u, t),
                               {{ens, 1}, {ss, 1}, {dr, 1}, {ptidfg, 1},
                                {buy, 1}},
                               Relation::Equal, id);
          // on-site PV use plus curtailment cannot exceed generation
          model.add_constraint(cut_name("pvdr", c, u, t), {{ss, 1}, {dr, 1}},
                               Relation::LessEqual, pv);
          // uninterruptible purchase covers the firm load plus the unit's
          // allocated share of weighted guest-EV charging
          {
            std::vector<Term> terms{{ptuidfg, 1}};
            for (int e : avail)
              terms.push_back(
                  {ix.ev_var(EvRole::CHEV, e, c, t), -evs[e].weight / U});
            model.add_constraint(cut_name("uninter", c, u, t),
                                 std::move(terms), Relation::Equal, uid);
          }
          // sell mode blocks interruptible grid purchases
          model.add_constraint(cut_name("buygate", c, u, t),
                               {{ptidfg, 1}, {v, id}}, Relation::LessEqual,
                               id);
          // total grid purchase splits into the two load classes
          model.add_constraint(cut_name("buysplit", c, u, t),
                               {{ptfg, 1}, {ptuidfg, -1}, {ptidfg, -1}},
                               Relation::Equal, 0.0);
          // PV energy budget: on-site use, P2P sales, and grid sales cannot
          // exceed generation plus the allocated guest-EV discharge
          {
            std::vector<Term> terms{{pt2g, 1}, {ss, 1}, {sell, 1}};
            for (int e : avail)
              terms.push_back(
                  {ix.ev_var(EvRole::DCHEV, e, c, t), -evs[e].weight / U});
            model.add_constraint(cut_name("pvbudget", c, u, t),
                                 std::move(terms), Relation::LessEqual, pv);
          }
          // grid sales require sell mode
          double sell_cap = pv + ev_discharge_headroom(t);
          if (sell_cap > 0.0)
            model.add_constraint(cut_name("sellgate", c, u, t),
                                 {{pt2g, 1}, {v, -sell_cap}},
                                 Relation::LessEqual, 0.0);
          // curtailment plus on-site use cannot exceed the sheddable load
          model.add_constraint(cut_name("drcap", c, u, t), {{dr, 1}, {ss, 1}},
                               Relation::LessEqual, id);
          // P2P sales draw on PV net of on-site use
          model.add_constraint(cut_name("p2pscap", c, u, t),
                               {{sell, 1}, {ss, 1}}, Relation::LessEqual, pv);
          // P2P purchases serve at most the load left after PV and DR
          model.add_constraint(cut_name("p2pbcap", c, u, t),
                               {{buy, 1}, {ss, 1}, {dr, 1}},
                               Relation::LessEqual, id);
          // buyer mode blocks P2P sales, and is required for P2P purchases
          if (pv > 0.0)
            model.add_constraint(cut_name("p2psgate", c, u, t),
                                 {{sell, 1}, {r, pv}}, Relation::LessEqual,
                                 pv);
          if (id > 0.0)
            model.add_constraint(cut_name("p2pbgate", c, u, t),
                                 {{buy, 1}, {r, -id}}, Relation::LessEqual,
                                 0.0);
        }

    // hourly P2P market clearing across the whole system
    for (int t = 0; t < T; ++t) {
      std::vector<Term> terms;
      terms.reserve(2 * C * U);
      for (int c = 0; c < C; ++c)
        for (int u = 0; u < U; ++u) {
          terms.push_back({ix.var(Role::P2PSell, c, u, t), 1});
          terms.push_back({ix.var(Role::P2PBuy, c, u, t), -1});
        }
      model.add_constraint("p2pbal_t" + std::to_string(t), std::move(terms),
                           Relation::Equal, 0.0);
    }
  }

  void add_ev_constraints() {
    // each community hosts at most one plugged EV per hour
    for (int c = 0; c < C; ++c)
      for (int t = 0; t < T; ++t) {
        std::vector<Term> terms;
        for (int e : evs_available(t))
          terms.push_back({ix.ev_var(EvRole::UEV, e, c, t), 1});
        if (terms.empty()) continue;
        model.add_constraint(
            "host_c" + std::to_string(c) + "_t" + std::to_string(t),
            std::move(terms), Relation::LessEqual, 1.0);
      }

    for (std::size_t e = 0; e < evs.size(); ++e) {
      const EvScenario& ev = evs[e];
      // an EV plugs into at most one community per hour
      for (int t = ev.arrival_hour; t < ev.departure_hour; ++t) {
        std::vector<Term> terms;
        for (int c = 0; c < C; ++c)
          terms.push_back({ix.ev_var(EvRole::UEV, int(e), c, t), 1});
        model.add_constraint(
            "evplace_ev" + std::to_string(e) + "_t" + std::to_string(t),
            std::move(terms), Relation::LessEqual, 1.0);
      }
      // plugging requires the day-level assignment to that community
      for (int c = 0; c < C; ++c)
        for (int t = ev.arrival_hour; t < ev.departure_hour; ++t)
          model.add_constraint(ev_name("evavail", int(e), c, t),
                               {{ix.ev_var(EvRole::UEV, int(e), c, t), 1},
                                {ix.vev(int(e), c), -1}},
                               Relation::LessEqual, 0.0);
      // one community per EV for the whole day
      {
        std::vector<Term> terms;
        for (int c = 0; c < C; ++c) terms.push_back({ix.vev(int(e), c), 1});
        model.add_constraint("evonecomm_ev" + std::to_string(e),
                             std::move(terms), Relation::LessEqual, 1.0);
      }
      // charge/discharge only while plugged, within rated power
      for (int c = 0; c < C; ++c)
        for (int t = ev.arrival_hour; t < ev.departure_hour; ++t) {
          model.add_constraint(ev_name("evch", int(e), c, t),
                               {{ix.ev_var(EvRole::CHEV, int(e), c, t), 1},
                                {ix.ev_var(EvRole::UEV, int(e), c, t),
                                 -ev.max_charge_rate}},
                               Relation::LessEqual, 0.0);
          model.add_constraint(ev_name("evdis", int(e), c, t),
                               {{ix.ev_var(EvRole::DCHEV, int(e), c, t), 1},
                                {ix.ev_var(EvRole::UEV, int(e), c, t),
                                 -ev.max_discharge_rate}},
                               Relation::LessEqual, 0.0);
        }
      // stored-energy recursion per candidate community; scaling the
      // arrival/target terms by the assignment binary zeroes the whole
      // chain for communities the EV does not visit
      for (int c = 0; c < C; ++c) {
        for (int t = ev.arrival_hour; t < ev.departure_hour; ++t) {
          int soc = ix.ev_var(EvRole::SOC, int(e), c, t);
          int ch = ix.ev_var(EvRole::CHEV, int(e), c, t);
          int dch = ix.ev_var(EvRole::DCHEV, int(e), c, t);
          if (t == ev.arrival_hour) {
            model.add_constraint(ev_name("socarr", int(e), c, t),
                                 {{soc, 1},
                                  {ch, -1},
                                  {dch, 1},
                                  {ix.vev(int(e), c),
                                   -ev.arrival_soc * ev.capacity}},
                                 Relation::Equal, 0.0);
          } else {
            int prev = ix.ev_var(EvRole::SOC, int(e), c, t - 1);
            model.add_constraint(ev_name("socrec", int(e), c, t),
                                 {{soc, 1}, {prev, -1}, {ch, -1}, {dch, 1}},
                                 Relation::Equal, 0.0);
          }
        }
        model.add_constraint(
            "soctgt_ev" + std::to_string(e) + "_c" + std::to_string(c),
            {{ix.ev_var(EvRole::SOC, int(e), c, ev.departure_hour - 1), 1},
             {ix.vev(int(e), c), -ev.target_soc * ev.capacity}},
            Relation::GreaterEqual, 0.0);
      }
    }

    // each community commits to at most one EV for the day
    if (!evs.empty())
      for (int c = 0; c < C; ++c) {
        std::vector<Term> terms;
        for (std::size_t e = 0; e < evs.size(); ++e)
          terms.push_back({ix.vev(int(e), c), 1});
        model.add_constraint("commoneev_c" + std::to_string(c),
                             std::move(terms), Relation::LessEqual, 1.0);
      }
  }

  BuiltModel finish() && {
    add_unit_hour_variables();
    add_ev_variables();
    set_objective();
    add_unit_hour_constraints();
    add_ev_constraints();
    model.ensure_valid();
    return BuiltModel{std::move(model), std::move(ix)};
  }
};

BuiltModel build_model(const Instance& instance,
                       const std::vector<EvScenario>& evs) {
  require_instance_valid(instance);
  require_evs_valid(evs, instance.horizon);
  return ModelBuilder(instance, evs).finish();
}

// ---------------------------------------------------------------- profit

ProfitReport evaluate_profit(const Solution& solution, const Instance& in,
                             const VariableIndex& ix) {
  if (!solution.has_values())
    throw std::invalid_argument(
        "evaluate_profit: solution carries no variable values");
  if (ix.num_communities() != in.num_communities ||
      ix.units_per_community() != in.units_per_community ||
      ix.horizon() != in.horizon)
    throw std::invalid_argument(
        "evaluate_profit: index shape does not match the instance");

  const model::PriceSeries& pr = in.prices;
  const int C = in.num_communities, U = in.units_per_community,
            T = in.horizon;
  auto val = [&](int id) { return solution.value(id); };

  ProfitReport report;
  report.per_unit.assign(C, std::vector<ProfitBreakdown>(U));

  for (int c = 0; c < C; ++c) {
    // community-level EV cash flows, attributed equally across units
    double parking_c = 0.0, exchange_c = 0.0;
    for (int e = 0; e < ix.num_evs(); ++e) {
      double w = ix.ev_weight(e);
      for (int t = ix.ev_arrival(e); t < ix.ev_departure(e); ++t) {
        parking_c +=
            w * pr.parking_fee * val(ix.ev_var(EvRole::UEV, e, c, t));
        exchange_c +=
            w * (pr.ev_charge_price[t] * val(ix.ev_var(EvRole::CHEV, e, c, t)) -
                 pr.ev_discharge_price[t] *
                     val(ix.ev_var(EvRole::DCHEV, e, c, t)));
      }
    }

    for (int u = 0; u < U; ++u) {
      ProfitBreakdown& b = report.per_unit[c][u];
      const model::UnitProfile& p = in.profiles[c][u];
      for (int t = 0; t < T; ++t) {
        double g = pr.grid_price[t];
        b.grid += g * (val(ix.var(Role::PT2G, c, u, t)) -
                       val(ix.var(Role::PTFG, c, u, t)));
        b.dr += (pr.dr_incentive[t] + pr.dr_fine[t]) *
                    val(ix.var(Role::DR, c, u, t)) -
                pr.dr_fine[t] * p.dr_callable[t];
        double sell = val(ix.var(Role::P2PSell, c, u, t));
        b.p2p += pr.p2p_price[c][t] *
                 (sell - val(ix.var(Role::P2PBuy, c, u, t)));
        b.social_welfare +=
            pr.social_welfare_value[t] *
            (val(ix.var(Role::SelfSupply, c, u, t)) + sell);
        b.ens_penalty += pr.ens_price[t] * val(ix.var(Role::ENS, c, u, t));
      }
      b.standby = pr.standby_payment * T;
      b.parking = parking_c / U;
      b.ev_exchange = exchange_c / U;
      b.total = b.grid + b.dr + b.p2p + b.social_welfare + b.parking +
                b.standby - b.ens_penalty + b.ev_exchange;

      ProfitBreakdown& a = report.aggregate;
      a.grid += b.grid;
      a.dr += b.dr;
      a.p2p += b.p2p;
      a.social_welfare += b.social_welfare;
      a.parking += b.parking;
      a.standby += b.standby;
      a.ens_penalty += b.ens_penalty;
      a.ev_exchange += b.ev_exchange;
      a.total += b.total;
    }
  }

  if (std::abs(report.aggregate.total - solution.objective) > 1e-6)
    throw std::logic_error(
        "profit decomposition does not reproduce the objective: ledger " +
        std::to_string(report.aggregate.total) + " vs solver " +
        std::to_string(solution.objective));
  return report;
}

// --------------------------------------------------------------- solving

Strategy parse_strategy(const std::string& name) {
  if (name == "monolithic") return Strategy::Monolithic;
  if (name == "two_stage") return Strategy::TwoStage;
  throw std::invalid_argument("unknown strategy '" + name +
                              "' (expected 'monolithic' or 'two_stage')");
}

const char* to_string(Strategy s) {
  return s == Strategy::Monolithic ? "monolithic" : "two_stage";
}

namespace {

/// All injective assignments EV -> {unassigned} ∪ communities, in
/// lexicographic order of the assignment vector (unassigned first).
void enumerate_assignments(int num_evs, int num_communities,
                           std::vector<int>& current,
                           std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == num_evs) {
    out.push_back(current);
    return;
  }
  for (int c = -1; c < num_communities; ++c) {
    if (c >= 0 &&
        std::find(current.begin(), current.end(), c) != current.end())
      continue;
    current.push_back(c);
    enumerate_assignments(num_evs, num_communities, current, out);
    current.pop_back();
  }
}

}  // namespace

ScheduleResult fix_assignment_and_solve(const Instance& instance,
                                        const std::vector<EvScenario>& evs,
                                        Strategy strategy,
                                        const SolveOptions& options) {
  BuiltModel built = build_model(instance, evs);
  if (strategy == Strategy::Monolithic || evs.empty()) {
    Solution sol = milp::solve_milp(built.model, options);
    return ScheduleResult{std::move(sol), std::move(built.index)};
  }

  const int C = instance.num_communities;
  std::vector<std::vector<int>> assignments;
  std::vector<int> scratch;
  enumerate_assignments(static_cast<int>(evs.size()), C, scratch, assignments);

  using Clock = std::chrono::steady_clock;
  auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(
                                         options.time_budget_s));

  Solution best;
  best.status = SolveStatus::Infeasible;
  bool timed_out = false;

  for (const std::vector<int>& assign : assignments) {
    double remaining =
        std::chrono::duration<double>(deadline - Clock::now()).count();
    if (remaining <= 0.0) {
      timed_out = true;
      break;
    }
    MilpModel fixed = built.model;  // copy; bounds differ per assignment
    for (std::size_t e = 0; e < evs.size(); ++e) {
      for (int c = 0; c < C; ++c) {
        double on = (assign[e] == c) ? 1.0 : 0.0;
        fixed.set_bounds(built.index.vev(int(e), c), on, on);
        for (int t = evs[e].arrival_hour; t < evs[e].departure_hour; ++t)
          fixed.set_bounds(built.index.ev_var(EvRole::UEV, int(e), c, t), on,
                           on);
      }
    }
    SolveOptions sub = options;
    sub.time_budget_s = remaining;
    // Later assignments only need to beat the best one found so far;
    // an Infeasible result then just means "no improvement here".
    sub.cutoff = best.objective;
    Solution sol = milp::solve_milp(fixed, sub);
    best.node_count += sol.node_count;
    if (sol.status == SolveStatus::TimeLimit) timed_out = true;
    if ((sol.status == SolveStatus::Optimal ||
         sol.status == SolveStatus::TimeLimit) &&
        sol.has_values() && sol.objective > best.objective + 1e-9) {
      best.objective = sol.objective;
      best.values = std::move(sol.values);
      best.incumbent_history.push_back(best.objective);
      if (best.status != SolveStatus::TimeLimit)
        best.status = SolveStatus::Optimal;
    }
  }

  if (timed_out) {
    best.status = SolveStatus::TimeLimit;
    best.gap = milp::kInf;
  } else if (best.has_values()) {
    best.status = SolveStatus::Optimal;
    best.gap = 0.0;
  }
  return ScheduleResult{std::move(best), std::move(built.index)};
}

}  // namespace p2psched::scheduler
