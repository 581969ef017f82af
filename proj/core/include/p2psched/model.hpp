#ifndef P2PSCHED_MODEL_HPP
#define P2PSCHED_MODEL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Domain types for day-ahead peer-to-peer community scheduling: price
// series, per-unit load/PV profiles, guest-EV scenarios, and the full
// problem instance with validation and file I/O.
//
// Time resolution is fixed at one hour, so kW and kWh coincide numerically;
// every series is indexed by hour 0..T-1.

namespace p2psched::model {

/// All tariffs and payments. Hourly series have length T; scalars in the
/// input are broadcast on load.
struct PriceSeries {
  std::vector<double> grid_price;             // $/kWh, buy and sell
  std::vector<double> dr_incentive;           // $/kWh paid per curtailed kWh
  std::vector<double> dr_fine;                // $/kWh fine rate on the callable shortfall
  std::vector<std::vector<double>> p2p_price; // $/kWh, one series per community
  std::vector<double> ens_price;              // $/kWh penalty on unserved load
  std::vector<double> social_welfare_value;   // $/kWh credit on locally used PV
  double parking_fee = 1.0;                   // $/hour while hosting a guest EV
  double standby_payment = 0.1;               // $/hour/unit availability payment
  std::vector<double> ev_charge_price;        // $/kWh guest EVs pay when charging
  std::vector<double> ev_discharge_price;     // $/kWh paid to guest EVs when discharging
};

/// Hourly demand/generation data for one building unit.
struct UnitProfile {
  std::vector<double> uninterruptible_load;  // kWh/h, must always be served
  std::vector<double> interruptible_load;    // kWh/h, sheddable at a penalty
  std::vector<double> pv_generation;         // kWh/h
  std::vector<double> dr_callable;           // kWh/h cap on curtailment
};

/// One guest-EV realization. Hours form the half-open window
/// [arrival_hour, departure_hour); `weight` is the scenario's probability
/// mass after reduction.
struct EvScenario {
  std::string id;
  int arrival_hour = 0;
  int departure_hour = 0;
  double arrival_soc = 0.0;      // fraction of capacity
  double capacity = 25.0;        // kWh
  double target_soc = 0.9;       // fraction required at departure
  double max_charge_rate = 7.0;  // kW
  double max_discharge_rate = 7.0;
  double weight = 1.0;

  bool available(int t) const { return t >= arrival_hour && t < departure_hour; }
};

/// Sampling parameters for guest-EV arrival/departure/state-of-charge.
struct EvDistribution {
  double arrival_mean = 9.0;
  double arrival_stddev = 2.0;
  double departure_mean = 17.0;
  double departure_stddev = 2.0;
  double soc_mean = 0.5;
  double soc_stddev = 0.15;
  double capacity = 25.0;
  double target_soc = 0.9;
  double max_charge_rate = 7.0;
  double max_discharge_rate = 7.0;
  std::uint64_t seed = 0;
};

struct SolverSettings {
  double abs_gap = 1e-6;
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  double time_budget_s = 600.0;
};

struct Instance {
  int num_communities = 0;
  int units_per_community = 0;
  int horizon = 24;
  PriceSeries prices;
  // profiles[c][u], shape num_communities x units_per_community
  std::vector<std::vector<UnitProfile>> profiles;
  std::vector<EvScenario> evs;
  std::optional<EvDistribution> ev_distribution;
  SolverSettings options;
};

/// Invariant check; each entry names the offending field/index and rule.
/// Violations are data, not failures.
std::vector<std::string> validate(const Instance& instance);

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the structured-text instance document (see README for the format),
/// broadcasts scalar prices to T-length series, applies derived defaults
/// (ENS price = 1.1 x grid price when absent, dr_callable = interruptible
/// load when absent, EV prices = grid price when absent), resolves profile
/// CSV references relative to the instance file, and validates.
/// Throws LoadError on parse or validation failure.
Instance load_instance(const std::string& path);
Instance parse_instance_text(const std::string& text,
                             const std::string& base_dir = ".");

/// Canonical serialization; load_instance(save_instance(x)) round-trips the
/// canonical field set.
std::string instance_to_text(const Instance& instance);
void save_instance(const Instance& instance, const std::string& path);

/// Reads one unit's profile from CSV with header `hour,uid,id,pv,dr_callable`,
/// hour 0-indexed and strictly increasing from 0.
UnitProfile load_profile_csv(const std::string& path, int horizon);

}  // namespace p2psched::model

#endif  // P2PSCHED_MODEL_HPP
