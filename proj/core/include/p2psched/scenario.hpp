#ifndef P2PSCHED_SCENARIO_HPP
#define P2PSCHED_SCENARIO_HPP

#include <string>
#include <vector>

#include "p2psched/model.hpp"

// Monte-Carlo sampling of guest-EV scenarios and K-means reduction to a
// small weighted representative set.

namespace p2psched::scenario {

/// K-means output. Representatives are medoids: verbatim members of the
/// input sample set, so every representative is a realizable integer-hour
/// scenario. weights[i] = cluster i size / total samples.
struct ReducedSet {
  std::vector<model::EvScenario> representatives;
  std::vector<double> weights;
  double inertia = 0.0;  // sum of squared normalized distances to centroids
};

/// Draws n scenarios from truncated normals (arrival, departure hours
/// rounded to integers; state of charge clamped to a fraction), rejection-
/// resampling any draw that violates the scenario invariants
/// (arrival < departure within the horizon, soc <= target, window long
/// enough to charge to target). Deterministic for a fixed dist.seed.
/// Throws std::runtime_error after 1000*n rejected draws (distribution
/// cannot produce feasible scenarios).
std::vector<model::EvScenario> sample_scenarios(const model::EvDistribution& dist,
                                                int n, int horizon = 24);

/// Lloyd K-means on min-max-normalized (arrival, departure, arrival_soc)
/// features with k-means++ seeding; converges when assignments stabilize or
/// after 300 iterations. Ties (nearest centroid, medoid choice) break to the
/// lowest index. Throws std::invalid_argument unless 1 <= k <= |scenarios|.
ReducedSet kmeans_reduce(const std::vector<model::EvScenario>& scenarios, int k,
                         std::uint64_t seed);

/// Scenario CSV: header `id,arrival,departure,soc,capacity,target,weight`.
/// Charge/discharge rates are not part of the exchange format and take
/// their defaults on load.
std::string scenarios_to_csv(const std::vector<model::EvScenario>& scenarios);
std::vector<model::EvScenario> parse_scenarios_csv(const std::string& text);
void save_scenarios_csv(const std::vector<model::EvScenario>& scenarios,
                        const std::string& path);
std::vector<model::EvScenario> load_scenarios_csv(const std::string& path);

}  // namespace p2psched::scenario

#endif  // P2PSCHED_SCENARIO_HPP
