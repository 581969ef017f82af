#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "p2psched/model.hpp"
#include "p2psched/scenario.hpp"
#include "support/tempdir.hpp"

using namespace p2psched;
using model::EvDistribution;
using model::EvScenario;

namespace {

EvDistribution default_dist(std::uint64_t seed) {
  EvDistribution d;
  d.arrival_mean = 9.0;
  d.arrival_stddev = 1.5;
  d.departure_mean = 17.0;
  d.departure_stddev = 1.5;
  d.soc_mean = 0.45;
  d.soc_stddev = 0.10;
  d.seed = seed;
  return d;
}

bool same_scenario(const EvScenario& a, const EvScenario& b) {
  return a.arrival_hour == b.arrival_hour &&
         a.departure_hour == b.departure_hour && a.arrival_soc == b.arrival_soc;
}

}  // namespace

TEST_CASE("sampling: fixed seed reproduces the draw exactly") {
  auto a = scenario::sample_scenarios(default_dist(7), 200, 24);
  auto b = scenario::sample_scenarios(default_dist(7), 200, 24);
  REQUIRE(a.size() == 200);
  REQUIRE(b.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(same_scenario(a[i], b[i]));
    CHECK(a[i].weight == b[i].weight);
  }
  auto c = scenario::sample_scenarios(default_dist(8), 200, 24);
  bool all_equal = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_scenario(a[i], c[i])) all_equal = false;
  }
  CHECK(!all_equal);  // a different seed must change the draw
}

TEST_CASE("sampling: every draw satisfies the scenario invariants") {
  const int horizon = 24;
  auto sample = scenario::sample_scenarios(default_dist(3), 500, horizon);
  for (const EvScenario& ev : sample) {
    CHECK(0 <= ev.arrival_hour);
    CHECK(ev.arrival_hour < ev.departure_hour);
    CHECK(ev.departure_hour <= horizon);
    CHECK(ev.arrival_soc >= 0.0);
    CHECK(ev.arrival_soc <= ev.target_soc);
    // Window long enough to reach the target at the maximum charge rate.
    const double need = (ev.target_soc - ev.arrival_soc) * ev.capacity;
    CHECK((ev.departure_hour - ev.arrival_hour) * ev.max_charge_rate >=
          need - 1e-9);
  }
}

TEST_CASE("sampling: statistics track the distribution parameters") {
  auto sample = scenario::sample_scenarios(default_dist(11), 4000, 24);
  double arrival = 0.0, departure = 0.0, soc = 0.0;
  for (const EvScenario& ev : sample) {
    arrival += ev.arrival_hour;
    departure += ev.departure_hour;
    soc += ev.arrival_soc;
  }
  arrival /= sample.size();
  departure /= sample.size();
  soc /= sample.size();
  CHECK(std::abs(arrival - 9.0) < 0.5);
  CHECK(std::abs(departure - 17.0) < 0.5);
  CHECK(std::abs(soc - 0.45) < 0.05);
}

TEST_CASE("sampling: impossible distributions fail loudly") {
  EvDistribution d = default_dist(1);
  d.arrival_mean = 40.0;  // far outside the horizon
  d.arrival_stddev = 0.01;
  CHECK_THROWS_AS(scenario::sample_scenarios(d, 10, 24), std::runtime_error);
  CHECK_THROWS_AS(scenario::sample_scenarios(default_dist(1), -1, 24),
                  std::invalid_argument);
}

TEST_CASE("kmeans: representatives are members and weights sum to one") {
  auto sample = scenario::sample_scenarios(default_dist(5), 400, 24);
  scenario::ReducedSet red = scenario::kmeans_reduce(sample, 3, 42);
  REQUIRE(red.representatives.size() == 3);
  REQUIRE(red.weights.size() == 3);

  const double weight_sum =
      std::accumulate(red.weights.begin(), red.weights.end(), 0.0);
  CHECK(std::abs(weight_sum - 1.0) <= 1e-12);
  for (double w : red.weights) CHECK(w > 0.0);

  for (const EvScenario& rep : red.representatives) {
    const bool member =
        std::any_of(sample.begin(), sample.end(),
                    [&](const EvScenario& s) { return same_scenario(s, rep); });
    CHECK(member);  // medoids, not synthetic centroids
  }
}

TEST_CASE("kmeans: identical seed gives identical reduction") {
  auto sample = scenario::sample_scenarios(default_dist(9), 300, 24);
  scenario::ReducedSet a = scenario::kmeans_reduce(sample, 4, 123);
  scenario::ReducedSet b = scenario::kmeans_reduce(sample, 4, 123);
  REQUIRE(a.representatives.size() == b.representatives.size());
  for (std::size_t i = 0; i < a.representatives.size(); ++i) {
    CHECK(same_scenario(a.representatives[i], b.representatives[i]));
    CHECK(a.weights[i] == b.weights[i]);
  }
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans: k equal to the sample size keeps every scenario") {
  auto sample = scenario::sample_scenarios(default_dist(2), 12, 24);
  scenario::ReducedSet red =
      scenario::kmeans_reduce(sample, static_cast<int>(sample.size()), 1);
  REQUIRE(red.representatives.size() == sample.size());
  for (double w : red.weights) {
    CHECK(std::abs(w - 1.0 / sample.size()) <= 1e-12);
  }
  CHECK(red.inertia <= 1e-12);
}

TEST_CASE("kmeans: recovers planted well-separated clusters") {
  // Three tight groups: morning short-stay low-soc, midday, evening.
  std::vector<EvScenario> planted;
  auto add_group = [&](int arrival, int departure, double soc, int count) {
    for (int i = 0; i < count; ++i) {
      EvScenario ev;
      ev.id = "p" + std::to_string(planted.size());
      ev.arrival_hour = arrival + (i % 2);
      ev.departure_hour = departure + (i % 2);
      ev.arrival_soc = soc + 0.002 * (i % 3);
      planted.push_back(ev);
    }
  };
  add_group(2, 8, 0.30, 40);
  add_group(10, 16, 0.50, 35);
  add_group(18, 24, 0.70, 25);

  scenario::ReducedSet red = scenario::kmeans_reduce(planted, 3, 9);
  REQUIRE(red.representatives.size() == 3);

  // Each representative must come from a distinct planted group, and the
  // weights must reproduce the group shares exactly.
  std::set<int> groups_seen;
  for (std::size_t i = 0; i < red.representatives.size(); ++i) {
    const int a = red.representatives[i].arrival_hour;
    const int group = a < 9 ? 0 : (a < 17 ? 1 : 2);
    groups_seen.insert(group);
    const double expected_share =
        group == 0 ? 0.40 : (group == 1 ? 0.35 : 0.25);
    CHECK(std::abs(red.weights[i] - expected_share) <= 1e-12);
  }
  CHECK(groups_seen.size() == 3);
}

TEST_CASE("kmeans: rejects out-of-range k") {
  auto sample = scenario::sample_scenarios(default_dist(4), 10, 24);
  CHECK_THROWS_AS(scenario::kmeans_reduce(sample, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(scenario::kmeans_reduce(sample, 11, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario::kmeans_reduce({}, 1, 1), std::invalid_argument);
}

TEST_CASE("scenario csv: round-trips ids, hours, and weights") {
  auto sample = scenario::sample_scenarios(default_dist(6), 50, 24);
  scenario::ReducedSet red = scenario::kmeans_reduce(sample, 5, 3);
  for (std::size_t i = 0; i < red.representatives.size(); ++i) {
    red.representatives[i].weight = red.weights[i];
  }

  const std::string csv = scenario::scenarios_to_csv(red.representatives);
  std::vector<EvScenario> reread = scenario::parse_scenarios_csv(csv);
  REQUIRE(reread.size() == red.representatives.size());
  for (std::size_t i = 0; i < reread.size(); ++i) {
    CHECK(reread[i].id == red.representatives[i].id);
    CHECK(reread[i].arrival_hour == red.representatives[i].arrival_hour);
    CHECK(reread[i].departure_hour == red.representatives[i].departure_hour);
    CHECK(reread[i].arrival_soc == red.representatives[i].arrival_soc);
    CHECK(reread[i].capacity == red.representatives[i].capacity);
    CHECK(reread[i].target_soc == red.representatives[i].target_soc);
    CHECK(reread[i].weight == red.representatives[i].weight);
  }

  TempDir tmp;
  scenario::save_scenarios_csv(red.representatives, tmp.file("s.csv"));
  std::vector<EvScenario> from_file =
      scenario::load_scenarios_csv(tmp.file("s.csv"));
  CHECK(from_file.size() == red.representatives.size());
}

TEST_CASE("scenario csv: malformed input is rejected") {
  CHECK_THROWS(scenario::parse_scenarios_csv("not,a,header\n"));
  // Wrong column count and non-numeric cells are format errors.
  CHECK_THROWS(scenario::parse_scenarios_csv(
      "id,arrival,departure,soc,capacity,target,weight\nev0,5,9,0.5\n"));
  CHECK_THROWS(scenario::parse_scenarios_csv(
      "id,arrival,departure,soc,capacity,target,weight\n"
      "ev0,five,9,0.5,25,0.9,1\n"));
}
