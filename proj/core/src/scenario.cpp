#include "p2psched/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace p2psched::scenario {

using model::EvDistribution;
using model::EvScenario;

namespace {

constexpr double kHuge = std::numeric_limits<double>::infinity();

/// Deterministic uniform/normal source. mt19937_64 has a fixed sequence for
/// a fixed seed on every platform; the distributions are hand-rolled
/// because the standard library's are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0,1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal(double mean, double stddev) {
    // polar Box-Muller; caches the second deviate
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    have_spare_ = true;
    return mean + stddev * u * scale;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

struct Feature {
  double arrival, departure, soc;
};

double sq(double x) { return x * x; }

double dist2(const Feature& a, const Feature& b) {
  return sq(a.arrival - b.arrival) + sq(a.departure - b.departure) +
         sq(a.soc - b.soc);
}

std::vector<Feature> normalized_features(
    const std::vector<EvScenario>& scenarios) {
  double alo = kHuge, ahi = -kHuge;
  double dlo = kHuge, dhi = -kHuge;
  double slo = kHuge, shi = -kHuge;
  for (const EvScenario& s : scenarios) {
    alo = std::min(alo, double(s.arrival_hour));
    ahi = std::max(ahi, double(s.arrival_hour));
    dlo = std::min(dlo, double(s.departure_hour));
    dhi = std::max(dhi, double(s.departure_hour));
    slo = std::min(slo, s.arrival_soc);
    shi = std::max(shi, s.arrival_soc);
  }
  auto norm = [](double x, double lo, double hi) {
    return hi > lo ? (x - lo) / (hi - lo) : 0.0;
  };
  std::vector<Feature> out;
  out.reserve(scenarios.size());
  for (const EvScenario& s : scenarios)
    out.push_back({norm(s.arrival_hour, alo, ahi),
                   norm(s.departure_hour, dlo, dhi),
                   norm(s.arrival_soc, slo, shi)});
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<EvScenario> sample_scenarios(const EvDistribution& dist, int n,
                                         int horizon) {
  if (n < 0) throw std::invalid_argument("sample_scenarios: n must be >= 0");
  if (horizon < 1)
    throw std::invalid_argument("sample_scenarios: horizon must be >= 1");
  if (!(dist.arrival_stddev > 0) || !(dist.departure_stddev > 0) ||
      !(dist.soc_stddev > 0))
    throw std::invalid_argument("sample_scenarios: stddevs must be > 0");

  Rng rng(dist.seed);
  std::vector<EvScenario> out;
  out.reserve(n);
  long long budget = 1000LL * std::max(n, 1);
  long long rejected = 0;

  while (static_cast<int>(out.size()) < n) {
    EvScenario ev;
    ev.arrival_hour =
        static_cast<int>(std::lround(rng.normal(dist.arrival_mean,
                                                dist.arrival_stddev)));
    ev.departure_hour = static_cast<int>(
        std::lround(rng.normal(dist.departure_mean, dist.departure_stddev)));
    ev.arrival_soc = rng.normal(dist.soc_mean, dist.soc_stddev);
    ev.capacity = dist.capacity;
    ev.target_soc = dist.target_soc;
    ev.max_charge_rate = dist.max_charge_rate;
    ev.max_discharge_rate = dist.max_discharge_rate;
    ev.weight = 1.0;

    bool ok =
        0 <= ev.arrival_hour && ev.arrival_hour < ev.departure_hour &&
        ev.departure_hour <= horizon && 0.0 <= ev.arrival_soc &&
        ev.arrival_soc <= ev.target_soc && ev.target_soc <= 1.0 &&
        (ev.departure_hour - ev.arrival_hour) * ev.max_charge_rate >=
            (ev.target_soc - ev.arrival_soc) * ev.capacity - 1e-9;
    if (!ok) {
      if (++rejected > budget)
        throw std::runtime_error(
            "sample_scenarios: rejection budget exhausted; the distribution "
            "cannot produce feasible scenarios for this horizon");
      continue;
    }
    ev.id = "s" + std::to_string(out.size());
    out.push_back(std::move(ev));
  }
  return out;
}

ReducedSet kmeans_reduce(const std::vector<EvScenario>& scenarios, int k,
                         std::uint64_t seed) {
  const int n = static_cast<int>(scenarios.size());
  if (k < 1 || k > n)
    throw std::invalid_argument(
        "kmeans_reduce: need 1 <= k <= number of scenarios");

  std::vector<Feature> f = normalized_features(scenarios);
  Rng rng(seed);

  // k-means++ seeding
  std::vector<Feature> centroids;
  centroids.reserve(k);
  centroids.push_back(f[static_cast<int>(rng.uniform() * n) % n]);
  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = kHuge;
      for (const Feature& c : centroids) best = std::min(best, dist2(f[i], c));
      d2[i] = best;
      total += best;
    }
    int chosen = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<int>(rng.uniform() * n) % n;  // all points coincide
    }
    centroids.push_back(f[chosen]);
  }

  // Lloyd iterations until assignments stabilize
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(f[i], centroids[0]);
      for (int j = 1; j < k; ++j) {
        double d = dist2(f[i], centroids[j]);
        if (d < best_d) {  // strict: ties keep the lowest centroid index
          best_d = d;
          best = j;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<Feature> sums(k, {0, 0, 0});
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[assign[i]].arrival += f[i].arrival;
      sums[assign[i]].departure += f[i].departure;
      sums[assign[i]].soc += f[i].soc;
      ++counts[assign[i]];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        centroids[j] = {sums[j].arrival / counts[j],
                        sums[j].departure / counts[j],
                        sums[j].soc / counts[j]};
      } else {
        // re-seed an empty cluster at the point farthest from its centroid
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          double d = dist2(f[i], centroids[assign[i]]);
          if (d > far_d) {  // strict: ties keep the lowest point index
            far_d = d;
            far = i;
          }
        }
        centroids[j] = f[far];
        assign[far] = j;
      }
    }
  }

  // medoids: member nearest its centroid, ties by lowest index
  std::vector<int> medoid(k, -1);
  std::vector<double> medoid_d(k, kHuge);
  std::vector<int> counts(k, 0);
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    int j = assign[i];
    double d = dist2(f[i], centroids[j]);
    inertia += d;
    ++counts[j];
    if (d < medoid_d[j]) {  // strict: ties keep the lowest member index
      medoid_d[j] = d;
      medoid[j] = i;
    }
  }

  ReducedSet out;
  out.inertia = inertia;
  for (int j = 0; j < k; ++j) {
    if (medoid[j] < 0) continue;  // cannot happen: every cluster non-empty
    EvScenario rep = scenarios[medoid[j]];
    rep.weight = static_cast<double>(counts[j]) / n;
    out.representatives.push_back(std::move(rep));
    out.weights.push_back(static_cast<double>(counts[j]) / n);
  }
  return out;
}

std::string scenarios_to_csv(const std::vector<EvScenario>& scenarios) {
  std::ostringstream os;
  os << "id,arrival,departure,soc,capacity,target,weight\n";
  os.precision(17);
  for (const EvScenario& s : scenarios) {
    os << csv_escape(s.id) << ',' << s.arrival_hour << ',' << s.departure_hour
       << ',' << s.arrival_soc << ',' << s.capacity << ',' << s.target_soc
       << ',' << s.weight << '\n';
  }
  return os.str();
}

std::vector<EvScenario> parse_scenarios_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("scenario CSV: empty input");
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "id,arrival,departure,soc,capacity,target,weight")
    throw std::runtime_error(
        "scenario CSV: header must be "
        "'id,arrival,departure,soc,capacity,target,weight'");

  std::vector<EvScenario> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    std::string s = strip(line);
    if (s.empty()) continue;

    // split, honoring quoted ids
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      if (quoted) {
        if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    if (cells.size() != 7)
      throw std::runtime_error("scenario CSV line " + std::to_string(line_no) +
                               ": expected 7 columns");
    auto num = [&](int idx) {
      try {
        std::size_t used = 0;
        double v = std::stod(cells[idx], &used);
        if (used != cells[idx].size()) throw std::invalid_argument(cells[idx]);
        return v;
      } catch (const std::exception&) {
        throw std::runtime_error("scenario CSV line " +
                                 std::to_string(line_no) + ": bad number '" +
                                 cells[idx] + "'");
      }
    };
    EvScenario ev;
    ev.id = cells[0];
    ev.arrival_hour = static_cast<int>(num(1));
    ev.departure_hour = static_cast<int>(num(2));
    ev.arrival_soc = num(3);
    ev.capacity = num(4);
    ev.target_soc = num(5);
    ev.weight = num(6);
    out.push_back(std::move(ev));
  }
  return out;
}

void save_scenarios_csv(const std::vector<EvScenario>& scenarios,
                        const std::string& path) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  os << scenarios_to_csv(scenarios);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<EvScenario> load_scenarios_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open scenario CSV '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_scenarios_csv(buf.str());
}

}  // namespace p2psched::scenario
