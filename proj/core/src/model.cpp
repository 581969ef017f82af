#include "p2psched/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace p2psched::model {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw LoadError(where + ": " + what);
}

double number_at(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

/// Scalar broadcast or T-length array of numbers.
std::vector<double> series(const ordered_json& j, int horizon,
                           const std::string& where) {
  if (j.is_number()) return std::vector<double>(horizon, j.get<double>());
  if (!j.is_array())
    fail(where, "expected a number or an array of " +
                    std::to_string(horizon) + " numbers");
  if (static_cast<int>(j.size()) != horizon)
    fail(where, "expected " + std::to_string(horizon) + " entries, got " +
                    std::to_string(j.size()));
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number_at(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> series_or(const ordered_json& obj, const std::string& key,
                              int horizon, double fallback,
                              const std::string& where) {
  if (!obj.contains(key)) return std::vector<double>(horizon, fallback);
  return series(obj.at(key), horizon, where + "." + key);
}

double scalar_or(const ordered_json& obj, const std::string& key,
                 double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number_at(obj.at(key), where + "." + key);
}

int int_at(const ordered_json& obj, const std::string& key,
           const std::string& where) {
  if (!obj.contains(key)) fail(where, "missing required field '" + key + "'");
  const ordered_json& j = obj.at(key);
  if (!j.is_number_integer()) fail(where + "." + key, "expected an integer");
  return j.get<int>();
}

/// p2p price: scalar (all communities), one T-series (all communities), or a
/// per-community array whose entries are scalars or T-series.
std::vector<std::vector<double>> p2p_series(const ordered_json& j,
                                            int communities, int horizon,
                                            const std::string& where) {
  if (j.is_number() || (j.is_array() && !j.empty() && j[0].is_number())) {
    std::vector<double> one = series(j, horizon, where);
    return std::vector<std::vector<double>>(communities, one);
  }
  if (!j.is_array() || static_cast<int>(j.size()) != communities)
    fail(where, "expected a scalar, an hourly series, or one entry per "
                "community (" +
                    std::to_string(communities) + ")");
  std::vector<std::vector<double>> out;
  out.reserve(j.size());
  for (std::size_t c = 0; c < j.size(); ++c)
    out.push_back(series(j[c], horizon, where + "[" + std::to_string(c) + "]"));
  return out;
}

UnitProfile parse_unit(const ordered_json& j, int horizon,
                       const std::filesystem::path& base_dir,
                       const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  if (j.contains("csv")) {
    if (!j.at("csv").is_string()) fail(where + ".csv", "expected a file path");
    std::filesystem::path p = j.at("csv").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return load_profile_csv(p.string(), horizon);
  }
  UnitProfile u;
  if (!j.contains("uid") || !j.contains("id") || !j.contains("pv"))
    fail(where, "unit needs either 'csv' or the fields 'uid', 'id', 'pv'");
  u.uninterruptible_load = series(j.at("uid"), horizon, where + ".uid");
  u.interruptible_load = series(j.at("id"), horizon, where + ".id");
  u.pv_generation = series(j.at("pv"), horizon, where + ".pv");
  u.dr_callable = j.contains("dr_callable")
                      ? series(j.at("dr_callable"), horizon,
                               where + ".dr_callable")
                      : u.interruptible_load;
  return u;
}

EvScenario parse_ev(const ordered_json& j, std::size_t k,
                    const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  EvScenario ev;
  ev.id = j.contains("id") && j.at("id").is_string()
              ? j.at("id").get<std::string>()
              : "ev" + std::to_string(k);
  ev.arrival_hour = int_at(j, "arrival", where);
  ev.departure_hour = int_at(j, "departure", where);
  ev.arrival_soc = scalar_or(j, "soc", ev.arrival_soc, where);
  ev.capacity = scalar_or(j, "capacity", ev.capacity, where);
  ev.target_soc = scalar_or(j, "target_soc", ev.target_soc, where);
  ev.max_charge_rate = scalar_or(j, "charge_rate", ev.max_charge_rate, where);
  ev.max_discharge_rate =
      scalar_or(j, "discharge_rate", ev.max_discharge_rate, where);
  ev.weight = scalar_or(j, "weight", ev.weight, where);
  return ev;
}

EvDistribution parse_distribution(const ordered_json& j,
                                  const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  EvDistribution d;
  d.arrival_mean = scalar_or(j, "arrival_mean", d.arrival_mean, where);
  d.arrival_stddev = scalar_or(j, "arrival_stddev", d.arrival_stddev, where);
  d.departure_mean = scalar_or(j, "departure_mean", d.departure_mean, where);
  d.departure_stddev =
      scalar_or(j, "departure_stddev", d.departure_stddev, where);
  d.soc_mean = scalar_or(j, "soc_mean", d.soc_mean, where);
  d.soc_stddev = scalar_or(j, "soc_stddev", d.soc_stddev, where);
  d.capacity = scalar_or(j, "capacity", d.capacity, where);
  d.target_soc = scalar_or(j, "target_soc", d.target_soc, where);
  d.max_charge_rate = scalar_or(j, "charge_rate", d.max_charge_rate, where);
  d.max_discharge_rate =
      scalar_or(j, "discharge_rate", d.max_discharge_rate, where);
  if (j.contains("seed")) {
    const ordered_json& s = j.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer())
      fail(where + ".seed", "expected a non-negative integer");
    d.seed = s.get<std::uint64_t>();
  }
  return d;
}

void check_nonneg(const std::vector<double>& v, const std::string& what,
                  std::vector<std::string>& out) {
  for (std::size_t t = 0; t < v.size(); ++t)
    if (v[t] < 0.0 || !std::isfinite(v[t]))
      out.push_back(what + "[" + std::to_string(t) +
                    "]: must be finite and >= 0");
}

void check_len(const std::vector<double>& v, int horizon,
               const std::string& what, std::vector<std::string>& out) {
  if (static_cast<int>(v.size()) != horizon)
    out.push_back(what + ": length " + std::to_string(v.size()) +
                  " != horizon " + std::to_string(horizon));
}

ordered_json series_json(const std::vector<double>& v) {
  ordered_json arr = ordered_json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

}  // namespace

std::vector<std::string> validate(const Instance& in) {
  std::vector<std::string> out;
  if (in.num_communities < 1) out.push_back("meta.communities: must be >= 1");
  if (in.units_per_community < 1)
    out.push_back("meta.units_per_community: must be >= 1");
  if (in.horizon < 1) out.push_back("meta.horizon: must be >= 1");
  if (!out.empty()) return out;  // shape checks below assume sane counts

  const int T = in.horizon;
  auto price = [&](const std::vector<double>& v, const std::string& name) {
    check_len(v, T, "prices." + name, out);
    check_nonneg(v, "prices." + name, out);
  };
  price(in.prices.grid_price, "grid");
  price(in.prices.dr_incentive, "dr_incentive");
  price(in.prices.dr_fine, "dr_fine");
  price(in.prices.ens_price, "ens");
  price(in.prices.social_welfare_value, "social_welfare");
  price(in.prices.ev_charge_price, "ev_charge");
  price(in.prices.ev_discharge_price, "ev_discharge");
  if (static_cast<int>(in.prices.p2p_price.size()) != in.num_communities) {
    out.push_back("prices.p2p: one series per community required");
  } else {
    for (int c = 0; c < in.num_communities; ++c)
      price(in.prices.p2p_price[c], "p2p[" + std::to_string(c) + "]");
  }
  if (in.prices.parking_fee < 0) out.push_back("prices.parking_fee: must be >= 0");
  if (in.prices.standby_payment < 0)
    out.push_back("prices.standby_payment: must be >= 0");

  if (static_cast<int>(in.profiles.size()) != in.num_communities) {
    out.push_back("communities: profile matrix must have one row per community");
  } else {
    for (int c = 0; c < in.num_communities; ++c) {
      if (static_cast<int>(in.profiles[c].size()) != in.units_per_community) {
        out.push_back("communities[" + std::to_string(c) +
                      "].units: must have units_per_community entries");
        continue;
      }
      for (int u = 0; u < in.units_per_community; ++u) {
        const UnitProfile& p = in.profiles[c][u];
        std::string tag = "communities[" + std::to_string(c) + "].units[" +
                          std::to_string(u) + "]";
        check_len(p.uninterruptible_load, T, tag + ".uid", out);
        check_len(p.interruptible_load, T, tag + ".id", out);
        check_len(p.pv_generation, T, tag + ".pv", out);
        check_len(p.dr_callable, T, tag + ".dr_callable", out);
        check_nonneg(p.uninterruptible_load, tag + ".uid", out);
        check_nonneg(p.interruptible_load, tag + ".id", out);
        check_nonneg(p.pv_generation, tag + ".pv", out);
        check_nonneg(p.dr_callable, tag + ".dr_callable", out);
        std::size_t n =
            std::min(p.dr_callable.size(), p.interruptible_load.size());
        for (std::size_t t = 0; t < n; ++t)
          if (p.dr_callable[t] > p.interruptible_load[t] + 1e-12)
            out.push_back(tag + ".dr_callable[" + std::to_string(t) +
                          "]: exceeds interruptible load at that hour");
      }
    }
  }

  for (std::size_t k = 0; k < in.evs.size(); ++k) {
    const EvScenario& ev = in.evs[k];
    std::string tag = "evs[" + std::to_string(k) + "] (" + ev.id + ")";
    if (!(0 <= ev.arrival_hour && ev.arrival_hour < ev.departure_hour &&
          ev.departure_hour <= T))
      out.push_back(tag + ": window must satisfy 0 <= arrival < departure <= horizon");
    if (!(0.0 <= ev.arrival_soc && ev.arrival_soc <= ev.target_soc &&
          ev.target_soc <= 1.0))
      out.push_back(tag + ": need 0 <= soc <= target_soc <= 1");
    if (!(ev.capacity > 0)) out.push_back(tag + ": capacity must be > 0");
    if (ev.max_charge_rate < 0 || ev.max_discharge_rate < 0)
      out.push_back(tag + ": charge/discharge rates must be >= 0");
    if (!(0.0 <= ev.weight && ev.weight <= 1.0))
      out.push_back(tag + ": weight must lie in [0,1]");
    double window = ev.departure_hour - ev.arrival_hour;
    if (window > 0 &&
        window * ev.max_charge_rate <
            (ev.target_soc - ev.arrival_soc) * ev.capacity - 1e-9)
      out.push_back(tag + ": window too short to charge from soc to target_soc");
  }

  if (!(in.options.abs_gap > 0) || !(in.options.feas_tol > 0) ||
      !(in.options.int_tol > 0) || !(in.options.time_budget_s > 0))
    out.push_back("solver: gap, tolerances, and time budget must be > 0");
  return out;
}

Instance parse_instance_text(const std::string& text,
                             const std::string& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("instance parse error: ") + e.what());
  }
  if (!j.is_object()) throw LoadError("instance: top level must be an object");
  if (!j.contains("meta")) throw LoadError("instance: missing 'meta' section");

  Instance in;
  const ordered_json& meta = j.at("meta");
  in.num_communities = int_at(meta, "communities", "meta");
  in.units_per_community = int_at(meta, "units_per_community", "meta");
  in.horizon = meta.contains("horizon") ? int_at(meta, "horizon", "meta") : 24;
  if (in.num_communities < 1 || in.units_per_community < 1 || in.horizon < 1)
    throw LoadError("meta: counts and horizon must be >= 1");
  const int T = in.horizon;

  if (!j.contains("prices") || !j.at("prices").is_object())
    throw LoadError("instance: missing 'prices' section");
  const ordered_json& pj = j.at("prices");
  PriceSeries& p = in.prices;
  if (!pj.contains("grid")) fail("prices", "missing required series 'grid'");
  p.grid_price = series(pj.at("grid"), T, "prices.grid");
  p.dr_incentive = series_or(pj, "dr_incentive", T, 0.0, "prices");
  p.dr_fine = series_or(pj, "dr_fine", T, 0.0, "prices");
  p.social_welfare_value = series_or(pj, "social_welfare", T, 0.0, "prices");
  p.ens_price = pj.contains("ens") ? series(pj.at("ens"), T, "prices.ens")
                                   : std::vector<double>();
  if (p.ens_price.empty()) {
    p.ens_price.reserve(T);
    for (double g : p.grid_price) p.ens_price.push_back(1.1 * g);
  }
  p.p2p_price = pj.contains("p2p")
                    ? p2p_series(pj.at("p2p"), in.num_communities, T,
                                 "prices.p2p")
                    : std::vector<std::vector<double>>(in.num_communities,
                                                       p.grid_price);
  p.ev_charge_price = pj.contains("ev_charge")
                          ? series(pj.at("ev_charge"), T, "prices.ev_charge")
                          : p.grid_price;
  p.ev_discharge_price =
      pj.contains("ev_discharge")
          ? series(pj.at("ev_discharge"), T, "prices.ev_discharge")
          : p.grid_price;
  p.parking_fee = scalar_or(pj, "parking_fee", p.parking_fee, "prices");
  p.standby_payment =
      scalar_or(pj, "standby_payment", p.standby_payment, "prices");

  if (!j.contains("communities") || !j.at("communities").is_array())
    throw LoadError("instance: missing 'communities' array");
  const ordered_json& cj = j.at("communities");
  if (static_cast<int>(cj.size()) != in.num_communities)
    throw LoadError("communities: expected " +
                    std::to_string(in.num_communities) + " entries, got " +
                    std::to_string(cj.size()));
  std::filesystem::path base(base_dir);
  for (std::size_t c = 0; c < cj.size(); ++c) {
    std::string where = "communities[" + std::to_string(c) + "]";
    if (!cj[c].is_object() || !cj[c].contains("units"))
      fail(where, "expected an object with a 'units' array");
    const ordered_json& uj = cj[c].at("units");
    if (!uj.is_array() ||
        static_cast<int>(uj.size()) != in.units_per_community)
      fail(where + ".units", "expected " +
                                 std::to_string(in.units_per_community) +
                                 " entries");
    std::vector<UnitProfile> row;
    row.reserve(uj.size());
    for (std::size_t u = 0; u < uj.size(); ++u)
      row.push_back(parse_unit(uj[u], T, base,
                               where + ".units[" + std::to_string(u) + "]"));
    in.profiles.push_back(std::move(row));
  }

  if (j.contains("evs")) {
    const ordered_json& ej = j.at("evs");
    if (!ej.is_array()) throw LoadError("evs: expected an array");
    for (std::size_t k = 0; k < ej.size(); ++k)
      in.evs.push_back(parse_ev(ej[k], k, "evs[" + std::to_string(k) + "]"));
  }
  if (j.contains("ev_distribution"))
    in.ev_distribution =
        parse_distribution(j.at("ev_distribution"), "ev_distribution");

  if (j.contains("solver")) {
    const ordered_json& sj = j.at("solver");
    if (!sj.is_object()) throw LoadError("solver: expected an object");
    in.options.abs_gap = scalar_or(sj, "abs_gap", in.options.abs_gap, "solver");
    in.options.feas_tol =
        scalar_or(sj, "feas_tol", in.options.feas_tol, "solver");
    in.options.int_tol = scalar_or(sj, "int_tol", in.options.int_tol, "solver");
    in.options.time_budget_s =
        scalar_or(sj, "time_budget_s", in.options.time_budget_s, "solver");
  }

  std::vector<std::string> issues = validate(in);
  if (!issues.empty()) {
    std::string msg = "instance validation failed:";
    for (const std::string& s : issues) msg += "\n  - " + s;
    throw LoadError(msg);
  }
  return in;
}

Instance load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  std::filesystem::path dir = std::filesystem::path(path).parent_path();
  if (dir.empty()) dir = ".";
  return parse_instance_text(buf.str(), dir.string());
}

std::string instance_to_text(const Instance& in) {
  ordered_json j;
  j["meta"] = {{"communities", in.num_communities},
               {"units_per_community", in.units_per_community},
               {"horizon", in.horizon}};
  ordered_json pj;
  pj["grid"] = series_json(in.prices.grid_price);
  pj["dr_incentive"] = series_json(in.prices.dr_incentive);
  pj["dr_fine"] = series_json(in.prices.dr_fine);
  ordered_json p2p = ordered_json::array();
  for (const std::vector<double>& s : in.prices.p2p_price)
    p2p.push_back(series_json(s));
  pj["p2p"] = std::move(p2p);
  pj["ens"] = series_json(in.prices.ens_price);
  pj["social_welfare"] = series_json(in.prices.social_welfare_value);
  pj["parking_fee"] = in.prices.parking_fee;
  pj["standby_payment"] = in.prices.standby_payment;
  pj["ev_charge"] = series_json(in.prices.ev_charge_price);
  pj["ev_discharge"] = series_json(in.prices.ev_discharge_price);
  j["prices"] = std::move(pj);

  ordered_json communities = ordered_json::array();
  for (const std::vector<UnitProfile>& row : in.profiles) {
    ordered_json units = ordered_json::array();
    for (const UnitProfile& u : row) {
      ordered_json uj;
      uj["uid"] = series_json(u.uninterruptible_load);
      uj["id"] = series_json(u.interruptible_load);
      uj["pv"] = series_json(u.pv_generation);
      uj["dr_callable"] = series_json(u.dr_callable);
      units.push_back(std::move(uj));
    }
    ordered_json cj;
    cj["units"] = std::move(units);
    communities.push_back(std::move(cj));
  }
  j["communities"] = std::move(communities);

  ordered_json evs = ordered_json::array();
  for (const EvScenario& ev : in.evs) {
    ordered_json e;
    e["id"] = ev.id;
    e["arrival"] = ev.arrival_hour;
    e["departure"] = ev.departure_hour;
    e["soc"] = ev.arrival_soc;
    e["capacity"] = ev.capacity;
    e["target_soc"] = ev.target_soc;
    e["charge_rate"] = ev.max_charge_rate;
    e["discharge_rate"] = ev.max_discharge_rate;
    e["weight"] = ev.weight;
    evs.push_back(std::move(e));
  }
  j["evs"] = std::move(evs);

  if (in.ev_distribution) {
    const EvDistribution& d = *in.ev_distribution;
    j["ev_distribution"] = {{"arrival_mean", d.arrival_mean},
                            {"arrival_stddev", d.arrival_stddev},
                            {"departure_mean", d.departure_mean},
                            {"departure_stddev", d.departure_stddev},
                            {"soc_mean", d.soc_mean},
                            {"soc_stddev", d.soc_stddev},
                            {"capacity", d.capacity},
                            {"target_soc", d.target_soc},
                            {"charge_rate", d.max_charge_rate},
                            {"discharge_rate", d.max_discharge_rate},
                            {"seed", d.seed}};
  }
  j["solver"] = {{"abs_gap", in.options.abs_gap},
                 {"feas_tol", in.options.feas_tol},
                 {"int_tol", in.options.int_tol},
                 {"time_budget_s", in.options.time_budget_s}};
  return j.dump(2) + "\n";
}

void save_instance(const Instance& in, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw LoadError("cannot open '" + path + "' for writing");
  os << instance_to_text(in);
  if (!os) throw LoadError("failed writing '" + path + "'");
}

UnitProfile load_profile_csv(const std::string& path, int horizon) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open profile CSV '" + path + "'");
  std::string line;
  if (!std::getline(is, line))
    throw LoadError("profile CSV '" + path + "' is empty");
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t b = s.find_first_not_of(' ');
    return b == std::string::npos ? std::string() : s.substr(b);
  };
  if (strip(line) != "hour,uid,id,pv,dr_callable")
    throw LoadError("profile CSV '" + path +
                    "': header must be 'hour,uid,id,pv,dr_callable'");
  UnitProfile u;
  int expected = 0;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    std::string s = strip(line);
    if (s.empty()) continue;
    std::istringstream row(s);
    std::string cell;
    std::vector<double> fields;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && cell[used] == ' ') ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        fields.push_back(v);
      } catch (const std::exception&) {
        throw LoadError("profile CSV '" + path + "' line " +
                        std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (fields.size() != 5)
      throw LoadError("profile CSV '" + path + "' line " +
                      std::to_string(line_no) + ": expected 5 columns");
    if (static_cast<int>(fields[0]) != expected)
      throw LoadError("profile CSV '" + path + "' line " +
                      std::to_string(line_no) + ": hour must be " +
                      std::to_string(expected));
    u.uninterruptible_load.push_back(fields[1]);
    u.interruptible_load.push_back(fields[2]);
    u.pv_generation.push_back(fields[3]);
    u.dr_callable.push_back(fields[4]);
    ++expected;
  }
  if (expected != horizon)
    throw LoadError("profile CSV '" + path + "': " + std::to_string(expected) +
                    " data rows, horizon needs " + std::to_string(horizon));
  return u;
}

}  // namespace p2psched::model
