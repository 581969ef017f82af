#include "p2psched/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace p2psched::report {

using scheduler::ProfitBreakdown;
using scheduler::Role;
using scheduler::VariableIndex;

namespace {

constexpr struct {
  const char* key;
  const char* label;
} kCategories[] = {
    {"grid", "Grid trading"},
    {"dr", "Demand response"},
    {"p2p", "P2P trading"},
    {"parking", "Parking sharing"},
    {"ev_exchange", "EV energy exchange"},
    {"social_welfare", "Social welfare"},
    {"standby", "Stand-by availability"},
    {"ens_penalty", "Unserved-energy penalty"},
    {"total", "Total"},
};

const char* label_for(const std::string& key) {
  for (const auto& c : kCategories)
    if (key == c.key) return c.label;
  return nullptr;
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void check_weights(std::size_t count, const std::vector<double>& weights,
                   const char* who) {
  if (weights.size() != count)
    throw std::invalid_argument(std::string(who) +
                                ": one weight per entry required");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0)
      throw std::invalid_argument(std::string(who) +
                                  ": weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(who) +
                                ": weights must sum to 1 (got " + fmt(sum) +
                                ")");
}

std::vector<std::string> split_csv_line(const std::string& s) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : s) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": bad number '" + s + "'");
  }
}

}  // namespace

double Ledger::total() const {
  for (const LedgerRow& r : rows)
    if (r.key == "total") return r.amount;
  double sum = 0.0;
  for (const LedgerRow& r : rows) sum += r.amount;
  return sum;
}

double Ledger::row(const std::string& key) const {
  for (const LedgerRow& r : rows)
    if (r.key == key) return r.amount;
  throw std::out_of_range("ledger has no row '" + key + "'");
}

Ledger profit_table(const std::vector<ProfitBreakdown>& breakdowns,
                    const std::vector<double>& weights) {
  check_weights(breakdowns.size(), weights, "profit_table");
  ProfitBreakdown e;
  for (std::size_t i = 0; i < breakdowns.size(); ++i) {
    const ProfitBreakdown& b = breakdowns[i];
    double w = weights[i];
    e.grid += w * b.grid;
    e.dr += w * b.dr;
    e.p2p += w * b.p2p;
    e.parking += w * b.parking;
    e.ev_exchange += w * b.ev_exchange;
    e.social_welfare += w * b.social_welfare;
    e.standby += w * b.standby;
    e.ens_penalty += w * b.ens_penalty;
    e.total += w * b.total;
  }
  Ledger out;
  // ens_penalty enters the ledger signed, so the category rows sum to total
  double amounts[] = {e.grid,    e.dr,      e.p2p,          e.parking,
                      e.ev_exchange, e.social_welfare, e.standby,
                      -e.ens_penalty, e.total};
  for (std::size_t i = 0; i < std::size(kCategories); ++i)
    out.rows.push_back(
        {kCategories[i].key, kCategories[i].label, amounts[i]});
  return out;
}

ExchangeSeries exchange_series(const milp::Solution& solution,
                               const VariableIndex& index) {
  if (!solution.has_values())
    throw std::invalid_argument(
        "exchange_series: solution carries no variable values");
  const int C = index.num_communities();
  const int U = index.units_per_community();
  const int T = index.horizon();

  ExchangeSeries out;
  out.sold_to_grid.assign(T, 0.0);
  out.bought_from_grid.assign(T, 0.0);
  out.net.assign(T, 0.0);
  out.communities.resize(C);
  for (ExchangeSeries::Community& com : out.communities) {
    com.sold_to_grid.assign(T, 0.0);
    com.bought_from_grid.assign(T, 0.0);
    com.net.assign(T, 0.0);
  }

  for (int c = 0; c < C; ++c)
    for (int u = 0; u < U; ++u)
      for (int t = 0; t < T; ++t) {
        double sold = solution.value(index.var(Role::PT2G, c, u, t));
        double bought = solution.value(index.var(Role::PTFG, c, u, t));
        out.communities[c].sold_to_grid[t] += sold;
        out.communities[c].bought_from_grid[t] += bought;
        out.sold_to_grid[t] += sold;
        out.bought_from_grid[t] += bought;
      }
  for (int t = 0; t < T; ++t)
    out.net[t] = out.sold_to_grid[t] - out.bought_from_grid[t];
  for (ExchangeSeries::Community& com : out.communities)
    for (int t = 0; t < T; ++t)
      com.net[t] = com.sold_to_grid[t] - com.bought_from_grid[t];
  return out;
}

ExchangeSeries expected_exchange(const std::vector<ExchangeSeries>& series,
                                 const std::vector<double>& weights) {
  check_weights(series.size(), weights, "expected_exchange");
  if (series.empty())
    throw std::invalid_argument("expected_exchange: no series given");
  const std::size_t T = series[0].sold_to_grid.size();
  const std::size_t C = series[0].communities.size();
  for (const ExchangeSeries& s : series)
    if (s.sold_to_grid.size() != T || s.communities.size() != C)
      throw std::invalid_argument(
          "expected_exchange: series shapes do not match");

  ExchangeSeries out;
  out.sold_to_grid.assign(T, 0.0);
  out.bought_from_grid.assign(T, 0.0);
  out.net.assign(T, 0.0);
  out.communities.resize(C);
  for (ExchangeSeries::Community& com : out.communities) {
    com.sold_to_grid.assign(T, 0.0);
    com.bought_from_grid.assign(T, 0.0);
    com.net.assign(T, 0.0);
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    double w = weights[i];
    for (std::size_t t = 0; t < T; ++t) {
      out.sold_to_grid[t] += w * series[i].sold_to_grid[t];
      out.bought_from_grid[t] += w * series[i].bought_from_grid[t];
    }
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = 0; t < T; ++t) {
        out.communities[c].sold_to_grid[t] +=
            w * series[i].communities[c].sold_to_grid[t];
        out.communities[c].bought_from_grid[t] +=
            w * series[i].communities[c].bought_from_grid[t];
      }
  }
  for (std::size_t t = 0; t < T; ++t)
    out.net[t] = out.sold_to_grid[t] - out.bought_from_grid[t];
  for (ExchangeSeries::Community& com : out.communities)
    for (std::size_t t = 0; t < T; ++t)
      com.net[t] = com.sold_to_grid[t] - com.bought_from_grid[t];
  return out;
}

std::string render_ledger_text(const Ledger& ledger) {
  std::size_t width = 0;
  for (const LedgerRow& r : ledger.rows)
    width = std::max(width, r.label.size());
  width = std::max(width, std::size_t(8));

  std::ostringstream os;
  os << "Category";
  for (std::size_t i = 8; i < width; ++i) os << ' ';
  os << "  Amount ($)\n";
  os << std::string(width + 12, '-') << "\n";
  for (const LedgerRow& r : ledger.rows) {
    if (r.key == "total") os << std::string(width + 12, '-') << "\n";
    char buf[32];
    double shown = std::abs(r.amount) < 0.005 ? 0.0 : r.amount;
    std::snprintf(buf, sizeof(buf), "%.2f", shown);
    std::string amount(buf);
    os << r.label;
    for (std::size_t i = r.label.size(); i < width; ++i) os << ' ';
    for (std::size_t i = amount.size(); i < 12; ++i) os << ' ';
    os << amount << "\n";
  }
  return os.str();
}

std::string ledger_to_csv(const Ledger& ledger) {
  std::ostringstream os;
  os << "category,amount_usd\n";
  for (const LedgerRow& r : ledger.rows)
    os << r.key << ',' << fmt(r.amount) << '\n';
  return os.str();
}

Ledger parse_ledger_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"category",
                                                              "amount_usd"})
    throw std::runtime_error("ledger CSV: header must be 'category,amount_usd'");
  Ledger out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 2)
      throw std::runtime_error("ledger CSV line " + std::to_string(line_no) +
                               ": expected 2 columns");
    const char* label = label_for(cells[0]);
    out.rows.push_back({cells[0], label ? label : cells[0].c_str(),
                        parse_number(cells[1], "ledger CSV line " +
                                                   std::to_string(line_no))});
  }
  return out;
}

namespace {

std::string exchange_csv(const std::vector<double>& sold,
                         const std::vector<double>& bought,
                         const std::vector<double>& net) {
  std::ostringstream os;
  os << "hour,sold_kwh,bought_kwh,net_kwh\n";
  for (std::size_t t = 0; t < sold.size(); ++t)
    os << t << ',' << fmt(sold[t]) << ',' << fmt(bought[t]) << ','
       << fmt(net[t]) << '\n';
  return os.str();
}

}  // namespace

std::string exchange_to_csv(const ExchangeSeries& series) {
  return exchange_csv(series.sold_to_grid, series.bought_from_grid,
                      series.net);
}

std::string exchange_to_csv(const ExchangeSeries::Community& com) {
  return exchange_csv(com.sold_to_grid, com.bought_from_grid, com.net);
}

ExchangeSeries parse_exchange_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) ||
      split_csv_line(line) != std::vector<std::string>{"hour", "sold_kwh",
                                                       "bought_kwh",
                                                       "net_kwh"})
    throw std::runtime_error(
        "exchange CSV: header must be 'hour,sold_kwh,bought_kwh,net_kwh'");
  ExchangeSeries out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 4)
      throw std::runtime_error("exchange CSV line " +
                               std::to_string(line_no) +
                               ": expected 4 columns");
    std::string ctx = "exchange CSV line " + std::to_string(line_no);
    if (static_cast<std::size_t>(parse_number(cells[0], ctx)) !=
        out.sold_to_grid.size())
      throw std::runtime_error(ctx + ": hours must start at 0 and increase");
    out.sold_to_grid.push_back(parse_number(cells[1], ctx));
    out.bought_from_grid.push_back(parse_number(cells[2], ctx));
    out.net.push_back(parse_number(cells[3], ctx));
  }
  return out;
}

}  // namespace p2psched::report
