#ifndef P2PSCHED_REPORT_HPP
#define P2PSCHED_REPORT_HPP

#include <string>
#include <vector>

#include "p2psched/milp.hpp"
#include "p2psched/model.hpp"
#include "p2psched/scheduler.hpp"

// Renders solved schedules into result artifacts: the per-category profit
// ledger and the hourly grid-exchange series, as text tables, CSV, and JSON.

namespace p2psched::report {

/// Hourly grid exchange, system-wide and per community.
struct ExchangeSeries {
  std::vector<double> sold_to_grid;      // kWh per hour
  std::vector<double> bought_from_grid;  // kWh per hour
  std::vector<double> net;               // sold - bought
  struct Community {
    std::vector<double> sold_to_grid, bought_from_grid, net;
  };
  std::vector<Community> communities;
};

/// One ledger row; `key` is the stable machine name, `label` the
/// human-facing category name.
struct LedgerRow {
  std::string key;
  std::string label;
  double amount = 0.0;
};

struct Ledger {
  std::vector<LedgerRow> rows;  // fixed category order, total last
  double total() const;
  double row(const std::string& key) const;
};

/// Expectation of the breakdowns under the given weights (weights must sum
/// to 1 within 1e-6; throws std::invalid_argument otherwise). Rows appear in
/// fixed order: grid, dr, p2p, parking, ev_exchange, social_welfare,
/// standby, ens_penalty, total.
Ledger profit_table(const std::vector<scheduler::ProfitBreakdown>& breakdowns,
                    const std::vector<double>& weights);

/// Aggregates grid sales/purchases per hour from a solved schedule.
ExchangeSeries exchange_series(const milp::Solution& solution,
                               const scheduler::VariableIndex& index);

/// Weighted hourly expectation across scenarios (same weight rules as
/// profit_table).
ExchangeSeries expected_exchange(const std::vector<ExchangeSeries>& series,
                                 const std::vector<double>& weights);

/// Two-decimal human table of the ledger.
std::string render_ledger_text(const Ledger& ledger);

/// profits.csv: header `category,amount_usd`, full-precision values.
std::string ledger_to_csv(const Ledger& ledger);
Ledger parse_ledger_csv(const std::string& text);

/// exchange.csv: header `hour,sold_kwh,bought_kwh,net_kwh`.
std::string exchange_to_csv(const ExchangeSeries& series);          // system
std::string exchange_to_csv(const ExchangeSeries::Community& com);  // one community
ExchangeSeries parse_exchange_csv(const std::string& text);         // system part

}  // namespace p2psched::report

#endif  // P2PSCHED_REPORT_HPP
