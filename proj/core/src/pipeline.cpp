#include "p2psched/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "p2psched/lp_export.hpp"
#include "p2psched/scenario.hpp"

namespace p2psched::pipeline {

namespace {

namespace fs = std::filesystem;
using model::EvScenario;
using model::Instance;
using nlohmann::ordered_json;

int effective_threads(const RunConfig& config, std::size_t jobs) {
  int threads = std::max(1, config.threads);
  if (const char* env = std::getenv("P2PSCHED_THREADS")) {
    try {
      threads = std::min(threads, std::max(1, std::stoi(env)));
    } catch (const std::exception&) {
      // ignore unparsable values; the flag still applies
    }
  }
  return std::min<int>(threads, std::max<std::size_t>(jobs, 1));
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& written) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for writing");
  os << content;
  os.close();
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
  written.push_back(path.string());
}

milp::SolveOptions options_for(const Instance& instance,
                               const RunConfig& config) {
  milp::SolveOptions opt = config.solve;
  // the instance's solver section supplies defaults the config can override;
  // config.solve is taken as authoritative when it differs from the struct
  // defaults, otherwise the instance settings apply
  milp::SolveOptions defaults;
  if (opt.abs_gap == defaults.abs_gap) opt.abs_gap = instance.options.abs_gap;
  if (opt.feas_tol == defaults.feas_tol)
    opt.feas_tol = instance.options.feas_tol;
  if (opt.int_tol == defaults.int_tol) opt.int_tol = instance.options.int_tol;
  if (opt.time_budget_s == defaults.time_budget_s)
    opt.time_budget_s = instance.options.time_budget_s;
  return opt;
}

ordered_json profit_json(const scheduler::ProfitBreakdown& b) {
  return ordered_json{{"grid", b.grid},
                      {"dr", b.dr},
                      {"p2p", b.p2p},
                      {"parking", b.parking},
                      {"ev_exchange", b.ev_exchange},
                      {"social_welfare", b.social_welfare},
                      {"standby", b.standby},
                      {"ens_penalty", b.ens_penalty},
                      {"total", b.total}};
}

}  // namespace

std::vector<EvScenario> resolve_scenarios(const Instance& instance,
                                          const RunConfig& config) {
  std::vector<EvScenario> out;
  switch (config.source) {
    case ScenarioSource::FromInstance:
      out = instance.evs;
      break;
    case ScenarioSource::File:
      out = scenario::load_scenarios_csv(config.scenario_file);
      break;
    case ScenarioSource::Sample: {
      model::EvDistribution dist =
          instance.ev_distribution.value_or(model::EvDistribution{});
      dist.seed = config.seed;
      std::vector<EvScenario> samples =
          scenario::sample_scenarios(dist, config.n, instance.horizon);
      scenario::ReducedSet reduced =
          scenario::kmeans_reduce(samples, config.k, config.seed);
      out = std::move(reduced.representatives);
      break;
    }
    case ScenarioSource::None:
      break;
  }
  double sum = 0.0;
  for (const EvScenario& ev : out) sum += ev.weight;
  if (!out.empty()) {
    if (sum > 0.0) {
      for (EvScenario& ev : out) ev.weight /= sum;
    } else {
      for (EvScenario& ev : out) ev.weight = 1.0 / out.size();
    }
  }
  return out;
}

RunResult run(const RunConfig& config) {
  Instance instance = model::load_instance(config.instance_path);
  std::vector<EvScenario> scenarios = resolve_scenarios(instance, config);
  milp::SolveOptions options = options_for(instance, config);

  using Clock = std::chrono::steady_clock;
  auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(
                                         options.time_budget_s));

  RunResult result;
  result.no_evs = scenarios.empty();

  // one solve job per scenario; a no-EV run is a single job with an empty
  // fleet
  std::size_t jobs = result.no_evs ? 1 : scenarios.size();
  std::vector<ScenarioOutcome> outcomes(jobs);
  std::vector<std::exception_ptr> errors(jobs);

  auto solve_one = [&](std::size_t i) {
    std::vector<EvScenario> fleet;
    ScenarioOutcome& out = outcomes[i];
    if (result.no_evs) {
      out.scenario.id = "none";
      out.scenario.weight = 1.0;
      out.weight = 1.0;
    } else {
      out.scenario = scenarios[i];
      out.weight = scenarios[i].weight;
      EvScenario concrete = scenarios[i];
      concrete.weight = 1.0;  // the model sees a realized fleet
      fleet.push_back(std::move(concrete));
    }
    milp::SolveOptions sub = options;
    sub.time_budget_s = std::max(
        0.0, std::chrono::duration<double>(deadline - Clock::now()).count());
    scheduler::ScheduleResult solved = scheduler::fix_assignment_and_solve(
        instance, fleet, config.strategy, sub);
    if (!solved.solution.has_values())
      throw std::runtime_error(
          "scenario '" + out.scenario.id + "' ended " +
          std::string(milp::to_string(solved.solution.status)) +
          " without a usable schedule");
    out.profit =
        scheduler::evaluate_profit(solved.solution, instance, solved.index)
            .aggregate;
    out.exchange = report::exchange_series(solved.solution, solved.index);
    out.solution = std::move(solved.solution);
  };

  int workers = effective_threads(config, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) solve_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs;
             i = next.fetch_add(1)) {
          try {
            solve_one(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (std::thread& t : pool) t.join();
    for (std::size_t i = 0; i < jobs; ++i)
      if (errors[i]) std::rethrow_exception(errors[i]);
  }

  result.scenarios = std::move(outcomes);
  for (const ScenarioOutcome& out : result.scenarios)
    if (out.solution.status == milp::SolveStatus::TimeLimit)
      result.exit_code = 2;

  std::vector<scheduler::ProfitBreakdown> profits;
  std::vector<report::ExchangeSeries> series;
  std::vector<double> weights;
  for (const ScenarioOutcome& out : result.scenarios) {
    profits.push_back(out.profit);
    series.push_back(out.exchange);
    weights.push_back(out.weight);
  }
  result.ledger = report::profit_table(profits, weights);
  result.exchange = report::expected_exchange(series, weights);
  result.ledger_text = report::render_ledger_text(result.ledger);

  // ----- artifacts -----
  fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);

  write_file(out_dir / "scenarios.csv",
             scenario::scenarios_to_csv(scenarios), result.written_paths);
  write_file(out_dir / "profits.csv", report::ledger_to_csv(result.ledger),
             result.written_paths);
  write_file(out_dir / "exchange.csv",
             report::exchange_to_csv(result.exchange), result.written_paths);
  for (std::size_t c = 0; c < result.exchange.communities.size(); ++c)
    write_file(out_dir / ("exchange_c" + std::to_string(c) + ".csv"),
               report::exchange_to_csv(result.exchange.communities[c]),
               result.written_paths);

  ordered_json doc;
  doc["instance"] = config.instance_path;
  doc["strategy"] = scheduler::to_string(config.strategy);
  doc["exit_code"] = result.exit_code;
  doc["no_evs"] = result.no_evs;
  ordered_json scen_arr = ordered_json::array();
  for (const ScenarioOutcome& out : result.scenarios) {
    ordered_json s;
    s["id"] = out.scenario.id;
    s["weight"] = out.weight;
    s["status"] = milp::to_string(out.solution.status);
    s["objective"] = out.solution.objective;
    s["gap"] = out.solution.gap;
    s["node_count"] = out.solution.node_count;
    s["profit"] = profit_json(out.profit);
    scen_arr.push_back(std::move(s));
  }
  doc["scenarios"] = std::move(scen_arr);
  ordered_json expected;
  for (const report::LedgerRow& row : result.ledger.rows)
    expected[row.key] = row.amount;
  doc["expected_profit"] = std::move(expected);
  write_file(out_dir / "solution.json", doc.dump(2) + "\n",
             result.written_paths);

  if (config.emit_lp) {
    if (result.no_evs) {
      scheduler::BuiltModel built = scheduler::build_model(instance, {});
      write_file(out_dir / "model.lp", milp::export_lp_string(built.model),
                 result.written_paths);
    } else {
      for (std::size_t i = 0; i < scenarios.size(); ++i) {
        EvScenario concrete = scenarios[i];
        concrete.weight = 1.0;
        scheduler::BuiltModel built =
            scheduler::build_model(instance, {concrete});
        write_file(out_dir / ("model_s" + std::to_string(i) + ".lp"),
                   milp::export_lp_string(built.model), result.written_paths);
      }
    }
  }
  return result;
}

std::vector<std::string> export_model(const RunConfig& config) {
  Instance instance = model::load_instance(config.instance_path);
  std::vector<EvScenario> scenarios = resolve_scenarios(instance, config);

  fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  if (scenarios.empty()) {
    scheduler::BuiltModel built = scheduler::build_model(instance, {});
    write_file(out_dir / "model.lp", milp::export_lp_string(built.model),
               written);
  } else {
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      EvScenario concrete = scenarios[i];
      concrete.weight = 1.0;
      scheduler::BuiltModel built =
          scheduler::build_model(instance, {concrete});
      written.push_back((out_dir / ("model_s" + std::to_string(i) + ".lp"))
                            .string());
      milp::export_lp_file(built.model, written.back());
    }
  }
  return written;
}

}  // namespace p2psched::pipeline
