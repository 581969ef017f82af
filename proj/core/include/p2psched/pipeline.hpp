#ifndef P2PSCHED_PIPELINE_HPP
#define P2PSCHED_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "p2psched/milp.hpp"
#include "p2psched/model.hpp"
#include "p2psched/report.hpp"
#include "p2psched/scheduler.hpp"

// End-to-end orchestration: load -> sample -> reduce -> build -> solve ->
// report, with reproducibility controls. This is the engine behind the CLI.

namespace p2psched::pipeline {

enum class ScenarioSource {
  FromInstance,  // use the instance's own EV scenario list
  File,          // load a scenario CSV
  Sample,        // Monte-Carlo sample n scenarios, K-means reduce to k
  None,          // schedule with no guest EVs
};

struct RunConfig {
  std::string instance_path;
  ScenarioSource source = ScenarioSource::FromInstance;
  std::string scenario_file;  // when source == File
  int n = 1000;               // when source == Sample
  int k = 3;                  // when source == Sample
  std::uint64_t seed = 0;
  scheduler::Strategy strategy = scheduler::Strategy::TwoStage;
  milp::SolveOptions solve;
  std::string out_dir = "out";
  bool emit_lp = false;
  int threads = 1;  // per-scenario solve workers
};

struct ScenarioOutcome {
  model::EvScenario scenario;  // weight = representative probability mass
  double weight = 1.0;
  milp::Solution solution;
  scheduler::ProfitBreakdown profit;
  report::ExchangeSeries exchange;
};

struct RunResult {
  // 0: all scenario solves optimal; 2: at least one hit the time budget
  // (incumbent returned). Errors are thrown, not encoded.
  int exit_code = 0;
  bool no_evs = false;
  std::vector<ScenarioOutcome> scenarios;
  report::Ledger ledger;               // expectation over scenario weights
  report::ExchangeSeries exchange;     // expectation over scenario weights
  std::string ledger_text;
  std::vector<std::string> written_paths;
};

/// Resolves the scenario list for the config: FromInstance / File / Sample
/// (sample then reduce) / None. Weights are normalized to sum to 1.
std::vector<model::EvScenario> resolve_scenarios(const model::Instance& instance,
                                                 const RunConfig& config);

/// Full pipeline. Writes solution.json, profits.csv, exchange.csv (plus
/// exchange_c<k>.csv per community), scenarios.csv, and model.lp /
/// model_s<i>.lp when emit_lp is set, all under config.out_dir.
/// Each scenario is solved as a concrete single-EV fleet (weight 1 inside
/// the model); scenario weights enter only the reported expectations.
RunResult run(const RunConfig& config);

/// Builds the model(s) and writes LP-format text without solving; returns
/// the written paths.
std::vector<std::string> export_model(const RunConfig& config);

}  // namespace p2psched::pipeline

#endif  // P2PSCHED_PIPELINE_HPP
