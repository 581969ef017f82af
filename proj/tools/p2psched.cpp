// Command-line front end: solve instances, export models, validate inputs.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "p2psched/lp_export.hpp"
#include "p2psched/milp.hpp"
#include "p2psched/model.hpp"
#include "p2psched/pipeline.hpp"
#include "p2psched/scheduler.hpp"

namespace {

using p2psched::pipeline::RunConfig;
using p2psched::pipeline::ScenarioSource;

void apply_scenario_spec(RunConfig& config, const std::string& spec) {
  if (spec.empty()) {
    config.source = ScenarioSource::FromInstance;
  } else if (spec == "none") {
    config.source = ScenarioSource::None;
  } else if (spec == "sample") {
    config.source = ScenarioSource::Sample;
  } else {
    config.source = ScenarioSource::File;
    config.scenario_file = spec;
  }
}

void add_common_options(CLI::App* cmd, RunConfig& config,
                        std::string& scenario_spec, std::string& strategy) {
  cmd->add_option("-i,--instance", config.instance_path,
                  "instance file (structured-text document)")
      ->required();
  cmd->add_option(
      "-s,--scenarios", scenario_spec,
      "EV scenario source: a CSV path, 'sample' (Monte-Carlo + K-means), or "
      "'none'; omitted = the instance's own list");
  cmd->add_option("-n,--samples", config.n,
                  "Monte-Carlo sample count for --scenarios sample");
  cmd->add_option("-k,--representatives", config.k,
                  "number of K-means representatives for --scenarios sample");
  cmd->add_option("--seed", config.seed,
                  "seed for sampling and K-means initialization");
  cmd->add_option("--strategy", strategy,
                  "solve strategy: two_stage (default) or monolithic");
  cmd->add_option("-o,--out", config.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Day-ahead peer-to-peer energy community scheduler: builds and solves "
      "the community MILP, reports the profit ledger and grid exchange."};
  app.require_subcommand(1);

  RunConfig config;
  std::string scenario_spec;
  std::string strategy = "two_stage";
  double time_budget = -1.0, gap = -1.0;

  CLI::App* run_cmd =
      app.add_subcommand("run", "solve the instance and write result files");
  add_common_options(run_cmd, config, scenario_spec, strategy);
  run_cmd->add_option("--time-budget", time_budget,
                      "wall-clock solve budget in seconds");
  run_cmd->add_option("--gap", gap, "absolute optimality gap");
  run_cmd->add_flag("--emit-lp", config.emit_lp,
                    "also write the model(s) in LP format");
  run_cmd->add_option("--threads", config.threads,
                      "parallel per-scenario solvers (capped by the "
                      "P2PSCHED_THREADS environment variable)");

  CLI::App* export_cmd = app.add_subcommand(
      "export", "write the scheduling model(s) in LP format without solving");
  add_common_options(export_cmd, config, scenario_spec, strategy);

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "check an instance file and report violations");
  std::string validate_path;
  validate_cmd
      ->add_option("-i,--instance", validate_path, "instance file to check")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      p2psched::model::Instance instance =
          p2psched::model::load_instance(validate_path);
      std::cout << "ok: " << instance.num_communities << " communities x "
                << instance.units_per_community << " units, horizon "
                << instance.horizon << ", " << instance.evs.size()
                << " EV scenario(s)\n";
      return 0;
    }

    apply_scenario_spec(config, scenario_spec);
    config.strategy = p2psched::scheduler::parse_strategy(strategy);
    if (time_budget > 0) config.solve.time_budget_s = time_budget;
    if (gap > 0) config.solve.abs_gap = gap;

    if (export_cmd->parsed()) {
      for (const std::string& path :
           p2psched::pipeline::export_model(config))
        std::cout << "wrote " << path << "\n";
      return 0;
    }

    p2psched::pipeline::RunResult result = p2psched::pipeline::run(config);
    for (const p2psched::pipeline::ScenarioOutcome& s : result.scenarios) {
      std::cout << "scenario " << s.scenario.id << " (weight " << s.weight
                << "): " << p2psched::milp::to_string(s.solution.status)
                << ", objective " << s.solution.objective << ", "
                << s.solution.node_count << " LP solves";
      if (s.solution.gap > 0) std::cout << ", gap " << s.solution.gap;
      std::cout << "\n";
    }
    std::cout << "\n" << result.ledger_text;
    for (const std::string& path : result.written_paths)
      std::cout << "wrote " << path << "\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
