#include <benchmark/benchmark.h>

#include "p2psched/milp.hpp"
#include "p2psched/model.hpp"
#include "p2psched/scheduler.hpp"
#include "support/instance_gen.hpp"

// Solver microbenchmarks: LP relaxation and full branch-and-bound on the
// randomized community instances the tests use.

namespace {

void BM_LpRelaxation(benchmark::State& state) {
  p2psched::model::Instance in = mid_instance(301);
  p2psched::scheduler::BuiltModel built =
      p2psched::scheduler::build_model(in, in.evs);
  for (auto _ : state) {
    p2psched::milp::Solution s = p2psched::milp::solve_lp(built.model);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_LpRelaxation);

void BM_TinyMilp(benchmark::State& state) {
  p2psched::model::Instance in = tiny_instance(state.range(0));
  p2psched::scheduler::BuiltModel built =
      p2psched::scheduler::build_model(in, in.evs);
  for (auto _ : state) {
    p2psched::milp::Solution s = p2psched::milp::solve_milp(built.model);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_TinyMilp)->Arg(1)->Arg(2)->Arg(3);

void BM_MidMilp(benchmark::State& state) {
  p2psched::model::Instance in = mid_instance(state.range(0));
  for (auto _ : state) {
    p2psched::scheduler::ScheduleResult r =
        p2psched::scheduler::fix_assignment_and_solve(
            in, in.evs, p2psched::scheduler::Strategy::Monolithic);
    benchmark::DoNotOptimize(r.solution.objective);
  }
}
BENCHMARK(BM_MidMilp)->Arg(101)->Arg(102)->Unit(benchmark::kMillisecond);

void BM_ModelBuild(benchmark::State& state) {
  p2psched::model::Instance in = mid_instance(303);
  for (auto _ : state) {
    p2psched::scheduler::BuiltModel built =
        p2psched::scheduler::build_model(in, in.evs);
    benchmark::DoNotOptimize(built.model.num_variables());
  }
}
BENCHMARK(BM_ModelBuild);

}  // namespace
