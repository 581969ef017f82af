#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "p2psched/milp.hpp"
#include "support/oracle.hpp"

using namespace p2psched::milp;

namespace {

/// Random bounded MILP: every continuous variable has a finite upper bound,
/// so no instance is unbounded and exhaustive enumeration is a total oracle.
/// When anchored, every row's rhs is placed relative to a hidden reference
/// point inside the variable box, making the model feasible by construction;
/// otherwise the rhs is free and the model may be infeasible.
MilpModel random_bounded_milp(std::uint64_t seed, bool anchored = false) {
  std::mt19937_64 gen(seed);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  };
  auto uni_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  };

  MilpModel m;
  std::vector<double> anchor;
  const int n_bin = uni_int(1, 8);
  const int n_cont = uni_int(0, 4);
  for (int j = 0; j < n_bin; ++j) {
    const int id = m.add_binary("b" + std::to_string(j));
    m.set_objective_coef(id, std::round(uni(-3.0, 3.0) * 8.0) / 8.0);
    anchor.push_back(uni_int(0, 1));
  }
  for (int j = 0; j < n_cont; ++j) {
    const double ub = uni(0.5, 3.0);
    const int id = m.add_continuous("x" + std::to_string(j), 0.0, ub);
    m.set_objective_coef(id, std::round(uni(-2.0, 2.0) * 8.0) / 8.0);
    anchor.push_back(uni(0.0, ub));
  }
  const int rows = uni_int(1, 6);
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < m.num_variables(); ++j) {
      if (uni(0.0, 1.0) < 0.6) {
        terms.push_back({j, std::round(uni(-2.0, 2.0) * 8.0) / 8.0});
      }
    }
    if (terms.empty()) terms.push_back({0, 1.0});
    const int pick = uni_int(0, 2);
    const Relation rel = pick == 0   ? Relation::LessEqual
                         : pick == 1 ? Relation::GreaterEqual
                                     : Relation::Equal;
    double rhs = std::round(uni(-2.0, 4.0) * 4.0) / 4.0;
    if (anchored) {
      double activity = 0.0;
      for (const Term& t : terms) activity += t.coef * anchor[t.var];
      const double slack = 0.25 * uni_int(0, 6);
      rhs = rel == Relation::LessEqual      ? activity + slack
            : rel == Relation::GreaterEqual ? activity - slack
                                            : activity;
    }
    m.add_constraint("r" + std::to_string(i), std::move(terms), rel, rhs);
  }
  m.set_objective_offset(std::round(uni(-1.0, 1.0) * 4.0) / 4.0);
  return m;
}

}  // namespace

TEST_CASE("lp: single variable against a row bound") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf);
  m.set_objective_coef(x, 1.0);
  m.add_constraint("cap", {{x, 1.0}}, Relation::LessEqual, 3.0);
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.value(x) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("lp: variable upper bound alone binds") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 2.5);
  m.set_objective_coef(x, 2.0);
  m.set_objective_offset(1.0);
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("lp: shared budget row") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf);
  const int y = m.add_continuous("y", 0.0, kInf);
  m.set_objective_coef(x, 1.0);
  m.set_objective_coef(y, 1.0);
  m.add_constraint("budget", {{x, 1.0}, {y, 1.0}}, Relation::LessEqual, 1.0);
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.value(x) + s.value(y) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lp: contradictory rows are infeasible") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf);
  m.set_objective_coef(x, 1.0);
  m.add_constraint("hi", {{x, 1.0}}, Relation::GreaterEqual, 2.0);
  m.add_constraint("lo", {{x, 1.0}}, Relation::LessEqual, 1.0);
  CHECK(solve_lp(m).status == SolveStatus::Infeasible);
  CHECK(solve_milp(m).status == SolveStatus::Infeasible);
}

TEST_CASE("lp: unbounded ray is reported") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf);
  const int y = m.add_continuous("y", 0.0, 1.0);
  m.set_objective_coef(x, 1.0);
  m.add_constraint("tie", {{x, 1.0}, {y, -1.0}}, Relation::GreaterEqual, 0.0);
  CHECK(solve_lp(m).status == SolveStatus::Unbounded);
}

TEST_CASE("milp: one-of-two selection picks the better binary") {
  MilpModel m;
  const int a = m.add_binary("a");
  const int b = m.add_binary("b");
  m.set_objective_coef(a, 3.0);
  m.set_objective_coef(b, 2.0);
  m.add_constraint("pick", {{a, 1.0}, {b, 1.0}}, Relation::LessEqual, 1.0);
  Solution s = solve_milp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.value(a) == doctest::Approx(1.0));
  CHECK(s.value(b) == doctest::Approx(0.0));
  CHECK(check_solution(m, s.values).empty());
}

TEST_CASE("milp: no binaries reduces to the lp") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 4.0);
  const int y = m.add_continuous("y", 0.0, 4.0);
  m.set_objective_coef(x, 1.0);
  m.set_objective_coef(y, 0.5);
  m.add_constraint("mix", {{x, 2.0}, {y, 1.0}}, Relation::LessEqual, 5.0);
  Solution lp = solve_lp(m);
  Solution mip = solve_milp(m);
  REQUIRE(lp.status == SolveStatus::Optimal);
  REQUIRE(mip.status == SolveStatus::Optimal);
  CHECK(mip.objective == doctest::Approx(lp.objective).epsilon(1e-12));
}

TEST_CASE("milp: fractional relaxation forced to integrality") {
  // LP relaxation puts both binaries at 0.5; the best integral point uses one.
  MilpModel m;
  const int a = m.add_binary("a");
  const int b = m.add_binary("b");
  m.set_objective_coef(a, 1.0);
  m.set_objective_coef(b, 1.0);
  m.add_constraint("pair", {{a, 2.0}, {b, 2.0}}, Relation::LessEqual, 2.0);
  Solution lp = solve_lp(m);
  Solution mip = solve_milp(m);
  REQUIRE(lp.status == SolveStatus::Optimal);
  REQUIRE(mip.status == SolveStatus::Optimal);
  CHECK(lp.objective == doctest::Approx(1.0));
  CHECK(mip.objective == doctest::Approx(1.0));
  CHECK(std::abs(mip.value(a) - mip.value(b)) == doctest::Approx(1.0));
}

TEST_CASE("milp: matches exhaustive enumeration on random feasible models") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    CAPTURE(seed);
    MilpModel m = random_bounded_milp(seed, /*anchored=*/true);
    OracleResult ref = oracle_best(m);
    SolveOptions opts;
    opts.abs_gap = 1e-9;
    Solution got = solve_milp(m, opts);
    REQUIRE(ref.status == SolveStatus::Optimal);
    REQUIRE(got.status == SolveStatus::Optimal);
    CHECK(std::abs(got.objective - ref.objective) <= 1e-6);
    CHECK(check_solution(m, got.values).empty());
    CHECK(std::abs(eval_objective(m, got.values) - got.objective) <= 1e-7);
  }
}

TEST_CASE("milp: agrees with enumeration on status for free-form models") {
  // Unanchored rows make many of these infeasible; the solver must say so
  // exactly when the oracle does.
  int infeasible_seen = 0;
  for (std::uint64_t seed = 101; seed <= 120; ++seed) {
    CAPTURE(seed);
    MilpModel m = random_bounded_milp(seed);
    OracleResult ref = oracle_best(m);
    Solution got = solve_milp(m);
    REQUIRE(got.status != SolveStatus::TimeLimit);
    CHECK(got.status == ref.status);
    if (ref.status == SolveStatus::Infeasible) ++infeasible_seen;
    if (ref.status == SolveStatus::Optimal &&
        got.status == SolveStatus::Optimal) {
      CHECK(std::abs(got.objective - ref.objective) <= 1e-6);
      CHECK(check_solution(m, got.values).empty());
    }
  }
  CHECK(infeasible_seen >= 1);  // the batch must exercise the infeasible path
}

TEST_CASE("milp: identical model solves identically") {
  MilpModel m = random_bounded_milp(7);
  Solution a = solve_milp(m);
  Solution b = solve_milp(m);
  REQUIRE(a.status == b.status);
  CHECK(a.objective == b.objective);
  CHECK(a.node_count == b.node_count);
  CHECK(a.values == b.values);
  CHECK(a.incumbent_history == b.incumbent_history);
}

TEST_CASE("milp: incumbent history is nondecreasing and ends at the optimum") {
  for (std::uint64_t seed : {3u, 11u, 19u}) {
    CAPTURE(seed);
    MilpModel m = random_bounded_milp(seed);
    Solution s = solve_milp(m);
    if (s.status != SolveStatus::Optimal) continue;
    REQUIRE(!s.incumbent_history.empty());
    for (std::size_t i = 1; i < s.incumbent_history.size(); ++i) {
      CHECK(s.incumbent_history[i] >= s.incumbent_history[i - 1]);
    }
    CHECK(s.incumbent_history.back() == doctest::Approx(s.objective));
  }
}

TEST_CASE("milp: node budget of one forces a time-limit result") {
  // A chain of interacting binaries that cannot be proven optimal at the root.
  MilpModel m;
  std::vector<int> ids;
  for (int j = 0; j < 6; ++j) ids.push_back(m.add_binary("b" + std::to_string(j)));
  for (int j = 0; j < 6; ++j) m.set_objective_coef(ids[j], 1.0);
  for (int j = 0; j + 1 < 6; ++j) {
    m.add_constraint("pair" + std::to_string(j),
                     {{ids[j], 2.0}, {ids[j + 1], 2.0}}, Relation::LessEqual,
                     3.0);
  }
  SolveOptions opts;
  opts.max_nodes = 1;
  Solution s = solve_milp(m, opts);
  CHECK(s.status == SolveStatus::TimeLimit);
  CHECK(s.gap > 0.0);
}

TEST_CASE("milp: cutoff prunes everything at or below it") {
  MilpModel m;
  const int a = m.add_binary("a");
  const int b = m.add_binary("b");
  m.set_objective_coef(a, 3.0);
  m.set_objective_coef(b, 2.0);
  m.add_constraint("pick", {{a, 1.0}, {b, 1.0}}, Relation::LessEqual, 1.0);

  SolveOptions below;
  below.cutoff = 2.5;
  Solution s1 = solve_milp(m, below);
  REQUIRE(s1.status == SolveStatus::Optimal);
  CHECK(s1.objective == doctest::Approx(3.0));

  SolveOptions at;
  at.cutoff = 3.0;
  CHECK(solve_milp(m, at).status == SolveStatus::Infeasible);

  SolveOptions above;
  above.cutoff = 10.0;
  CHECK(solve_milp(m, above).status == SolveStatus::Infeasible);
}

TEST_CASE("milp: invalid options are rejected") {
  MilpModel m;
  m.add_binary("a");
  SolveOptions bad;
  bad.cutoff = kInf;
  CHECK_THROWS_AS(solve_milp(m, bad), std::invalid_argument);
  SolveOptions nan_cutoff;
  nan_cutoff.cutoff = std::nan("");
  CHECK_THROWS_AS(solve_milp(m, nan_cutoff), std::invalid_argument);
  SolveOptions neg_gap;
  neg_gap.abs_gap = -1.0;
  CHECK_THROWS_AS(solve_milp(m, neg_gap), std::invalid_argument);
}

TEST_CASE("model: validation catches structural mistakes") {
  auto has_issue = [](const std::vector<std::string>& issues,
                      const std::string& needle) {
    for (const std::string& s : issues)
      if (s.find(needle) != std::string::npos) return true;
    return false;
  };

  MilpModel dup_var;
  dup_var.add_continuous("x", 0.0, 1.0);
  dup_var.add_variable("x", VarKind::Continuous, 0.0, 1.0);
  CHECK(has_issue(dup_var.validate(), "duplicate variable name 'x'"));
  CHECK_THROWS_AS(solve_lp(dup_var), std::invalid_argument);

  MilpModel bad_ref;
  const int x = bad_ref.add_continuous("x", 0.0, 1.0);
  bad_ref.add_constraint("c", {{x + 5, 1.0}}, Relation::LessEqual, 0.0);
  CHECK(has_issue(bad_ref.validate(), "unknown variable id"));
  CHECK_THROWS_AS(solve_milp(bad_ref), std::invalid_argument);

  MilpModel dup_con;
  const int y = dup_con.add_continuous("y", 0.0, 1.0);
  dup_con.add_constraint("c", {{y, 1.0}}, Relation::LessEqual, 0.5);
  dup_con.add_constraint("c", {{y, 1.0}}, Relation::LessEqual, 0.7);
  CHECK(has_issue(dup_con.validate(), "duplicate constraint name 'c'"));

  MilpModel crossed;
  crossed.add_continuous("z", 2.0, 1.0);
  CHECK(has_issue(crossed.validate(), "empty bound range"));

  MilpModel ok;
  const int w = ok.add_continuous("w", 0.0, 1.0);
  ok.add_constraint("cap", {{w, 1.0}}, Relation::LessEqual, 0.5);
  CHECK(ok.validate().empty());
}

TEST_CASE("check_solution: reports bound, row, and integrality violations") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 1.0);
  const int b = m.add_binary("b");
  m.add_constraint("row", {{x, 1.0}, {b, 1.0}}, Relation::LessEqual, 1.0);
  CHECK(check_solution(m, {0.5, 0.0}).empty());
  CHECK(!check_solution(m, {2.0, 0.0}).empty());   // bound
  CHECK(!check_solution(m, {1.0, 1.0}).empty());   // row
  CHECK(!check_solution(m, {0.25, 0.5}).empty());  // integrality
  const std::vector<std::string> short_vec = check_solution(m, {0.5});
  REQUIRE(short_vec.size() == 1);
  CHECK(short_vec.front().find("wrong length") != std::string::npos);
}

TEST_CASE("milp: mixed binary/continuous coupling solved exactly") {
  // Fixed charge: pay 1.5 to open capacity 2; profit 1.1/unit. Opening wins.
  MilpModel m;
  const int open = m.add_binary("open");
  const int flow = m.add_continuous("flow", 0.0, kInf);
  m.set_objective_coef(open, -1.5);
  m.set_objective_coef(flow, 1.1);
  m.add_constraint("gate", {{flow, 1.0}, {open, -2.0}}, Relation::LessEqual,
                   0.0);
  Solution s = solve_milp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(s.value(open) == doctest::Approx(1.0));
  CHECK(s.value(flow) == doctest::Approx(2.0));
}
