#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "p2psched/milp.hpp"
#include "presolve.hpp"
#include "simplex.hpp"

namespace p2psched::milp {

namespace detail {
namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point deadline_from(const SolveOptions& options) {
  return Clock::now() +
         std::chrono::duration_cast<Clock::duration>(
             std::chrono::duration<double>(options.time_budget_s));
}

struct ComponentOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = -kInf;
  std::vector<double> values;  // component-local; empty if no incumbent
  std::int64_t lp_solves = 0;
  double gap = 0.0;
  std::vector<double> history;
};

ComponentOutcome solve_component_lp(const CompLp& lp, const SolveOptions& options,
                                    Clock::time_point deadline) {
  ComponentOutcome out;
  SimplexEngine engine(lp, options.feas_tol, deadline);
  try {
    LpRun run = engine.primal_solve();
    out.lp_solves = 1;
    out.status = run.status;
    if (run.status == SolveStatus::Optimal) {
      out.objective = run.objective;
      out.values = engine.structural_values();
      out.history.push_back(run.objective);
    }
  } catch (const DeadlineExceeded&) {
    out.status = SolveStatus::TimeLimit;
    out.gap = kInf;
  }
  return out;
}

// ---- branch and bound over the binary columns of one component ----

struct BoundChange {
  int col;
  double lo, up;
  std::shared_ptr<const BoundChange> parent;
};

struct Node {
  double bound = kInf;  // parent LP objective
  int depth = 0;
  std::vector<std::uint8_t> path;  // 0 = down branch, 1 = up branch
  // Exploration key: 0 = branch nearer the parent's fractional LP value,
  // 1 = the other branch. Mode flags usually sit near 1 when active, so the
  // near branch is typically free and dives straight to an incumbent.
  std::vector<std::uint8_t> order;
  std::shared_ptr<const std::vector<VStat>> parent_state;
  std::shared_ptr<const BoundChange> chain;
};

// priority_queue comparator: returns true when a should pop AFTER b.
// Order: higher bound, then deeper, then preferred-direction-first.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.order > b.order;
  }
};

// Rounding repair: gate-style binaries (zero objective coefficient) often
// sit fractional at an optimal vertex while the flows they gate already
// admit an integral setting. Rounds every non-integral binary toward its
// objective-preferred side (then, failing that, to the nearest integer),
// re-checks all rows and bounds exactly, and reports the repaired point.
// A success with unchanged objective closes the node at its own bound.
bool try_rounding(const CompLp& lp, const SimplexEngine& engine, double int_tol,
                  double feas_tol, std::vector<double>& values, double& obj) {
  std::vector<double> x = engine.structural_values();
  bool any_fractional = false;
  for (int j = 0; j < lp.n; ++j) {
    if (!lp.is_binary[j]) continue;
    double frac = x[j] - std::floor(x[j]);
    if (std::min(frac, 1.0 - frac) > int_tol) any_fractional = true;
  }
  if (!any_fractional) return false;

  for (int greedy = 1; greedy >= 0; --greedy) {
    std::vector<double> cand = x;
    for (int j = 0; j < lp.n; ++j) {
      if (!lp.is_binary[j]) continue;
      double target;
      if (greedy)
        target = lp.obj[j] >= 0.0 ? 1.0 : 0.0;
      else
        target = cand[j] >= 0.5 ? 1.0 : 0.0;
      // keep exact node bounds: a fixed binary stays at its bound
      target = std::min(std::max(target, engine.lower(j)), engine.upper(j));
      cand[j] = target;
    }
    bool ok = true;
    std::vector<double> act(lp.m(), 0.0);
    for (int j = 0; j < lp.n && ok; ++j) {
      if (cand[j] < engine.lower(j) - feas_tol ||
          cand[j] > engine.upper(j) + feas_tol)
        ok = false;
      for (int p = lp.col_ptr[j]; p < lp.col_ptr[j + 1]; ++p)
        act[lp.row_idx[p]] += lp.vals[p] * cand[j];
    }
    for (int i = 0; i < lp.m() && ok; ++i)
      if (act[i] < lp.row_lo[i] - feas_tol || act[i] > lp.row_up[i] + feas_tol)
        ok = false;
    if (!ok) continue;
    double o = 0.0;
    for (int j = 0; j < lp.n; ++j) o += lp.obj[j] * cand[j];
    values = std::move(cand);
    obj = o;
    return true;
  }
  return false;
}

// most-fractional binary, ties by lowest column index; -1 when integral
int pick_branch_column(const CompLp& lp, const SimplexEngine& engine,
                       double int_tol) {
  int best = -1;
  double best_score = int_tol;
  for (int j = 0; j < lp.n; ++j) {
    if (!lp.is_binary[j]) continue;
    double x = engine.value(j);
    double score = std::min(x - std::floor(x), std::ceil(x) - x);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

ComponentOutcome branch_and_bound(const CompLp& lp, const SolveOptions& options,
                                  Clock::time_point deadline) {
  ComponentOutcome out;
  SimplexEngine engine(lp, options.feas_tol, deadline);

  LpRun root;
  try {
    root = engine.primal_solve();
    out.lp_solves = 1;
  } catch (const DeadlineExceeded&) {
    out.status = SolveStatus::TimeLimit;
    out.gap = kInf;
    return out;
  }
  if (root.status != SolveStatus::Optimal) {
    out.status = root.status;
    return out;
  }
  if (root.objective <= options.cutoff + options.abs_gap) {
    out.status = SolveStatus::Infeasible;  // nothing better than the cutoff
    return out;
  }

  bool have_incumbent = false;
  double inc_obj = -kInf;
  std::vector<double> inc_values;
  std::vector<std::uint8_t> inc_path;

  // nodes bounded at or below this are not worth exploring
  auto prune_at = [&] { return std::max(inc_obj, options.cutoff) + options.abs_gap; };

  auto offer_incumbent = [&](double obj, const std::vector<std::uint8_t>& path,
                             std::vector<double> values) {
    if (obj <= options.cutoff + 1e-9) return;  // not better than the cutoff
    bool take = false;
    if (!have_incumbent || obj > inc_obj + 1e-9) {
      take = true;
    } else if (obj >= inc_obj - 1e-9 && path < inc_path) {
      take = true;  // tie within 1e-9: prefer the lex-smaller branching path
    }
    if (!take) return;
    have_incumbent = true;
    inc_obj = std::max(inc_obj, obj);
    inc_values = std::move(values);
    inc_path = path;
    out.history.push_back(inc_obj);
  };

  auto offer_rounded = [&](const std::vector<std::uint8_t>& path) {
    std::vector<double> values;
    double obj;
    if (try_rounding(lp, engine, options.int_tol, options.feas_tol, values, obj))
      offer_incumbent(obj, path, std::move(values));
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;

  bool timed_out = false;
  double open_bound_at_stop = -kInf;
  std::int64_t processed = 1;

  auto stop_now = [&](double current_bound) {
    timed_out = true;
    open_bound_at_stop = std::max(
        current_bound, open.empty() ? -kInf : open.top().bound);
  };

  // Depth-first plunge from the node the engine currently holds: repeatedly
  // tighten toward the branch nearer the fractional LP value and dual-resolve
  // in place (no basis reload), queueing only the far sibling. This keeps the
  // warm basis hot along the dive; full state reloads happen only when the
  // best-first loop jumps to a queued sibling.
  auto plunge = [&](double obj, int depth, std::vector<std::uint8_t> path,
                    std::vector<std::uint8_t> order,
                    std::shared_ptr<const BoundChange> chain) {
    for (;;) {
      offer_rounded(path);
      if (obj <= prune_at()) return;
      int col = pick_branch_column(lp, engine, options.int_tol);
      if (col < 0) {
        offer_incumbent(obj, path, engine.structural_values());
        return;
      }
      // Plunge direction: prefer a "free" fix — one that keeps every row of
      // this column feasible with all other values unchanged (row activities
      // are the engine's logical values), trying the objective-improving
      // side first. Gate-style binaries almost always have a free side, and
      // a free fix keeps the child bound equal to the parent's, so the dive
      // reaches an incumbent at the node's own bound. When neither fix is
      // flow-free, dive objective-greedy: raising a non-negative-cost binary
      // only tightens the rows it gates, which the re-solve usually absorbs
      // by re-routing flows at no objective loss.
      bool near_up = lp.obj[col] >= 0.0;
      bool found_free = false;
      const double first = lp.obj[col] >= 0.0 ? 1.0 : 0.0;
      for (double target : {first, 1.0 - first}) {
        if (target < engine.lower(col) - 1e-12 ||
            target > engine.upper(col) + 1e-12)
          continue;
        double delta = target - engine.value(col);
        bool ok = true;
        for (int p = lp.col_ptr[col]; p < lp.col_ptr[col + 1] && ok; ++p) {
          int i = lp.row_idx[p];
          double act = engine.value(lp.n + i) + lp.vals[p] * delta;
          if (act < lp.row_lo[i] - options.feas_tol ||
              act > lp.row_up[i] + options.feas_tol)
            ok = false;
        }
        if (ok) {
          near_up = target == 1.0;
          found_free = true;
          break;
        }
      }
      (void)found_free;
      double near_bit = near_up ? 1.0 : 0.0;
      double far_bit = 1.0 - near_bit;
      auto state = std::make_shared<const std::vector<VStat>>(engine.state());

      Node far;
      far.bound = obj;
      far.depth = depth + 1;
      far.path = path;
      far.path.push_back(static_cast<std::uint8_t>(far_bit));
      far.order = order;
      far.order.push_back(1);
      far.parent_state = std::move(state);
      far.chain = std::make_shared<const BoundChange>(
          BoundChange{col, far_bit, far_bit, chain});
      open.push(std::move(far));

      chain = std::make_shared<const BoundChange>(
          BoundChange{col, near_bit, near_bit, chain});
      path.push_back(static_cast<std::uint8_t>(near_bit));
      order.push_back(0);
      ++depth;
      engine.tighten(col, near_bit, near_bit);

      if (Clock::now() > deadline || processed >= options.max_nodes) {
        stop_now(obj);
        return;
      }
      LpRun run;
      try {
        run = engine.dual_resolve();
        ++out.lp_solves;
        ++processed;
      } catch (const DeadlineExceeded&) {
        stop_now(obj);
        return;
      }
      if (run.status == SolveStatus::Infeasible) return;
      if (run.status != SolveStatus::Optimal)
        throw NumericError("child relaxation neither optimal nor infeasible");
      obj = run.objective;
    }
  };

  plunge(root.objective, 0, {}, {}, nullptr);

  while (!timed_out && !open.empty()) {
    if (Clock::now() > deadline || processed >= options.max_nodes) {
      timed_out = true;
      open_bound_at_stop = open.top().bound;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound <= prune_at()) continue;

    engine.reset_bounds_to_root();
    for (const BoundChange* c = node.chain.get(); c; c = c->parent.get())
      engine.tighten(c->col, c->lo, c->up);
    engine.load_state(*node.parent_state);

    LpRun run;
    try {
      run = engine.dual_resolve();
      ++out.lp_solves;
      ++processed;
    } catch (const DeadlineExceeded&) {
      stop_now(node.bound);
      break;
    }
    if (run.status == SolveStatus::Infeasible) continue;
    if (run.status != SolveStatus::Optimal)
      throw NumericError("child relaxation neither optimal nor infeasible");
    plunge(run.objective, node.depth, std::move(node.path),
           std::move(node.order), std::move(node.chain));
  }

  if (timed_out) {
    out.status = SolveStatus::TimeLimit;
    out.objective = inc_obj;
    out.values = inc_values;
    out.gap = have_incumbent
                  ? std::max(0.0, open_bound_at_stop - inc_obj)
                  : kInf;
    return out;
  }
  if (!have_incumbent) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.objective = inc_obj;
  out.values = inc_values;
  out.gap = 0.0;
  return out;
}

bool has_free_binary(const CompLp& lp) {
  for (int j = 0; j < lp.n; ++j)
    if (lp.is_binary[j] && lp.up[j] - lp.lo[j] > 1e-11) return true;
  return false;
}

Solution assemble(const Presolved& pre,
                  std::vector<ComponentOutcome>&& outcomes) {
  Solution sol;
  sol.node_count = 0;
  for (const ComponentOutcome& c : outcomes) sol.node_count += c.lp_solves;

  bool any_time_limit = false;
  for (const ComponentOutcome& c : outcomes) {
    if (c.status == SolveStatus::Infeasible) {
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    if (c.status == SolveStatus::Unbounded) {
      sol.status = SolveStatus::Unbounded;
      return sol;
    }
    if (c.status == SolveStatus::TimeLimit) any_time_limit = true;
  }

  bool all_have_values = true;
  double total = pre.fixed_obj;
  double gap = 0.0;
  for (const ComponentOutcome& c : outcomes) {
    if (c.values.empty() && !pre.components.empty()) all_have_values = false;
    total += c.objective;
    gap += c.gap;
  }

  sol.status = any_time_limit ? SolveStatus::TimeLimit : SolveStatus::Optimal;
  sol.gap = any_time_limit ? gap : 0.0;
  if (!all_have_values) {
    sol.objective = -kInf;
    sol.gap = kInf;
    return sol;
  }
  sol.objective = total;
  std::vector<std::vector<double>> comp_values;
  comp_values.reserve(outcomes.size());
  for (ComponentOutcome& c : outcomes) comp_values.push_back(std::move(c.values));
  sol.values = postsolve(pre, comp_values);
  if (outcomes.size() == 1) {
    for (double h : outcomes[0].history)
      sol.incumbent_history.push_back(h + pre.fixed_obj);
  } else {
    sol.incumbent_history.push_back(total);
  }
  return sol;
}

Solution presolved_only_solution(const Presolved& pre) {
  // every variable was eliminated in presolve
  Solution sol;
  sol.status = SolveStatus::Optimal;
  sol.objective = pre.fixed_obj;
  sol.values = postsolve(pre, {});
  sol.incumbent_history.push_back(pre.fixed_obj);
  return sol;
}

}  // namespace
}  // namespace detail

Solution solve_lp(const MilpModel& model, const SolveOptions& options) {
  model.ensure_valid();
  options.ensure_valid();
  auto deadline = detail::deadline_from(options);
  detail::Presolved pre = detail::presolve(model, options, false);
  if (pre.status != SolveStatus::Optimal) {
    Solution sol;
    sol.status = pre.status;
    return sol;
  }
  if (pre.components.empty()) return detail::presolved_only_solution(pre);

  std::vector<detail::ComponentOutcome> outcomes;
  outcomes.reserve(pre.components.size());
  for (const detail::Component& comp : pre.components)
    outcomes.push_back(detail::solve_component_lp(comp.lp, options, deadline));
  return detail::assemble(pre, std::move(outcomes));
}

Solution solve_milp(const MilpModel& model, const SolveOptions& options) {
  model.ensure_valid();
  options.ensure_valid();
  auto deadline = detail::deadline_from(options);
  detail::Presolved pre = detail::presolve(model, options, true);
  if (pre.status != SolveStatus::Optimal) {
    Solution sol;
    sol.status = pre.status;
    return sol;
  }
  if (pre.components.empty()) return detail::presolved_only_solution(pre);

  // With a finite cutoff, each component can prune against the cutoff minus
  // what the other components can contribute at best (their LP root bounds).
  std::vector<double> root_bound(pre.components.size(), 0.0);
  double root_total = pre.fixed_obj;
  bool use_cutoff = options.cutoff != -kInf;
  if (use_cutoff) {
    for (std::size_t i = 0; i < pre.components.size(); ++i) {
      detail::ComponentOutcome lp0 =
          detail::solve_component_lp(pre.components[i].lp, options, deadline);
      if (lp0.status == SolveStatus::Infeasible ||
          lp0.status == SolveStatus::Unbounded) {
        Solution sol;
        sol.status = lp0.status;
        return sol;
      }
      if (lp0.status != SolveStatus::Optimal) {  // deadline during bounding
        use_cutoff = false;
        break;
      }
      root_bound[i] = lp0.objective;
      root_total += lp0.objective;
    }
    if (use_cutoff && root_total <= options.cutoff + options.abs_gap) {
      Solution sol;
      sol.status = SolveStatus::Infeasible;  // nothing better than the cutoff
      return sol;
    }
  }

  std::vector<detail::ComponentOutcome> outcomes;
  outcomes.reserve(pre.components.size());
  for (std::size_t i = 0; i < pre.components.size(); ++i) {
    const detail::Component& comp = pre.components[i];
    SolveOptions comp_options = options;
    comp_options.cutoff =
        use_cutoff ? options.cutoff - (root_total - root_bound[i]) : -kInf;
    outcomes.push_back(
        detail::has_free_binary(comp.lp)
            ? detail::branch_and_bound(comp.lp, comp_options, deadline)
            : detail::solve_component_lp(comp.lp, comp_options, deadline));
  }
  return detail::assemble(pre, std::move(outcomes));
}

}  // namespace p2psched::milp
