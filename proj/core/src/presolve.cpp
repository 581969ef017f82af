#include "presolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace p2psched::milp::detail {

namespace {

constexpr double kEps = 1e-9;
constexpr double kFixEps = 1e-11;

struct Row {
  double lo = -kInf, up = kInf;
  std::vector<std::pair<int, double>> terms;  // (col, coef), coef != 0
  bool alive = true;
};

struct Work {
  std::vector<double> lo, up, obj;
  std::vector<std::uint8_t> is_bin, col_alive;
  std::vector<Row> rows;
  std::vector<std::vector<int>> col_rows;  // may contain stale row ids
  Presolved out;
  double int_tol;
  double feas_tol;
  bool integer_aware = false;
  bool infeasible = false;

  int ncols() const { return static_cast<int>(lo.size()); }

  void fix_col(int j, double v) {
    if (!col_alive[j]) return;
    col_alive[j] = 0;
    out.fixed_obj += obj[j] * v;
    out.stack.push_back({PostsolveEntry::Kind::Fixed, j, v, 0.0, 1.0, {}});
    for (int ri : col_rows[j]) {
      Row& r = rows[ri];
      if (!r.alive) continue;
      auto it = std::find_if(r.terms.begin(), r.terms.end(),
                             [j](const auto& t) { return t.first == j; });
      if (it == r.terms.end()) continue;
      double a = it->second;
      r.terms.erase(it);
      if (std::isfinite(r.lo)) r.lo -= a * v;
      if (std::isfinite(r.up)) r.up -= a * v;
    }
  }

  // Tightens [lo_j, up_j]; returns true on change. Rounds binaries when
  // integer_aware. Flags infeasibility on crossed bounds.
  bool tighten_col(int j, double nlo, double nup) {
    bool changed = false;
    if (std::isfinite(nlo) && nlo > lo[j] + kEps) {
      lo[j] = nlo;
      changed = true;
    }
    if (std::isfinite(nup) && nup < up[j] - kEps) {
      up[j] = nup;
      changed = true;
    }
    if (changed && integer_aware && is_bin[j]) {
      // a bound past the binary's whole domain means no integral value exists;
      // rounding it back into [0,1] would silently relax the model
      if (lo[j] > 1.0 + int_tol || up[j] < -int_tol) {
        infeasible = true;
        return changed;
      }
      if (lo[j] > int_tol) lo[j] = 1.0;
      else if (lo[j] > 0.0) lo[j] = 0.0;
      if (up[j] < 1.0 - int_tol) up[j] = 0.0;
      else if (up[j] < 1.0) up[j] = 1.0;
    }
    if (lo[j] > up[j] + feas_tol) {
      infeasible = true;
      return changed;
    }
    if (changed && up[j] - lo[j] <= kFixEps) fix_col(j, 0.5 * (lo[j] + up[j]));
    return changed;
  }
};

struct Activity {
  double min_sum = 0.0, max_sum = 0.0;
  int min_inf = 0, max_inf = 0;  // infinite contribution counts

  double minact() const { return min_inf ? -kInf : min_sum; }
  double maxact() const { return max_inf ? kInf : max_sum; }
};

Activity row_activity(const Work& w, const Row& r) {
  Activity a;
  for (const auto& [j, c] : r.terms) {
    double at_lo = c * w.lo[j], at_up = c * w.up[j];
    double lo_c = c > 0 ? at_lo : at_up;  // min contribution
    double up_c = c > 0 ? at_up : at_lo;
    if (std::isfinite(lo_c)) a.min_sum += lo_c; else ++a.min_inf;
    if (std::isfinite(up_c)) a.max_sum += up_c; else ++a.max_inf;
  }
  return a;
}

// residual activity of the row with variable j removed
double residual_min(const Work& w, const Activity& a, int j, double c) {
  double contrib = c > 0 ? c * w.lo[j] : c * w.up[j];
  if (!std::isfinite(contrib)) return a.min_inf > 1 ? -kInf : a.min_sum;
  return a.min_inf ? -kInf : a.min_sum - contrib;
}
double residual_max(const Work& w, const Activity& a, int j, double c) {
  double contrib = c > 0 ? c * w.up[j] : c * w.lo[j];
  if (!std::isfinite(contrib)) return a.max_inf > 1 ? kInf : a.max_sum;
  return a.max_inf ? kInf : a.max_sum - contrib;
}

bool singleton_rows(Work& w) {
  bool changed = false;
  for (Row& r : w.rows) {
    if (!r.alive || w.infeasible) continue;
    if (r.terms.empty()) {
      if (r.lo > w.feas_tol || r.up < -w.feas_tol) w.infeasible = true;
      r.alive = false;
      continue;
    }
    if (r.terms.size() != 1) continue;
    auto [j, a] = r.terms.front();
    double nlo = a > 0 ? r.lo / a : r.up / a;
    double nup = a > 0 ? r.up / a : r.lo / a;
    r.alive = false;
    w.tighten_col(j, nlo, nup);
    changed = true;
  }
  return changed;
}

bool force_and_propagate(Work& w) {
  bool changed = false;
  for (Row& r : w.rows) {
    if (!r.alive || w.infeasible) continue;
    Activity a = row_activity(w, r);
    double minact = a.minact(), maxact = a.maxact();
    if (minact > r.up + w.feas_tol || maxact < r.lo - w.feas_tol) {
      w.infeasible = true;
      return changed;
    }
    if (minact >= r.lo - kEps && maxact <= r.up + kEps) {
      r.alive = false;  // redundant both ways
      changed = true;
      continue;
    }
    if (std::isfinite(r.up) && minact >= r.up - kEps) {
      // forcing: activity pinned at its minimum
      auto terms = r.terms;
      for (const auto& [j, c] : terms) w.fix_col(j, c > 0 ? w.lo[j] : w.up[j]);
      r.alive = false;
      changed = true;
      continue;
    }
    if (std::isfinite(r.lo) && maxact <= r.lo + kEps) {
      auto terms = r.terms;
      for (const auto& [j, c] : terms) w.fix_col(j, c > 0 ? w.up[j] : w.lo[j]);
      r.alive = false;
      changed = true;
      continue;
    }
    // bound propagation
    auto terms = r.terms;  // tighten_col may erase terms via fix_col
    for (const auto& [j, c] : terms) {
      if (!w.col_alive[j]) continue;
      double rmin = residual_min(w, a, j, c);
      double rmax = residual_max(w, a, j, c);
      double nlo = -kInf, nup = kInf;
      if (std::isfinite(r.up) && std::isfinite(rmin)) {
        double b = (r.up - rmin) / c;
        (c > 0 ? nup : nlo) = b;
      }
      if (std::isfinite(r.lo) && std::isfinite(rmax)) {
        double b = (r.lo - rmax) / c;
        (c > 0 ? nlo : nup) = b;
      }
      if (w.tighten_col(j, nlo, nup)) {
        changed = true;
        a = row_activity(w, r);  // bounds moved; refresh
      }
      if (w.infeasible) return changed;
    }
  }
  return changed;
}

bool dual_fix(Work& w) {
  bool changed = false;
  for (int j = 0; j < w.ncols() && !w.infeasible; ++j) {
    if (!w.col_alive[j]) continue;
    bool up_tightens = false, down_tightens = false, in_equality = false;
    bool has_row = false;
    for (int ri : w.col_rows[j]) {
      const Row& r = w.rows[ri];
      if (!r.alive) continue;
      auto it = std::find_if(r.terms.begin(), r.terms.end(),
                             [j](const auto& t) { return t.first == j; });
      if (it == r.terms.end()) continue;
      has_row = true;
      double c = it->second;
      bool two_sided = std::isfinite(r.lo) && std::isfinite(r.up);
      if (two_sided && r.up - r.lo <= kFixEps) in_equality = true;
      if ((c > 0 && std::isfinite(r.up)) || (c < 0 && std::isfinite(r.lo)))
        up_tightens = true;
      if ((c > 0 && std::isfinite(r.lo)) || (c < 0 && std::isfinite(r.up)))
        down_tightens = true;
    }
    if (in_equality) continue;
    if (w.obj[j] <= 0.0 && !down_tightens && std::isfinite(w.lo[j])) {
      w.fix_col(j, w.lo[j]);
      changed = true;
    } else if (w.obj[j] >= 0.0 && !up_tightens && std::isfinite(w.up[j])) {
      w.fix_col(j, w.up[j]);
      changed = true;
    } else if (!has_row && w.obj[j] == 0.0) {
      w.fix_col(j, std::isfinite(w.lo[j]) ? w.lo[j]
                : std::isfinite(w.up[j]) ? w.up[j]
                                         : 0.0);
      changed = true;
    }
    // remaining unfixable free-direction columns (e.g. obj > 0 with an
    // infinite upper bound and no tightening row) are left for the simplex,
    // which proves unboundedness only after establishing feasibility
  }
  return changed;
}

// Eliminates a continuous column that appears in exactly one (equality) row
// when the row implies bounds at least as tight as the column's own.
bool substitute_singletons(Work& w) {
  bool changed = false;
  for (int j = 0; j < w.ncols() && !w.infeasible; ++j) {
    if (!w.col_alive[j] || w.is_bin[j]) continue;
    int row_id = -1;
    double coef = 0.0;
    bool multi = false;
    for (int ri : w.col_rows[j]) {
      const Row& r = w.rows[ri];
      if (!r.alive) continue;
      auto it = std::find_if(r.terms.begin(), r.terms.end(),
                             [j](const auto& t) { return t.first == j; });
      if (it == r.terms.end()) continue;
      if (row_id >= 0) { multi = true; break; }
      row_id = ri;
      coef = it->second;
    }
    if (multi || row_id < 0) continue;
    Row& r = w.rows[row_id];
    if (!(std::isfinite(r.lo) && std::isfinite(r.up)) || r.up - r.lo > kFixEps)
      continue;  // only equality rows define the column exactly
    double rhs = 0.5 * (r.lo + r.up);

    // implied range of x_j = (rhs - others) / coef
    Activity a = row_activity(w, r);
    double others_min = residual_min(w, a, j, coef);
    double others_max = residual_max(w, a, j, coef);
    double imp1 = (rhs - others_min) / coef;
    double imp2 = (rhs - others_max) / coef;
    double imp_lo = std::min(imp1, imp2), imp_up = std::max(imp1, imp2);
    if (imp_lo < w.lo[j] - kEps || imp_up > w.up[j] + kEps) continue;

    PostsolveEntry e;
    e.kind = PostsolveEntry::Kind::Substituted;
    e.var = j;
    e.rhs = rhs;
    e.coef = coef;
    for (const auto& [i, c] : r.terms)
      if (i != j) e.terms.emplace_back(i, c);
    w.out.stack.push_back(std::move(e));

    // fold obj[j] * (rhs - others)/coef into the objective
    w.out.fixed_obj += w.obj[j] * rhs / coef;
    for (const auto& [i, c] : r.terms)
      if (i != j) w.obj[i] -= w.obj[j] * c / coef;
    r.alive = false;
    w.col_alive[j] = 0;
    changed = true;
  }
  return changed;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

Presolved presolve(const MilpModel& model, const SolveOptions& options,
                   bool integer_aware) {
  Work w;
  int n = model.num_variables();
  w.lo.resize(n);
  w.up.resize(n);
  w.obj.resize(n);
  w.is_bin.resize(n);
  w.col_alive.assign(n, 1);
  w.int_tol = options.int_tol;
  w.feas_tol = options.feas_tol;
  w.integer_aware = integer_aware;
  w.out.orig_n = n;
  w.out.fixed_obj = model.objective_offset();
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.variable(j);
    w.lo[j] = v.lower;
    w.up[j] = v.upper;
    w.obj[j] = model.objective_coef(j);
    w.is_bin[j] = v.kind == VarKind::Binary;
  }
  w.rows.reserve(model.num_constraints());
  w.col_rows.resize(n);
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& c = model.constraint(i);
    Row r;
    switch (c.relation) {
      case Relation::LessEqual: r.up = c.rhs; break;
      case Relation::GreaterEqual: r.lo = c.rhs; break;
      case Relation::Equal: r.lo = r.up = c.rhs; break;
    }
    // merge duplicate variables, drop numerically zero coefficients
    std::map<int, double> merged;
    for (const Term& t : c.terms) merged[t.var] += t.coef;
    for (const auto& [j, coef] : merged)
      if (std::fabs(coef) > 1e-12) r.terms.emplace_back(j, coef);
    int ri = static_cast<int>(w.rows.size());
    for (const auto& [j, coef] : r.terms) w.col_rows[j].push_back(ri);
    w.rows.push_back(std::move(r));
  }

  // initial crossed-bound / fixed-column sweep
  for (int j = 0; j < n && !w.infeasible; ++j) {
    if (w.lo[j] > w.up[j] + options.feas_tol) w.infeasible = true;
    else if (w.up[j] - w.lo[j] <= kFixEps) w.fix_col(j, 0.5 * (w.lo[j] + w.up[j]));
  }

  for (int round = 0; round < 24 && !w.infeasible; ++round) {
    bool changed = false;
    changed |= singleton_rows(w);
    if (w.infeasible) break;
    changed |= force_and_propagate(w);
    if (w.infeasible) break;
    changed |= dual_fix(w);
    if (w.infeasible) break;
    changed |= substitute_singletons(w);
    if (!changed) break;
  }

  if (w.infeasible) {
    w.out.status = SolveStatus::Infeasible;
    return std::move(w.out);
  }

  // connected components over the surviving structure
  DisjointSet ds(n);
  for (const Row& r : w.rows) {
    if (!r.alive || r.terms.empty()) continue;
    int first = r.terms.front().first;
    for (const auto& [j, c] : r.terms) ds.unite(first, j);
  }
  std::map<int, std::vector<int>> groups;  // root -> cols (ascending)
  for (int j = 0; j < n; ++j)
    if (w.col_alive[j]) groups[ds.find(j)].push_back(j);

  std::vector<std::vector<int>> ordered;
  ordered.reserve(groups.size());
  for (auto& [root, cols] : groups) ordered.push_back(std::move(cols));
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::vector<int> local_of(n, -1);
  for (const auto& cols : ordered) {
    Component comp;
    comp.orig_cols = cols;
    CompLp& lp = comp.lp;
    lp.n = static_cast<int>(cols.size());
    lp.obj.resize(lp.n);
    lp.lo.resize(lp.n);
    lp.up.resize(lp.n);
    lp.is_binary.resize(lp.n);
    for (int l = 0; l < lp.n; ++l) {
      int j = cols[l];
      local_of[j] = l;
      lp.obj[l] = w.obj[j];
      lp.lo[l] = w.lo[j];
      lp.up[l] = w.up[j];
      lp.is_binary[l] = w.is_bin[j];
    }
    // rows of this component, original order
    std::vector<std::vector<std::pair<int, double>>> cols_entries(lp.n);
    for (std::size_t ri = 0; ri < w.rows.size(); ++ri) {
      const Row& r = w.rows[ri];
      if (!r.alive || r.terms.empty()) continue;
      // all of a row's columns share one component; test the first
      if (local_of[r.terms.front().first] < 0) continue;
      int row_local = static_cast<int>(lp.row_lo.size());
      lp.row_lo.push_back(r.lo);
      lp.row_up.push_back(r.up);
      for (const auto& [j, c] : r.terms)
        cols_entries[local_of[j]].emplace_back(row_local, c);
    }
    lp.col_ptr.assign(lp.n + 1, 0);
    for (int l = 0; l < lp.n; ++l)
      lp.col_ptr[l + 1] = lp.col_ptr[l] + static_cast<int>(cols_entries[l].size());
    lp.row_idx.resize(lp.col_ptr[lp.n]);
    lp.vals.resize(lp.col_ptr[lp.n]);
    int k = 0;
    for (int l = 0; l < lp.n; ++l)
      for (const auto& [row, c] : cols_entries[l]) {
        lp.row_idx[k] = row;
        lp.vals[k] = c;
        ++k;
      }
    w.out.components.push_back(std::move(comp));
    for (int j : cols) local_of[j] = -1;  // reset for the membership test above
  }
  return std::move(w.out);
}

std::vector<double> postsolve(const Presolved& pre,
                              const std::vector<std::vector<double>>& comp_values) {
  std::vector<double> x(pre.orig_n, 0.0);
  for (std::size_t c = 0; c < pre.components.size(); ++c) {
    const Component& comp = pre.components[c];
    for (int l = 0; l < comp.lp.n; ++l) x[comp.orig_cols[l]] = comp_values[c][l];
  }
  for (auto it = pre.stack.rbegin(); it != pre.stack.rend(); ++it) {
    if (it->kind == PostsolveEntry::Kind::Fixed) {
      x[it->var] = it->value;
    } else {
      double acc = it->rhs;
      for (const auto& [j, coef] : it->terms) acc -= coef * x[j];
      x[it->var] = acc / it->coef;
    }
  }
  return x;
}

}  // namespace p2psched::milp::detail
