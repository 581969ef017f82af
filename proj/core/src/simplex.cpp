#include "simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>

namespace p2psched::milp::detail {

struct SimplexEngine::LuState {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

SimplexEngine::SimplexEngine(const CompLp& lp, double feas_tol,
                             Clock::time_point deadline)
    : n_(lp.n),
      m_(lp.m()),
      total_(lp.n + lp.m()),
      lp_(lp),
      feas_tol_(feas_tol),
      deadline_(deadline),
      lu_(std::make_unique<LuState>()) {
  root_lo_.reserve(total_);
  root_up_.reserve(total_);
  root_lo_.assign(lp.lo.begin(), lp.lo.end());
  root_up_.assign(lp.up.begin(), lp.up.end());
  root_lo_.insert(root_lo_.end(), lp.row_lo.begin(), lp.row_lo.end());
  root_up_.insert(root_up_.end(), lp.row_up.begin(), lp.row_up.end());
  lo_ = root_lo_;
  up_ = root_up_;
  cost_.assign(total_, 0.0);
  std::copy(lp.obj.begin(), lp.obj.end(), cost_.begin());
  vstat_.assign(total_, VStat::AtLower);
  basis_.assign(m_, -1);
  basis_pos_.assign(total_, -1);
  xval_.assign(total_, 0.0);
}

SimplexEngine::~SimplexEngine() = default;

void SimplexEngine::check_deadline() const {
  if (Clock::now() > deadline_) throw DeadlineExceeded{};
}

void SimplexEngine::reset_bounds_to_root() {
  lo_ = root_lo_;
  up_ = root_up_;
}

void SimplexEngine::tighten(int col, double lo, double up) {
  lo_[col] = std::max(lo_[col], lo);
  up_[col] = std::min(up_[col], up);
}

void SimplexEngine::scatter_column(int j, std::vector<double>& dense,
                                   double scale) const {
  if (j < n_) {
    for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
      dense[lp_.row_idx[k]] += scale * lp_.vals[k];
  } else {
    dense[j - n_] -= scale;  // logical column is -e_row
  }
}

void SimplexEngine::refactorize() {
  if (m_ > 0) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      int j = basis_[i];
      if (j < n_) {
        for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
          B(lp_.row_idx[k], i) += lp_.vals[k];
      } else {
        B(j - n_, i) = -1.0;
      }
    }
    lu_->lu.compute(B);
  }
  etas_.clear();
  factorized_ = true;
}

void SimplexEngine::ftran(std::vector<double>& v) const {
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> mv(v.data(), m_);
  mv = lu_->lu.solve(mv).eval();
  for (const Eta& e : etas_) {
    double t = v[e.pos] / e.w[e.pos];
    for (int i = 0; i < m_; ++i) v[i] -= e.w[i] * t;
    v[e.pos] = t;
  }
}

void SimplexEngine::btran(std::vector<double>& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double dot = 0.0;
    for (int i = 0; i < m_; ++i) dot += it->w[i] * v[i];
    // z_r <- (z_r - sum_{i != r} w_i z_i) / w_r
    v[it->pos] = (v[it->pos] - (dot - it->w[it->pos] * v[it->pos])) / it->w[it->pos];
  }
  Eigen::Map<Eigen::VectorXd> mv(v.data(), m_);
  const auto& LU = lu_->lu.matrixLU();
  Eigen::VectorXd t1 = LU.triangularView<Eigen::Upper>().transpose().solve(mv);
  Eigen::VectorXd t2 =
      LU.triangularView<Eigen::UnitLower>().transpose().solve(t1);
  mv = lu_->lu.permutationP().transpose() * t2;
}

std::vector<double> SimplexEngine::ftran_column(int j) const {
  std::vector<double> v(m_, 0.0);
  scatter_column(j, v, 1.0);
  ftran(v);
  return v;
}

void SimplexEngine::snap_nonbasics() {
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == VStat::Basic) continue;
    // sanitize statuses that point at an infinite bound
    if (vstat_[j] == VStat::AtLower && !std::isfinite(lo_[j]))
      vstat_[j] = std::isfinite(up_[j]) ? VStat::AtUpper : VStat::FreeZero;
    else if (vstat_[j] == VStat::AtUpper && !std::isfinite(up_[j]))
      vstat_[j] = std::isfinite(lo_[j]) ? VStat::AtLower : VStat::FreeZero;
    xval_[j] = bound_of(j, vstat_[j]);
  }
}

void SimplexEngine::recompute_basics() {
  if (m_ == 0) return;
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == VStat::Basic || xval_[j] == 0.0) continue;
    scatter_column(j, rhs, -xval_[j]);
  }
  ftran(rhs);
  for (int i = 0; i < m_; ++i) xval_[basis_[i]] = rhs[i];
}

double SimplexEngine::infeasibility() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    int j = basis_[i];
    worst = std::max(worst, lo_[j] - xval_[j]);
    worst = std::max(worst, xval_[j] - up_[j]);
  }
  return std::max(worst, 0.0);
}

void SimplexEngine::phase_costs(std::vector<double>& cb, bool phase1) const {
  cb.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    int j = basis_[i];
    if (phase1) {
      if (xval_[j] < lo_[j] - feas_tol_)
        cb[i] = 1.0;  // raising an under-lower basic reduces infeasibility
      else if (xval_[j] > up_[j] + feas_tol_)
        cb[i] = -1.0;
    } else {
      cb[i] = cost_[j];
    }
  }
}

std::vector<double> SimplexEngine::reduced_costs(
    const std::vector<double>& cost_basic) const {
  std::vector<double> y = cost_basic;
  btran(y);
  return y;  // caller prices columns against y
}

void SimplexEngine::pivot(int entering, int leave_pos, VStat leaving_stat,
                          double step, int direction,
                          const std::vector<double>& w) {
  double enter_from = vstat_[entering] == VStat::FreeZero
                          ? 0.0
                          : bound_of(entering, vstat_[entering]);
  for (int i = 0; i < m_; ++i) xval_[basis_[i]] -= direction * step * w[i];
  int leaving = basis_[leave_pos];
  xval_[leaving] = bound_of(leaving, leaving_stat);  // land exactly on bound
  vstat_[leaving] = leaving_stat;
  basis_pos_[leaving] = -1;
  xval_[entering] = enter_from + direction * step;
  vstat_[entering] = VStat::Basic;
  basis_pos_[entering] = leave_pos;
  basis_[leave_pos] = entering;
  etas_.push_back(Eta{leave_pos, w});
  ++iterations_;
  if (static_cast<int>(etas_.size()) >= kRefactorInterval) {
    refactorize();
    recompute_basics();
  }
}

namespace {
struct RatioResult {
  double t = kInf;
  int leave_pos = -1;
  VStat leave_stat = VStat::AtLower;
  bool flip = false;
  bool unbounded = false;
  bool saw_tiny_pivot = false;
};
}  // namespace

// First-breakpoint bounded ratio test. In phase 1 an infeasible basic
// moving toward its violated bound limits the step at that bound; basics
// moving deeper into infeasibility impose no limit (the composite costs
// account for them).
static RatioResult ratio_test(const std::vector<int>& basis,
                              const std::vector<double>& xval,
                              const std::vector<double>& lo,
                              const std::vector<double>& up,
                              const std::vector<double>& w, int entering,
                              int direction, bool phase1, double feas_tol,
                              double pivot_tol, double tie_tol) {
  RatioResult out;
  int m = static_cast<int>(basis.size());
  for (int i = 0; i < m; ++i) {
    if (w[i] == 0.0) continue;
    if (std::fabs(w[i]) <= pivot_tol) {
      out.saw_tiny_pivot = true;
      continue;
    }
    int q = basis[i];
    double rate = -direction * w[i];  // d x_q / d t
    double lim;
    VStat stat;
    if (phase1 && xval[q] < lo[q] - feas_tol) {
      if (rate <= 0.0) continue;  // moving further below: no breakpoint here
      lim = (lo[q] - xval[q]) / rate;
      stat = VStat::AtLower;
    } else if (phase1 && xval[q] > up[q] + feas_tol) {
      if (rate >= 0.0) continue;
      lim = (xval[q] - up[q]) / (-rate);
      stat = VStat::AtUpper;
    } else if (rate > 0.0) {
      if (!std::isfinite(up[q])) continue;
      lim = std::max((up[q] - xval[q]) / rate, 0.0);
      stat = VStat::AtUpper;
    } else {
      if (!std::isfinite(lo[q])) continue;
      lim = std::max((xval[q] - lo[q]) / (-rate), 0.0);
      stat = VStat::AtLower;
    }
    bool better = lim < out.t - tie_tol;
    bool tie = !better && lim <= out.t + tie_tol && out.leave_pos >= 0;
    if (better || (tie && q < basis[out.leave_pos])) {
      out.t = lim;
      out.leave_pos = i;
      out.leave_stat = stat;
    }
  }
  double range = up[entering] - lo[entering];
  if (std::isfinite(range) && range <= out.t + tie_tol) {
    out.t = range;
    out.flip = true;
    out.leave_pos = -1;
  }
  if (!std::isfinite(out.t)) out.unbounded = true;
  return out;
}

bool SimplexEngine::primal_iterate(bool phase1, bool bland, bool& degenerate) {
  std::vector<double> cb;
  phase_costs(cb, phase1);
  std::vector<double> y = reduced_costs(cb);

  int entering = -1;
  int direction = 0;
  double best_score = kDualTol;
  for (int j = 0; j < total_; ++j) {
    VStat s = vstat_[j];
    if (s == VStat::Basic || is_fixed(j)) continue;
    double d;
    if (j < n_) {
      d = phase1 ? 0.0 : cost_[j];
      for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
        d -= y[lp_.row_idx[k]] * lp_.vals[k];
    } else {
      d = y[j - n_];  // logical column -e_row, zero cost
    }
    double score;
    int dir;
    if (s == VStat::AtLower) {
      score = d;
      dir = 1;
    } else if (s == VStat::AtUpper) {
      score = -d;
      dir = -1;
    } else {  // FreeZero
      score = std::fabs(d);
      dir = d > 0 ? 1 : -1;
    }
    if (score > best_score) {
      entering = j;
      direction = dir;
      best_score = score;
      if (bland) break;  // lowest eligible index
    }
  }
  if (entering < 0) return false;

  int refactor_tries = 0;
  for (;;) {
    std::vector<double> w = ftran_column(entering);
    RatioResult r =
        ratio_test(basis_, xval_, lo_, up_, w, entering, direction, phase1,
                   feas_tol_, kPivotTol, kRatioTieTol);
    if (r.unbounded) {
      if (r.saw_tiny_pivot && refactor_tries == 0 && !etas_.empty()) {
        // the only limiting pivots were microscopic; rule out eta roundoff
        ++refactor_tries;
        refactorize();
        recompute_basics();
        continue;
      }
      if (r.saw_tiny_pivot)
        throw NumericError(
            "simplex pivot magnitude fell below the 1e-9 stability floor");
      if (phase1)
        throw NumericError("phase-1 step unbounded (inconsistent basis)");
      throw Unboundedness{};
    }
    degenerate = r.t <= kRatioTieTol;
    if (r.flip) {
      for (int i = 0; i < m_; ++i) xval_[basis_[i]] -= direction * r.t * w[i];
      xval_[entering] =
          vstat_[entering] == VStat::AtLower ? up_[entering] : lo_[entering];
      vstat_[entering] = vstat_[entering] == VStat::AtLower ? VStat::AtUpper
                                                            : VStat::AtLower;
      ++iterations_;
    } else {
      pivot(entering, r.leave_pos, r.leave_stat, r.t, direction, w);
    }
    return true;
  }
}

LpRun SimplexEngine::primal_loop(bool phase1) {
  std::int64_t degen_streak = 0;
  bool bland = false;
  for (;;) {
    if ((iterations_ & 63) == 0) check_deadline();
    if (iterations_ > kIterationLimit)
      throw NumericError("simplex iteration limit exceeded");
    if (phase1 && infeasibility() <= feas_tol_)
      return LpRun{SolveStatus::Optimal, structural_objective()};
    bool degenerate = false;
    bool moved;
    try {
      moved = primal_iterate(phase1, bland, degenerate);
    } catch (const Unboundedness&) {
      return LpRun{SolveStatus::Unbounded, kInf};
    }
    if (!moved) {
      if (phase1 && infeasibility() > feas_tol_)
        return LpRun{SolveStatus::Infeasible, -kInf};
      return LpRun{SolveStatus::Optimal, structural_objective()};
    }
    if (degenerate) {
      if (++degen_streak > kDegenerateLimit) bland = true;
    } else {
      degen_streak = 0;
      bland = false;
    }
  }
}

LpRun SimplexEngine::primal_solve() {
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j]))
      vstat_[j] = VStat::AtLower;
    else if (std::isfinite(up_[j]))
      vstat_[j] = VStat::AtUpper;
    else
      vstat_[j] = VStat::FreeZero;
    basis_pos_[j] = -1;
  }
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    vstat_[n_ + i] = VStat::Basic;
    basis_pos_[n_ + i] = i;
  }
  snap_nonbasics();
  refactorize();
  recompute_basics();
  if (infeasibility() > feas_tol_) {
    LpRun phase1 = primal_loop(true);
    if (phase1.status != SolveStatus::Optimal)
      return LpRun{SolveStatus::Infeasible, -kInf};
  }
  return primal_loop(false);
}

void SimplexEngine::load_state(const std::vector<VStat>& snapshot) {
  if (factorized_ && snapshot == vstat_) return;
  assert(static_cast<int>(snapshot.size()) == total_);
  vstat_ = snapshot;
  std::fill(basis_pos_.begin(), basis_pos_.end(), -1);
  int pos = 0;
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] != VStat::Basic) continue;
    if (pos >= m_) throw std::logic_error("basis snapshot has too many basics");
    basis_[pos] = j;
    basis_pos_[j] = pos;
    ++pos;
  }
  if (pos != m_) throw std::logic_error("basis snapshot has too few basics");
  refactorize();
}

double SimplexEngine::structural_objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * xval_[j];
  return obj;
}

LpRun SimplexEngine::dual_resolve() {
  snap_nonbasics();
  if (!factorized_) refactorize();
  recompute_basics();

  std::int64_t stall_streak = 0;
  int refactor_tries = 0;
  std::vector<double> cb;
  for (;;) {
    if ((iterations_ & 63) == 0) check_deadline();
    if (iterations_ > kIterationLimit)
      throw NumericError("simplex iteration limit exceeded");

    // most-violated basic leaves; ties by lowest variable index
    int leave_pos = -1;
    double worst = feas_tol_;
    for (int i = 0; i < m_; ++i) {
      int q = basis_[i];
      double viol = std::max(lo_[q] - xval_[q], xval_[q] - up_[q]);
      if (viol > worst + kRatioTieTol ||
          (viol > worst - kRatioTieTol && leave_pos >= 0 &&
           q < basis_[leave_pos] && viol > feas_tol_)) {
        worst = viol;
        leave_pos = i;
      }
    }
    if (leave_pos < 0) break;  // primal feasible; certify below

    int leaving = basis_[leave_pos];
    bool below = xval_[leaving] < lo_[leaving];
    int need = below ? 1 : -1;  // required sign of d x_leaving

    phase_costs(cb, false);
    std::vector<double> y = reduced_costs(cb);

    std::vector<double> rho(m_, 0.0);
    rho[leave_pos] = 1.0;
    btran(rho);

    int entering = -1, direction = 0;
    double best_ratio = kInf;
    for (int j = 0; j < total_; ++j) {
      VStat s = vstat_[j];
      if (s == VStat::Basic || is_fixed(j)) continue;
      double alpha = 0.0;
      if (j < n_) {
        for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
          alpha += rho[lp_.row_idx[k]] * lp_.vals[k];
      } else {
        alpha = -rho[j - n_];
      }
      if (std::fabs(alpha) <= kPivotTol) continue;
      // entering from lower moves x_leaving by -alpha*t, from upper by +alpha*t
      int dir;
      if (s == VStat::AtLower) {
        if (!(alpha * need < 0)) continue;
        dir = 1;
      } else if (s == VStat::AtUpper) {
        if (!(alpha * need > 0)) continue;
        dir = -1;
      } else {  // FreeZero: pick the direction that helps
        dir = (alpha * need < 0) ? 1 : -1;
      }
      double d;
      if (j < n_) {
        d = cost_[j];
        for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
          d -= y[lp_.row_idx[k]] * lp_.vals[k];
      } else {
        d = y[j - n_];
      }
      // dual slack: AtLower needs d <= 0, AtUpper needs d >= 0 (maximize)
      double slack = s == VStat::AtLower ? std::max(0.0, -d)
                     : s == VStat::AtUpper ? std::max(0.0, d)
                                           : std::fabs(d);
      double ratio = slack / std::fabs(alpha);
      if (ratio < best_ratio - kRatioTieTol ||
          (ratio <= best_ratio + kRatioTieTol && entering >= 0 && j < entering)) {
        best_ratio = ratio;
        entering = j;
        direction = dir;
      }
    }
    if (entering < 0) return LpRun{SolveStatus::Infeasible, -kInf};

    std::vector<double> w = ftran_column(entering);
    if (std::fabs(w[leave_pos]) <= kPivotTol) {
      if (refactor_tries++ == 0 && !etas_.empty()) {
        refactorize();
        recompute_basics();
        continue;
      }
      return primal_solve();  // warm basis is numerically unusable
    }
    refactor_tries = 0;

    double target = below ? lo_[leaving] : up_[leaving];
    double step = (target - xval_[leaving]) / (-direction * w[leave_pos]);
    if (step < 0.0) step = 0.0;  // tolerance noise
    pivot(entering, leave_pos, below ? VStat::AtLower : VStat::AtUpper, step,
          direction, w);

    if (step <= kRatioTieTol) {
      if (++stall_streak > kDegenerateLimit) return primal_solve();
    } else {
      stall_streak = 0;
    }
  }
  // primal feasible: finish with phase-2 primal (usually 0 iterations)
  return primal_loop(false);
}

}  // namespace p2psched::milp::detail
