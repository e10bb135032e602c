#include "subauction/simplex.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <vector>

#include "subauction/errors.hpp"

namespace subauction {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kFeasTol = 1e-7;

struct Tableau {
  int rows = 0;
  int cols = 0;              // structural + row columns, excluding rhs
  std::vector<double> a;     // rows x (cols + 1), last column is rhs
  std::vector<double> cost;  // reduced costs z_j - c_j, length cols
  double objval = 0.0;
  std::vector<int> basis;       // basic column per row
  std::vector<char> is_basic;   // per column; bars re-entry of basic columns

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double& rhs(int r) { return at(r, cols); }

  void mark_basis() {
    is_basic.assign(cols, 0);
    for (int b : basis) {
      if (b >= 0) is_basic[b] = 1;
    }
  }

  void pivot(int pr, int pc) {
    double inv = 1.0 / at(pr, pc);
    double* prow = &a[static_cast<std::size_t>(pr) * (cols + 1)];
    for (int c = 0; c <= cols; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      double f = at(r, pc);
      if (f == 0.0) continue;
      double* row = &a[static_cast<std::size_t>(r) * (cols + 1)];
      for (int c = 0; c <= cols; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    double f = cost[pc];
    if (f != 0.0) {
      for (int c = 0; c < cols; ++c) cost[c] -= f * prow[c];
      cost[pc] = 0.0;
      objval -= f * prow[cols];
    }
    is_basic[basis[pr]] = 0;
    is_basic[pc] = 1;
    basis[pr] = pc;
  }
};

}  // namespace

double LpSolution::dual_objective(const LpProblem& lp) const {
  double v = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) v += lp.rows()[i].rhs * y[i];
  return v;
}

LpSolution solve_lp(const LpProblem& lp) {
  const int nv = lp.num_vars();
  const int nr = lp.num_rows();

  // Normalize rows to nonnegative rhs, flipping <=/>= when negated.
  std::vector<Rel> rel(nr);
  std::vector<bool> flipped(nr, false);
  std::vector<double> rhs(nr);
  for (int i = 0; i < nr; ++i) {
    rel[i] = lp.rows()[i].rel;
    rhs[i] = lp.rows()[i].rhs;
    if (rhs[i] < 0.0) {
      flipped[i] = true;
      rhs[i] = -rhs[i];
      if (rel[i] == Rel::le) {
        rel[i] = Rel::ge;
      } else if (rel[i] == Rel::ge) {
        rel[i] = Rel::le;
      }
    }
  }

  // Column layout: positive parts, negative parts of free variables, slacks,
  // surpluses, then artificials (contiguous at the end so phase 2 can ban
  // them by index).
  std::vector<int> neg_col(nv, -1);
  int cols = nv;
  for (int v = 0; v < nv; ++v) {
    if (lp.free_vars()[v]) neg_col[v] = cols++;
  }
  std::vector<int> slack_col(nr, -1), surplus_col(nr, -1), art_col(nr, -1);
  for (int i = 0; i < nr; ++i) {
    if (rel[i] == Rel::le) slack_col[i] = cols++;
    if (rel[i] == Rel::ge) surplus_col[i] = cols++;
  }
  const int first_art = cols;
  for (int i = 0; i < nr; ++i) {
    if (rel[i] != Rel::le) art_col[i] = cols++;
  }

  Tableau t;
  t.rows = nr;
  t.cols = cols;
  t.a.assign(static_cast<std::size_t>(nr) * (cols + 1), 0.0);
  t.cost.assign(cols, 0.0);
  t.basis.assign(nr, -1);

  for (int i = 0; i < nr; ++i) {
    double sgn = flipped[i] ? -1.0 : 1.0;
    for (auto [v, c] : lp.rows()[i].coef) {
      t.at(i, v) += sgn * c;
      if (neg_col[v] >= 0) t.at(i, neg_col[v]) -= sgn * c;
    }
    if (slack_col[i] >= 0) t.at(i, slack_col[i]) = 1.0;
    if (surplus_col[i] >= 0) t.at(i, surplus_col[i]) = -1.0;
    if (art_col[i] >= 0) t.at(i, art_col[i]) = 1.0;
    t.rhs(i) = rhs[i];
    t.basis[i] = art_col[i] >= 0 ? art_col[i] : slack_col[i];
  }
  t.mark_basis();

  const bool need_phase1 = first_art < cols;

  // Pristine copy of the constraint matrix and rhs for refactorization.
  const std::vector<double> a0 = t.a;

  std::vector<double> cvar(cols, 0.0);  // objective of the phase in progress
  bool rebuild_ok = true;

  auto reset_costs = [&]() {
    for (int c = 0; c < cols; ++c) t.cost[c] = -cvar[c];
    t.objval = 0.0;
    for (int i = 0; i < nr; ++i) {
      double cb = cvar[t.basis[i]];
      if (cb == 0.0) continue;
      for (int c = 0; c < cols; ++c) t.cost[c] += cb * t.at(i, c);
      t.objval += cb * t.rhs(i);
    }
    for (int i = 0; i < nr; ++i) t.cost[t.basis[i]] = 0.0;
  };

  // Re-derives the tableau for the current basis from the pristine data,
  // shedding roundoff accumulated over long pivot runs. Falls back to the
  // accumulated tableau (returning false) if the basis pivots get too small
  // to refactorize stably.
  auto rebuild = [&]() -> bool {
    if (!rebuild_ok) return false;
    std::vector<double> saved_a = std::move(t.a);
    std::vector<int> saved_basis = t.basis;
    t.a = a0;
    std::vector<bool> row_done(nr, false);
    for (int idx = 0; idx < nr; ++idx) {
      const int c = saved_basis[idx];
      int pr = -1;
      double best = 1e-9;
      for (int r = 0; r < nr; ++r) {
        if (row_done[r]) continue;
        const double mag = std::fabs(t.at(r, c));
        if (mag > best) {
          best = mag;
          pr = r;
        }
      }
      if (pr < 0) {
        t.a = std::move(saved_a);
        t.basis = std::move(saved_basis);
        t.mark_basis();
        rebuild_ok = false;
        return false;
      }
      t.pivot(pr, c);  // cost side is recomputed below
      row_done[pr] = true;
    }
    t.mark_basis();
    for (int r = 0; r < nr; ++r) {
      if (t.rhs(r) < 0.0) {
        if (t.rhs(r) < -1e-6) {
          throw NumericError("simplex lost feasibility during refactorization");
        }
        t.rhs(r) = 0.0;
      }
    }
    reset_costs();
    return true;
  };

  auto run_phase = [&](bool phase1, std::int64_t& iter_budget) -> LpStatus {
    // Phase 1 maximizes -sum(artificials); phase 2 maximizes the real
    // objective with artificial columns banned from entering.
    cvar.assign(cols, 0.0);
    if (phase1) {
      for (int i = 0; i < nr; ++i) {
        if (art_col[i] >= 0) cvar[art_col[i]] = -1.0;
      }
    } else {
      for (int v = 0; v < nv; ++v) {
        cvar[v] = lp.obj()[v];
        if (neg_col[v] >= 0) cvar[neg_col[v]] = -lp.obj()[v];
      }
    }
    reset_costs();

    const std::int64_t dantzig_limit = 5000 + 50LL * (cols + nr);
    constexpr std::int64_t kRebuildInterval = 250;
    std::int64_t iters = 0;
    std::int64_t since_rebuild = 0;
    int gate_rebuilds = 0;
    bool bland_forced = false;
    double stall_ref = -std::numeric_limits<double>::infinity();
    int stall_count = 0;
    const int usable_cols = phase1 ? cols : first_art;
    while (true) {
      if (--iter_budget < 0) throw NumericError("simplex pivot limit exhausted");
      bool bland = bland_forced || iters++ > dantzig_limit;
      if (std::getenv("SUBAUCTION_LP_TRACE") && iters % 100000 == 0) {
        std::fprintf(stderr, "lp: phase%d iters=%lld obj=%.9f nr=%d cols=%d bland=%d gate=%d\n",
                     phase1 ? 1 : 2, static_cast<long long>(iters), t.objval, nr, cols,
                     int(bland), gate_rebuilds);
      }
      int enter = -1;
      double best = -kPivotEps;
      for (int c = 0; c < usable_cols; ++c) {
        if (t.cost[c] < best && !t.is_basic[c]) {
          enter = c;
          if (bland) break;
          best = t.cost[c];
        }
      }
      if (enter < 0) {
        // Confirm optimality on freshly refactorized numbers before trusting
        // a cost row that may carry accumulated roundoff. The cap keeps a
        // heavily degenerate endgame from paying a refactorization per pivot;
        // the caller does a final rebuild before extracting the solution.
        if (since_rebuild > 0 && gate_rebuilds < 200 && rebuild()) {
          ++gate_rebuilds;
          since_rebuild = 0;
          continue;
        }
        return LpStatus::optimal;
      }
      if (since_rebuild == 0 && t.cost[enter] >= -3e-8) {
        // Freshly refactorized numbers show only a noise-scale improvement;
        // chasing it would spin on degenerate pivots without moving the
        // objective meaningfully.
        return LpStatus::optimal;
      }
      int leave = -1;
      if (bland) {
        // Exact minimum ratio with the lowest-basis-index tie-break keeps
        // Bland's anti-cycling guarantee intact.
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < nr; ++r) {
          double arc = t.at(r, enter);
          if (arc > kPivotEps) {
            double ratio = t.rhs(r) / arc;
            if (ratio < best_ratio - 1e-12 ||
                (ratio <= best_ratio + 1e-12 &&
                 (leave < 0 || t.basis[r] < t.basis[leave]))) {
              if (ratio < best_ratio) best_ratio = ratio;
              leave = r;
            }
          }
        }
      } else {
        // Two-pass ratio test: find the step length that keeps every row
        // within a small feasibility tolerance, then pivot on the largest
        // element among rows whose ratio fits under it. Forced pivots on
        // near-zero elements are what destroy the tableau numerically.
        constexpr double kHarrisTol = 1e-9;
        double theta_max = std::numeric_limits<double>::infinity();
        for (int r = 0; r < nr; ++r) {
          double arc = t.at(r, enter);
          if (arc > kPivotEps) {
            theta_max = std::min(theta_max, (t.rhs(r) + kHarrisTol) / arc);
          }
        }
        if (std::isfinite(theta_max)) {
          double best_arc = 0.0;
          for (int r = 0; r < nr; ++r) {
            double arc = t.at(r, enter);
            if (arc > kPivotEps && t.rhs(r) / arc <= theta_max && arc > best_arc) {
              best_arc = arc;
              leave = r;
            }
          }
        }
      }
      if (leave < 0) {
        if (since_rebuild > 0 && rebuild()) {
          since_rebuild = 0;
          continue;
        }
        return LpStatus::unbounded;
      }
      t.pivot(leave, enter);
      // Tiny negatives left by the tolerance above must not contaminate
      // later ratio tests; refactorization restores the exact values.
      for (int r = 0; r < nr; ++r) {
        if (t.rhs(r) < 0.0) t.rhs(r) = 0.0;
      }
      // A long run of pivots without objective progress means the most-
      // negative-cost rule is spinning on a degenerate vertex; Bland's rule
      // walks out of it.
      const double scale = std::max(1.0, std::abs(t.objval));
      if (t.objval > stall_ref + 1e-11 * scale) {
        stall_ref = t.objval;
        stall_count = 0;
      } else if (++stall_count > 300) {
        bland_forced = true;
      }
      if (++since_rebuild >= kRebuildInterval && rebuild()) since_rebuild = 0;
    }
  };

  LpSolution sol;
  std::int64_t iter_budget = 4'000'000;
  if (need_phase1) {
    LpStatus st = run_phase(true, iter_budget);
    if (st == LpStatus::unbounded) throw NumericError("phase-1 LP reported unbounded");
    if (t.objval < -kFeasTol) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Drive artificials out of the basis where possible; rows where that
    // fails are redundant and stay pinned at zero.
    for (int r = 0; r < nr; ++r) {
      if (t.basis[r] >= first_art) {
        for (int c = 0; c < first_art; ++c) {
          if (std::fabs(t.at(r, c)) > kPivotEps) {
            t.pivot(r, c);
            break;
          }
        }
      }
    }
  }

  LpStatus st = run_phase(false, iter_budget);
  if (st == LpStatus::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }
  // Extract from freshly refactorized numbers regardless of how the phase
  // ended; x, duals, and the objective all read off the tableau.
  rebuild();

  sol.status = LpStatus::optimal;
  sol.objective = t.objval;
  sol.x.assign(nv, 0.0);
  std::vector<double> colval(cols, 0.0);
  for (int r = 0; r < nr; ++r) colval[t.basis[r]] = t.rhs(r);
  for (int v = 0; v < nv; ++v) {
    sol.x[v] = colval[v];
    if (neg_col[v] >= 0) sol.x[v] -= colval[neg_col[v]];
  }

  // Duals are the reduced costs of each row's +1 identity column (slack for
  // <= rows, artificial for >=/== rows); flipped rows negate back.
  sol.y.assign(nr, 0.0);
  for (int i = 0; i < nr; ++i) {
    int idc = art_col[i] >= 0 ? art_col[i] : slack_col[i];
    double yi = t.cost[idc];
    sol.y[i] = flipped[i] ? -yi : yi;
  }
  return sol;
}

}  // namespace subauction
