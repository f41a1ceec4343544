#include "imcopt/simplex.hpp"

#include <cmath>
#include <limits>

#include "imcopt/error.hpp"

namespace imcopt {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
  int m = 0;       // constraint rows
  int n = 0;       // total columns excluding rhs
  std::vector<double> a;  // (m+1) x (n+1); row m is the objective, col n the rhs
  std::vector<int> basis;

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * (n + 1) + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * (n + 1) + c]; }

  void pivot(int pr, int pc) {
    const double pv = at(pr, pc);
    for (int c = 0; c <= n; ++c) at(pr, c) /= pv;
    for (int r = 0; r <= m; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= n; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis[pr] = pc;
  }

  // Bland's rule: entering = lowest-index column with negative reduced cost;
  // leaving = lowest basis index among the ratio-test minimizers.
  // Returns optimal/unbounded/iteration_limit.
  LpStatus optimize(long& pivots_left, int allowed_cols) {
    for (;;) {
      int pc = -1;
      for (int c = 0; c < allowed_cols; ++c) {
        if (at(m, c) < -kEps) {
          pc = c;
          break;
        }
      }
      if (pc < 0) return LpStatus::optimal;
      int pr = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m; ++r) {
        if (at(r, pc) > kEps) {
          const double ratio = at(r, n) / at(r, pc);
          if (pr < 0 || ratio < best_ratio - kEps ||
              (ratio < best_ratio + kEps && basis[r] < basis[pr])) {
            pr = r;
            best_ratio = ratio;
          }
        }
      }
      if (pr < 0) return LpStatus::unbounded;
      if (--pivots_left < 0) return LpStatus::iteration_limit;
      pivot(pr, pc);
    }
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& prob, long max_pivots) {
  const int m = static_cast<int>(prob.rows.size());
  const int nv = prob.num_vars;
  int n_slack = 0;
  int n_art = 0;
  for (const auto& row : prob.rows) {
    if (row.rhs < 0) throw Error(ErrorKind::validation, "lp: rhs must be non-negative");
    if (row.rel == LpProblem::Rel::le) ++n_slack;
    else ++n_art;
  }

  Tableau t;
  t.m = m;
  t.n = nv + n_slack + n_art;
  t.a.assign(static_cast<std::size_t>(m + 1) * (t.n + 1), 0.0);
  t.basis.assign(m, -1);

  int slack_at = nv;
  int art_at = nv + n_slack;
  const int art_begin = art_at;
  for (int r = 0; r < m; ++r) {
    const auto& row = prob.rows[r];
    for (int c = 0; c < nv; ++c) t.at(r, c) = row.coeffs[c];
    t.at(r, t.n) = row.rhs;
    if (row.rel == LpProblem::Rel::le) {
      t.at(r, slack_at) = 1.0;
      t.basis[r] = slack_at++;
    } else {
      t.at(r, art_at) = 1.0;
      t.basis[r] = art_at++;
    }
  }

  LpSolution sol;
  long pivots_left = max_pivots;

  if (n_art > 0) {
    // Phase 1: minimize the artificial sum; price out the artificial basis.
    for (int c = art_begin; c < t.n; ++c) t.at(m, c) = 1.0;
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] >= art_begin) {
        for (int c = 0; c <= t.n; ++c) t.at(m, c) -= t.at(r, c);
      }
    }
    const LpStatus p1 = t.optimize(pivots_left, t.n);
    if (p1 == LpStatus::iteration_limit) {
      sol.status = p1;
      return sol;
    }
    if (-t.at(m, t.n) > 1e-7) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Drive leftover artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] >= art_begin) {
        int pc = -1;
        for (int c = 0; c < art_begin; ++c) {
          if (std::fabs(t.at(r, c)) > kEps) {
            pc = c;
            break;
          }
        }
        if (pc >= 0) t.pivot(r, pc);
        // else: redundant row; the artificial stays basic at value ~0.
      }
    }
  }

  // Phase 2: install the real objective, priced out over the current basis.
  for (int c = 0; c <= t.n; ++c) t.at(m, c) = 0.0;
  for (int c = 0; c < nv; ++c) t.at(m, c) = prob.objective[c];
  for (int r = 0; r < m; ++r) {
    const int b = t.basis[r];
    if (b < nv && prob.objective[b] != 0.0) {
      const double f = prob.objective[b];
      for (int c = 0; c <= t.n; ++c) t.at(m, c) -= f * t.at(r, c);
      t.at(m, b) = 0.0;
    }
  }
  // Artificial columns may not re-enter.
  const LpStatus p2 = t.optimize(pivots_left, art_begin);
  if (p2 != LpStatus::optimal) {
    sol.status = p2;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.x.assign(nv, 0.0);
  for (int r = 0; r < m; ++r) {
    if (t.basis[r] < nv) sol.x[t.basis[r]] = t.at(r, t.n);
  }
  sol.objective = -t.at(m, t.n);
  return sol;
}

}  // namespace imcopt
