#include "deleg/simplex.hpp"

#include <cmath>

namespace deleg {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;
constexpr long kRefactorInterval = 64;
constexpr long kStallThreshold = 64;

struct Tableau {
  std::vector<std::vector<std::pair<long, double>>> columns;  // structural, sign-fixed
  Vector rhs;                                                 // sign-fixed, >= 0
  std::vector<double> row_sign;

  std::vector<long> basis;  // variable per row; >= cols means artificial
  Matrix binv;
  Vector xb;

  long m = 0, n = 0;

  void refactor() {
    Matrix b_mat = Matrix::Zero(m, m);
    for (long r = 0; r < m; ++r) {
      const long v = basis[r];
      if (v >= n) {
        b_mat(v - n, r) = 1.0;
      } else {
        for (const auto& [row, val] : columns[v]) b_mat(row, r) = val;
      }
    }
    binv = b_mat.partialPivLu().solve(Matrix::Identity(m, m));
    if (!binv.allFinite()) throw SolverError("simplex basis became singular", 0.0);
    xb = binv * rhs;
    for (long r = 0; r < m; ++r)
      if (xb[r] < 0.0 && xb[r] > -1e-9) xb[r] = 0.0;
  }

  Vector ftran(long var) const {
    Vector d = Vector::Zero(m);
    if (var >= n) {
      d = binv.col(var - n);
    } else {
      for (const auto& [row, val] : columns[var]) d += val * binv.col(row);
    }
    return d;
  }

  double column_dot(long var, const Vector& y) const {
    if (var >= n) return y[var - n];
    double acc = 0.0;
    for (const auto& [row, val] : columns[var]) acc += val * y[row];
    return acc;
  }

  void pivot(long leave_row, long entering, const Vector& d) {
    basis[leave_row] = entering;
    const double pivot_value = d[leave_row];
    binv.row(leave_row) /= pivot_value;
    const double step = std::max(xb[leave_row], 0.0) / pivot_value;
    for (long r = 0; r < m; ++r) {
      if (r == leave_row || d[r] == 0.0) continue;
      binv.row(r) -= d[r] * binv.row(leave_row);
      xb[r] -= d[r] * step;
      if (xb[r] < 0.0 && xb[r] > -1e-11) xb[r] = 0.0;
    }
    xb[leave_row] = step;
  }

  // Minimum-ratio row; ties resolved lexicographically on the rows of
  // [xb | binv] scaled by the pivot entry, the classic anti-cycling rule.
  long choose_leaving(const Vector& d, double* step_ratio) const {
    long best = -1;
    double best_ratio = 0.0;
    std::vector<long> ties;
    for (long r = 0; r < m; ++r) {
      if (d[r] <= kPivotTol) continue;
      const double ratio = std::max(xb[r], 0.0) / d[r];
      if (best < 0 || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
        best = r;
        best_ratio = ratio;
        ties.assign(1, r);
      } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
        ties.push_back(r);
      }
    }
    if (best < 0) return -1;
    *step_ratio = best_ratio;
    if (ties.size() == 1) return ties.front();

    long winner = ties.front();
    for (size_t k = 1; k < ties.size(); ++k) {
      const long r = ties[k];
      for (long c = 0; c < m; ++c) {
        const double lhs = binv(r, c) / d[r];
        const double rhs_value = binv(winner, c) / d[winner];
        if (std::abs(lhs - rhs_value) <= 1e-12 * (1.0 + std::abs(rhs_value))) continue;
        if (lhs < rhs_value) winner = r;
        break;
      }
    }
    return winner;
  }
};

// Dantzig pricing, switching to Bland's lowest-index entering rule while a
// degenerate stall lasts; the lexicographic leaving rule guarantees
// termination either way and everything is deterministic.
SimplexStatus run_phase(Tableau& tab, const Vector& cost, long max_pivots, long& used_pivots) {
  const long m = tab.m;
  std::vector<char> is_basic(tab.n + m, 0);
  for (long r = 0; r < m; ++r) is_basic[tab.basis[r]] = 1;

  long since_refactor = 0;
  long degenerate_run = 0;
  while (true) {
    if (used_pivots >= max_pivots) return SimplexStatus::iteration_limit;

    Vector cb(m);
    for (long r = 0; r < m; ++r) cb[r] = cost[tab.basis[r]];
    const Vector pi = tab.binv.transpose() * cb;

    const bool bland = degenerate_run >= kStallThreshold;
    long entering = -1;
    double most_negative = -kReducedCostTol;
    for (long j = 0; j < tab.n; ++j) {
      if (is_basic[j]) continue;
      const double reduced = cost[j] - tab.column_dot(j, pi);
      if (reduced < most_negative) {
        entering = j;
        if (bland) break;
        most_negative = reduced;
      }
    }
    if (entering < 0) return SimplexStatus::optimal;

    Vector d = tab.ftran(entering);
    if (!d.allFinite()) throw SolverError("simplex direction is not finite", 0.0);

    double step_ratio = 0.0;
    long leave_row = tab.choose_leaving(d, &step_ratio);

    // Refresh the factors before trusting a small pivot element; drift in the
    // eta updates can fabricate both entries and reduced costs.
    if (leave_row >= 0 && std::abs(d[leave_row]) < 1e-6 && since_refactor > 0) {
      tab.refactor();
      since_refactor = 0;
      d = tab.ftran(entering);
      if (!d.allFinite()) throw SolverError("simplex direction is not finite", 0.0);
      leave_row = tab.choose_leaving(d, &step_ratio);
      Vector cb2(m);
      for (long r = 0; r < m; ++r) cb2[r] = cost[tab.basis[r]];
      if (cost[entering] - tab.column_dot(entering, tab.binv.transpose() * cb2) >=
          -kReducedCostTol)
        continue;
    }
    if (leave_row < 0) return SimplexStatus::unbounded;

    degenerate_run = (step_ratio <= 1e-12) ? degenerate_run + 1 : 0;

    is_basic[tab.basis[leave_row]] = 0;
    is_basic[entering] = 1;
    tab.pivot(leave_row, entering, d);

    ++used_pivots;
    if (++since_refactor >= kRefactorInterval) {
      tab.refactor();
      since_refactor = 0;
    }
  }
}

}  // namespace

SimplexResult simplex_solve(const SparseLP& lp, long max_pivots) {
  const long m = lp.rows;
  const long n = lp.cols;

  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.row_sign.assign(m, 1.0);
  tab.rhs = lp.rhs;
  for (long r = 0; r < m; ++r) {
    if (tab.rhs[r] < 0.0) {
      tab.row_sign[r] = -1.0;
      tab.rhs[r] = -tab.rhs[r];
    }
  }
  tab.columns.resize(n);
  for (long j = 0; j < n; ++j) {
    tab.columns[j].reserve(lp.columns[j].size());
    for (const auto& [row, val] : lp.columns[j])
      tab.columns[j].emplace_back(row, val * tab.row_sign[row]);
  }

  // Crash basis: positive singleton columns stand in for artificials, so
  // phase 1 only has to repair rows without one.
  tab.basis.assign(m, -1);
  for (long j = 0; j < n; ++j) {
    if (tab.columns[j].size() != 1) continue;
    const auto& [row, val] = tab.columns[j].front();
    if (val == 1.0 && tab.basis[row] < 0) tab.basis[row] = j;
  }
  bool needs_phase1 = false;
  for (long r = 0; r < m; ++r) {
    if (tab.basis[r] < 0) {
      tab.basis[r] = n + r;
      if (tab.rhs[r] > kPhase1Tol) needs_phase1 = true;  // zero rows start feasible
    }
  }
  tab.refactor();

  SimplexResult result;
  result.x = Vector::Zero(n);
  result.duals = Vector::Zero(m);

  long pivots = 0;
  if (needs_phase1) {
    Vector phase1_cost = Vector::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    const SimplexStatus st = run_phase(tab, phase1_cost, max_pivots, pivots);
    result.iterations = pivots;
    if (st == SimplexStatus::iteration_limit) {
      result.status = st;
      return result;
    }
    double artificial_sum = 0.0;
    for (long r = 0; r < m; ++r)
      if (tab.basis[r] >= n) artificial_sum += std::abs(tab.xb[r]);
    if (artificial_sum > kPhase1Tol) {
      result.status = SimplexStatus::infeasible;
      return result;
    }
  }

  // Swap zero-valued artificials for structural columns where a pivot exists;
  // rows without one are linearly dependent and keep a zero artificial.
  {
    bool pivoted = false;
    std::vector<char> in_basis(n, 0);
    for (long r = 0; r < m; ++r)
      if (tab.basis[r] < n) in_basis[tab.basis[r]] = 1;
    for (long r = 0; r < m; ++r) {
      if (tab.basis[r] < n) continue;
      const Vector row_of_binv = tab.binv.row(r).transpose();
      for (long j = 0; j < n; ++j) {
        if (in_basis[j]) continue;
        if (std::abs(tab.column_dot(j, row_of_binv)) > kPivotTol) {
          tab.pivot(r, j, tab.ftran(j));
          in_basis[j] = 1;
          pivoted = true;
          break;
        }
      }
    }
    if (pivoted) tab.refactor();
  }

  // Phase 2 with the true costs; any artificials left in the basis carry zero
  // cost, sit at zero value, and are barred from entering.
  Vector phase2_cost = Vector::Zero(n + m);
  phase2_cost.head(n) = lp.cost;
  const SimplexStatus st = run_phase(tab, phase2_cost, max_pivots, pivots);
  result.iterations = pivots;
  if (st == SimplexStatus::iteration_limit || st == SimplexStatus::unbounded) {
    result.status = st;
    if (st == SimplexStatus::iteration_limit) {
      for (long r = 0; r < m; ++r)
        if (tab.basis[r] < n) result.x[tab.basis[r]] = tab.xb[r];
    }
    return result;
  }

  tab.refactor();
  for (long r = 0; r < m; ++r) {
    if (tab.basis[r] < n)
      result.x[tab.basis[r]] = std::max(tab.xb[r], 0.0);
    else if (std::abs(tab.xb[r]) > 1e-6)
      throw SolverError("artificial variable finished with nonzero value", std::abs(tab.xb[r]));
  }

  Vector cb(m);
  for (long r = 0; r < m; ++r) cb[r] = phase2_cost[tab.basis[r]];
  const Vector pi = tab.binv.transpose() * cb;
  for (long r = 0; r < m; ++r) result.duals[r] = pi[r] * tab.row_sign[r];

  CompensatedSum obj;
  for (long j = 0; j < n; ++j)
    if (result.x[j] != 0.0) obj.add(lp.cost[j] * result.x[j]);
  result.objective = obj.value();

  Vector ax = Vector::Zero(m);
  for (long j = 0; j < n; ++j)
    if (result.x[j] != 0.0)
      for (const auto& [row, val] : lp.columns[j]) ax[row] += val * result.x[j];
  result.residual = (ax - lp.rhs).lpNorm<Eigen::Infinity>();
  result.status = SimplexStatus::optimal;
  return result;
}

}  // namespace deleg
