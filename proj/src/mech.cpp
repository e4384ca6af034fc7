#include "deleg/mech.hpp"

#include <algorithm>
#include <cmath>

#include "deleg/lp.hpp"

namespace deleg {

void validate_menu(const Menu& menu) {
  if (menu.pieces.empty()) throw std::invalid_argument("menu needs at least one piece");
  const long n = menu.pieces.front().a.size();
  for (size_t k = 0; k < menu.pieces.size(); ++k) {
    if (menu.pieces[k].a.size() != n) throw std::invalid_argument("menu piece dimension mismatch");
    for (size_t l = 0; l < k; ++l) {
      if ((menu.pieces[k].a - menu.pieces[l].a).lpNorm<Eigen::Infinity>() == 0.0 &&
          menu.pieces[k].c == menu.pieces[l].c)
        throw std::invalid_argument("menu contains two identical pieces");
    }
  }
}

std::pair<double, long> menu_eval(const Menu& menu, const Vector& s) {
  double best = -std::numeric_limits<double>::infinity();
  long best_index = -1;
  for (size_t k = 0; k < menu.pieces.size(); ++k) {
    const double value = menu.pieces[k].a.dot(s) + menu.pieces[k].c;
    if (value > best) {
      best = value;
      best_index = static_cast<long>(k);
    }
  }
  return {best, best_index};
}

FeasibilityVerdict check_feasible_menu(const DelegationProblem& problem, const Menu& menu,
                                       double tol) {
  FeasibilityVerdict verdict;
  verdict.feasible = true;
  verdict.worst_margin = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < menu.pieces.size(); ++k) {
    const double margin = menu.pieces[k].c - problem.curvature_b(menu.pieces[k].a);
    if (margin > verdict.worst_margin) {
      verdict.worst_margin = margin;
      verdict.worst_piece = static_cast<long>(k);
    }
  }
  verdict.feasible = verdict.worst_margin <= tol;
  return verdict;
}

namespace {

// Two-point lottery a +/- d e with E[b] = target; d found by bisection for
// non-quadratic curvature (E[b] is strictly decreasing in d by concavity).
Lottery burn_lottery(const DelegationProblem& problem, const Vector& a, double target) {
  const double burn = problem.curvature_b(a) - target;
  if (burn <= 1e-12) return Lottery::degenerate(a);

  Vector e = Vector::Zero(a.size());
  e[0] = 1.0;

  auto expected_b = [&](double d) {
    return 0.5 * (problem.curvature_b(a + d * e) + problem.curvature_b(a - d * e));
  };

  double d;
  if (problem.curvature.kind == CurvatureSpec::Kind::quadratic) {
    d = std::sqrt(2.0 * burn);
  } else {
    double hi = 1.0;
    while (expected_b(hi) > target) {
      hi *= 2.0;
      if (hi > 1e12) throw SolverError("burn bisection failed to bracket", burn);
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      d = 0.5 * (lo + hi);
      if (expected_b(d) > target)
        lo = d;
      else
        hi = d;
    }
    d = 0.5 * (lo + hi);
  }

  Lottery l;
  l.atoms.push_back({a + d * e, 0.5});
  l.atoms.push_back({a - d * e, 0.5});
  return l;
}

}  // namespace

Mechanism build_mechanism(const DelegationProblem& problem, const Menu& menu) {
  validate_menu(menu);
  const FeasibilityVerdict verdict = check_feasible_menu(problem, menu);
  if (!verdict.feasible)
    throw std::domain_error("cannot build a mechanism from an infeasible menu");

  Mechanism mech;
  mech.menu = menu;
  mech.lotteries.reserve(menu.pieces.size());
  for (const auto& piece : menu.pieces)
    mech.lotteries.push_back(burn_lottery(problem, piece.a, piece.c));
  return mech;
}

ICReport check_incentive_compatibility(const DelegationProblem& problem,
                                       const Mechanism& mechanism, const Matrix& report_grid,
                                       double tol) {
  const long num_points = report_grid.rows();
  const size_t num_pieces = mechanism.lotteries.size();

  std::vector<Vector> mean(num_pieces);
  std::vector<double> expected_b(num_pieces);
  for (size_t k = 0; k < num_pieces; ++k) {
    mean[k] = mechanism.lotteries[k].mean();
    expected_b[k] = lottery_expected_b(problem, mechanism.lotteries[k]);
  }

  std::vector<long> assigned(num_points);
  ICReport report;
  report.induced_utility.resize(num_points);
  for (long i = 0; i < num_points; ++i) {
    const Vector s = report_grid.row(i).transpose();
    const auto [value, index] = menu_eval(mechanism.menu, s);
    assigned[i] = index;
    report.induced_utility[i] = mean[index].dot(s) + expected_b[index];
    report.max_menu_gap = std::max(report.max_menu_gap,
                                   std::abs(report.induced_utility[i] - value));
  }

  for (long i = 0; i < num_points; ++i) {
    const Vector s = report_grid.row(i).transpose();
    const double truthful = report.induced_utility[i];
    for (long j = 0; j < num_points; ++j) {
      const long k = assigned[j];
      const double deviation = mean[k].dot(s) + expected_b[k];
      const double violation = deviation - truthful;
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.worst_type = i;
        report.worst_report = j;
      }
    }
  }
  (void)tol;  // violations are data; the caller compares against its tolerance
  return report;
}

Menu delegation_menu(const DelegationProblem& problem, const Matrix& actions) {
  Menu menu;
  menu.pieces.reserve(actions.rows());
  for (long i = 0; i < actions.rows(); ++i) {
    const Vector a = actions.row(i).transpose();
    menu.pieces.push_back({a, problem.curvature_b(a)});
  }
  return menu;
}

Menu interval_delegation_menu(const DelegationProblem& problem, double s1, double s2,
                              const std::vector<double>& abscissae) {
  if (problem.n != 1) throw std::domain_error("interval menus are one-dimensional");
  if (!(s1 <= s2)) throw std::domain_error("interval endpoints out of order");
  Menu menu;
  auto add = [&](double a) {
    Vector av = vec1(a);
    menu.pieces.push_back({av, problem.curvature_b(av)});
  };
  add(s1);
  for (double x : abscissae)
    if (x > s1 && x < s2) add(x);
  if (s2 > s1) add(s2);
  return menu;
}

GridFeasibility check_feasible_grid(const DelegationProblem& problem, const XGrid& xgrid,
                                    const Vector& s_node_values) {
  if (s_node_values.size() != static_cast<long>(xgrid.s_node_grid_index.size()))
    throw std::invalid_argument("value vector does not match the grid's S nodes");

  std::vector<std::pair<long, double>> pins;
  pins.reserve(s_node_values.size());
  for (long i = 0; i < s_node_values.size(); ++i)
    pins.emplace_back(xgrid.s_node_grid_index[i], s_node_values[i]);

  const LPInstance lp = build_feasibility_lp(problem, xgrid, pins);
  const LPSolution sol = solve_lp(lp);
  GridFeasibility out;
  switch (sol.status) {
    case LPStatus::optimal:
      out.feasible = true;
      out.detail = "convex extension below h exists";
      break;
    case LPStatus::infeasible:
      out.feasible = false;
      out.detail = "no convex extension below h on the inflated domain";
      break;
    case LPStatus::unbounded:
      throw SolverError("feasibility LP reported unbounded", 0.0);
    case LPStatus::iteration_limit:
      throw SolverError("feasibility LP hit the pivot limit", 0.0);
  }
  return out;
}

}  // namespace deleg
