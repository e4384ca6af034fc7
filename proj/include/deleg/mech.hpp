#pragma once

#include <utility>
#include <vector>

#include "deleg/core.hpp"
#include "deleg/model.hpp"

namespace deleg {

struct XGrid;  // defined in deleg/lp.hpp

// Finite max-of-affine representation of an indirect utility:
// U(s) = max_k a_k.s + c_k.
struct MenuPiece {
  Vector a;
  double c = 0.0;
};

struct Menu {
  std::vector<MenuPiece> pieces;
};

void validate_menu(const Menu& menu);

// Value and maximizing piece (lowest index on ties).
std::pair<double, long> menu_eval(const Menu& menu, const Vector& s);

struct FeasibilityVerdict {
  bool feasible = false;
  long worst_piece = -1;
  double worst_margin = 0.0;  // max over pieces of c_k - b(a_k)
};

// A piece a.s + c lies below h everywhere iff c <= -h*(a) = b(a), and a max of
// affine pieces is convex, so the menu form makes both feasibility conditions
// from the incentive-compatibility characterization checkable piecewise.
FeasibilityVerdict check_feasible_menu(const DelegationProblem& problem, const Menu& menu,
                                       double tol = 1e-12);

// Assignment of lotteries to menu pieces; report s is served by the lottery of
// the piece that attains menu_eval(s) (lowest index on ties).
struct Mechanism {
  Menu menu;
  std::vector<Lottery> lotteries;
};

// For each piece, a lottery with mean a_k and expected curvature payoff c_k.
// Zero burn gives a degenerate lottery; positive burn b(a_k) - c_k is realized
// by a two-point lottery a_k +/- d e along a fixed unit direction e, with
// d = sqrt(2 burn) in the quadratic case and d solved by bisection otherwise.
Mechanism build_mechanism(const DelegationProblem& problem, const Menu& menu);

struct ICReport {
  double max_violation = 0.0;       // max over (s, s') of deviation - truthful
  double max_menu_gap = 0.0;        // max |induced utility - menu_eval|
  long worst_report = -1;
  long worst_type = -1;
  Vector induced_utility;           // truthful payoff at each grid point
};

// Brute force over all ordered report pairs on the grid (one row per point).
ICReport check_incentive_compatibility(const DelegationProblem& problem,
                                       const Mechanism& mechanism, const Matrix& report_grid,
                                       double tol = 1e-9);

// Menu whose pieces are first-best tangents at the given actions (c = b(a)).
Menu delegation_menu(const DelegationProblem& problem, const Matrix& actions);

// 1D interval-delegation menu: tangent pieces at s1, s2 and at every supplied
// abscissa strictly between them.
Menu interval_delegation_menu(const DelegationProblem& problem, double s1, double s2,
                              const std::vector<double>& abscissae);

struct GridFeasibility {
  bool feasible = false;
  std::string detail;
};

// Is a tabulated function on the S-nodes of an inflated grid extendable to a
// grid-convex function below h on all of X?  Solved as an LP feasibility
// problem with the S values pinned.
GridFeasibility check_feasible_grid(const DelegationProblem& problem, const XGrid& xgrid,
                                    const Vector& s_node_values);

}  // namespace deleg
