#pragma once

#include <iosfwd>
#include <vector>

#include "deleg/core.hpp"
#include "deleg/measure.hpp"
#include "deleg/model.hpp"
#include "deleg/simplex.hpp"

namespace deleg {

// X = S scaled about its center by rho: the compact working domain on which
// convex extendability below h is enforced.
Box inflate_domain(const DelegationProblem& problem, double rho);

// Tensor grid over X whose per-axis coordinates contain every measure-node
// coordinate of S (midpoints and faces) plus extension nodes on X \ S.
struct XGrid {
  Box domain;
  std::vector<std::vector<double>> axis;  // sorted per-dimension coordinates
  Matrix nodes;                           // row-major tensor enumeration
  Matrix s_nodes;                         // measure nodes, in measure order
  std::vector<long> s_node_grid_index;    // grid index of each measure node

  long size() const { return nodes.rows(); }
  int dim() const { return static_cast<int>(axis.size()); }
  Vector node(long i) const { return nodes.row(i).transpose(); }
};

// extension_factor scales the node spacing used on X \ S relative to the
// S cell width.  Throws if a measure node fails to land on a grid node.
XGrid build_xgrid(const DelegationProblem& problem, const SignedMeasureGrid& measure, double rho,
                  double extension_factor = 1.0);

// Discretized primal in inequality form: maximize objective . z subject to
// row_coeffs . z <= row_rhs, z free.  Variables are node values U_i followed
// by per-node subgradients (n >= 2 only).
struct LPInstance {
  long value_vars = 0;
  long subgradient_vars = 0;
  std::vector<std::vector<std::pair<long, double>>> rows;  // (var, coef) per row
  Vector row_rhs;
  Vector objective;
  double objective_constant = 0.0;

  long num_convexity_rows = 0;
  std::vector<long> bound_row_of_node;            // U_i <= h(x_i) row per node
  std::vector<std::pair<long, double>> pinned;    // fixed value variables
  Matrix nodes;                                   // grid nodes, for reporting
  std::vector<long> s_node_grid_index;

  long num_vars() const { return value_vars + subgradient_vars; }
  long num_rows() const { return static_cast<long>(rows.size()); }
};

// Convexity rows are slope monotonicity in 1D and the full pairwise
// subgradient-extension characterization for n >= 2; every node gets an upper
// bound U_i <= h(x_i).
LPInstance build_primal_lp(const DelegationProblem& problem, const SignedMeasureGrid& measure,
                           const XGrid& xgrid);

// Same constraint rows with a zero objective and the given value variables
// pinned; used for convex-extension feasibility checks.
LPInstance build_feasibility_lp(const DelegationProblem& problem, const XGrid& xgrid,
                                const std::vector<std::pair<long, double>>& pins);

enum class LPStatus { optimal, infeasible, unbounded, iteration_limit };

struct LPSolution {
  LPStatus status = LPStatus::iteration_limit;
  Vector node_values;     // U at every grid node
  Vector subgradients;    // flattened per-node subgradients (n >= 2)
  Vector s_node_values;   // U at the measure nodes, in measure order
  Vector row_duals;       // multiplier per primal row
  double objective = 0.0;
  long iterations = 0;
  double primal_residual = 0.0;
  double cs_residual = 0.0;  // sum_r y_r (q_r - M_r z), scaled by 1 + |objective|
};

// Deterministic optimum via the revised simplex on the dual (basis size stays
// at the variable count, which keeps the pairwise 2D instances tractable).
LPSolution solve_lp(const LPInstance& instance, long max_pivots = 1000000);

// Positive measure gamma: the multipliers of the U <= h rows as atoms at their
// nodes.  Atoms below 1e-10 are clamped to zero.  Requires optimal status.
SignedMeasureGrid extract_dual_certificate(const LPInstance& instance,
                                           const LPSolution& solution);

// integral of h d(gamma) - integral of U d(mu); ~0 at an optimum by strong
// duality.
double duality_gap(const DelegationProblem& problem, const LPSolution& solution,
                   const SignedMeasureGrid& measure, const SignedMeasureGrid& gamma);

// CPLEX-style LP text interchange format with 17-significant-digit decimals.
void write_lp_format(const LPInstance& instance, std::ostream& out);

}  // namespace deleg
