#include "deleg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace deleg {

Box inflate_domain(const DelegationProblem& problem, double rho) {
  if (rho < 1.0) throw std::invalid_argument("inflation factor must be >= 1");
  return problem.state_space.scaled(rho);
}

namespace {

std::vector<double> axis_coordinates(double s_lo, double s_hi, double x_lo, double x_hi,
                                     int cells, double extension_factor) {
  std::vector<double> coords;
  const double delta = (s_hi - s_lo) / cells;
  const double ext_step = delta * extension_factor;

  auto extend = [&](double from, double to) {  // nodes on [from, to), left-closed
    const double len = to - from;
    if (len <= 1e-15) return;
    const int k = std::max(1, static_cast<int>(std::llround(len / ext_step)));
    for (int j = 0; j < k; ++j) coords.push_back(from + j * len / k);
  };

  extend(x_lo, s_lo);
  coords.push_back(s_lo);
  for (double c : axis_midpoints(s_lo, s_hi, cells)) coords.push_back(c);
  coords.push_back(s_hi);
  // Mirror of the left extension, right-closed.
  {
    const double len = x_hi - s_hi;
    if (len > 1e-15) {
      const int k = std::max(1, static_cast<int>(std::llround(len / ext_step)));
      for (int j = 1; j <= k; ++j) coords.push_back(s_hi + j * len / k);
    }
  }
  return coords;
}

long locate(const std::vector<double>& axis, double value) {
  auto it = std::lower_bound(axis.begin(), axis.end(), value);
  if (it != axis.end() && *it == value) return it - axis.begin();
  return -1;
}

}  // namespace

XGrid build_xgrid(const DelegationProblem& problem, const SignedMeasureGrid& measure, double rho,
                  double extension_factor) {
  const Box x_box = inflate_domain(problem, rho);
  const int n = problem.n;

  XGrid grid;
  grid.domain = x_box;
  grid.axis.resize(n);
  for (int d = 0; d < n; ++d)
    grid.axis[d] = axis_coordinates(problem.state_space.lo[d], problem.state_space.hi[d],
                                    x_box.lo[d], x_box.hi[d], measure.cells_per_axis,
                                    extension_factor);

  long total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<long>(grid.axis[d].size());
  grid.nodes.resize(total, n);
  std::vector<long> idx(n, 0);
  for (long row = 0; row < total; ++row) {
    for (int d = 0; d < n; ++d) grid.nodes(row, d) = grid.axis[d][idx[d]];
    int d = n - 1;
    while (d >= 0 && ++idx[d] == static_cast<long>(grid.axis[d].size())) idx[d--] = 0;
  }

  grid.s_nodes = measure.nodes;
  grid.s_node_grid_index.resize(measure.size());
  std::vector<long> strides(n);
  strides[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d)
    strides[d] = strides[d + 1] * static_cast<long>(grid.axis[d + 1].size());
  for (long i = 0; i < measure.size(); ++i) {
    long flat = 0;
    for (int d = 0; d < n; ++d) {
      const long pos = locate(grid.axis[d], measure.nodes(i, d));
      if (pos < 0) throw std::invalid_argument("measure node does not lie on the X grid");
      flat += pos * strides[d];
    }
    grid.s_node_grid_index[i] = flat;
  }
  return grid;
}

namespace {

void append_constraint_rows(const DelegationProblem& problem, const XGrid& xgrid,
                            LPInstance& lp) {
  const int n = xgrid.dim();
  const long num_nodes = xgrid.size();

  if (n == 1) {
    const auto& axis = xgrid.axis[0];
    for (long i = 1; i + 1 < static_cast<long>(axis.size()); ++i) {
      const double dl = axis[i] - axis[i - 1];
      const double dr = axis[i + 1] - axis[i];
      lp.rows.push_back({{i - 1, -1.0 / dl}, {i, 1.0 / dl + 1.0 / dr}, {i + 1, -1.0 / dr}});
    }
  } else {
    // U_j >= U_i + g_i . (x_j - x_i) for every ordered pair: the exact
    // characterization of convex extendability of node values.  The row count
    // grows quadratically, so overly fine grids are rejected up front.
    if (num_nodes * (num_nodes - 1) > 250000)
      throw std::invalid_argument(
          "grid too fine for the pairwise convexity formulation (" +
          std::to_string(num_nodes * (num_nodes - 1)) + " rows); coarsen the grid");
    for (long i = 0; i < num_nodes; ++i) {
      for (long j = 0; j < num_nodes; ++j) {
        if (i == j) continue;
        std::vector<std::pair<long, double>> row;
        row.reserve(2 + n);
        row.emplace_back(i, 1.0);
        row.emplace_back(j, -1.0);
        for (int d = 0; d < n; ++d) {
          const double diff = xgrid.nodes(j, d) - xgrid.nodes(i, d);
          if (diff != 0.0) row.emplace_back(num_nodes + i * n + d, diff);
        }
        lp.rows.push_back(std::move(row));
      }
    }
  }
  lp.num_convexity_rows = lp.num_rows();

  lp.bound_row_of_node.resize(num_nodes);
  for (long i = 0; i < num_nodes; ++i) {
    lp.bound_row_of_node[i] = lp.num_rows();
    lp.rows.push_back({{i, 1.0}});
  }

  lp.row_rhs = Vector::Zero(lp.num_rows());
  for (long i = 0; i < num_nodes; ++i)
    lp.row_rhs[lp.bound_row_of_node[i]] = first_best_payoff(problem, xgrid.node(i));
}

}  // namespace

LPInstance build_primal_lp(const DelegationProblem& problem, const SignedMeasureGrid& measure,
                           const XGrid& xgrid) {
  if (measure.size() != static_cast<long>(xgrid.s_node_grid_index.size()))
    throw std::invalid_argument("measure does not match the grid it was built with");

  LPInstance lp;
  const int n = xgrid.dim();
  lp.value_vars = xgrid.size();
  lp.subgradient_vars = (n >= 2) ? xgrid.size() * n : 0;
  lp.nodes = xgrid.nodes;
  lp.s_node_grid_index = xgrid.s_node_grid_index;

  lp.objective = Vector::Zero(lp.num_vars());
  for (long i = 0; i < measure.size(); ++i)
    lp.objective[xgrid.s_node_grid_index[i]] += measure.weights[i];

  append_constraint_rows(problem, xgrid, lp);
  return lp;
}

LPInstance build_feasibility_lp(const DelegationProblem& problem, const XGrid& xgrid,
                                const std::vector<std::pair<long, double>>& pins) {
  LPInstance lp;
  const int n = xgrid.dim();
  lp.value_vars = xgrid.size();
  lp.subgradient_vars = (n >= 2) ? xgrid.size() * n : 0;
  lp.nodes = xgrid.nodes;
  lp.s_node_grid_index = xgrid.s_node_grid_index;
  lp.objective = Vector::Zero(lp.num_vars());
  lp.pinned = pins;
  append_constraint_rows(problem, xgrid, lp);
  return lp;
}

LPSolution solve_lp(const LPInstance& instance, long max_pivots) {
  const long num_vars = instance.num_vars();
  const long num_rows = instance.num_rows();

  std::vector<double> pin_value(num_vars, 0.0);
  std::vector<char> is_pinned(num_vars, 0);
  double objective_constant = instance.objective_constant;
  for (const auto& [var, value] : instance.pinned) {
    if (var < 0 || var >= num_vars) throw std::invalid_argument("pinned variable out of range");
    is_pinned[var] = 1;
    pin_value[var] = value;
    objective_constant += instance.objective[var] * value;
  }

  std::vector<long> var_map(num_vars, -1);
  long free_vars = 0;
  for (long v = 0; v < num_vars; ++v)
    if (!is_pinned[v]) var_map[v] = free_vars++;

  LPSolution solution;
  solution.node_values = Vector::Zero(instance.value_vars);
  solution.subgradients = Vector::Zero(instance.subgradient_vars);
  solution.row_duals = Vector::Zero(num_rows);

  // Dual of (max w.z : M z <= q):  min q.y  s.t.  M^T y = w, y >= 0.
  SparseLP dual;
  dual.rows = free_vars;
  dual.cols = num_rows;
  dual.columns.resize(num_rows);
  dual.cost.resize(num_rows);
  dual.rhs.resize(free_vars);
  for (long v = 0; v < num_vars; ++v)
    if (!is_pinned[v]) dual.rhs[var_map[v]] = instance.objective[v];

  for (long r = 0; r < num_rows; ++r) {
    double rhs = instance.row_rhs[r];
    auto& col = dual.columns[r];
    for (const auto& [var, coef] : instance.rows[r]) {
      if (is_pinned[var])
        rhs -= coef * pin_value[var];
      else
        col.emplace_back(var_map[var], coef);
    }
    dual.cost[r] = rhs;
    if (col.empty() && rhs < -1e-9) {
      solution.status = LPStatus::infeasible;
      return solution;
    }
  }

  const SimplexResult res = simplex_solve(dual, max_pivots);
  solution.iterations = res.iterations;
  switch (res.status) {
    case SimplexStatus::optimal:
      solution.status = LPStatus::optimal;
      break;
    case SimplexStatus::unbounded:
      solution.status = LPStatus::infeasible;  // dual unbounded <=> primal infeasible
      return solution;
    case SimplexStatus::infeasible:
      solution.status = LPStatus::unbounded;  // dual infeasible <=> primal unbounded
      return solution;
    case SimplexStatus::iteration_limit:
      solution.status = LPStatus::iteration_limit;
      return solution;
  }

  solution.row_duals = res.x;

  Vector z(num_vars);
  for (long v = 0; v < num_vars; ++v)
    z[v] = is_pinned[v] ? pin_value[v] : res.duals[var_map[v]];
  solution.node_values = z.head(instance.value_vars);
  if (instance.subgradient_vars > 0) solution.subgradients = z.tail(instance.subgradient_vars);

  solution.s_node_values.resize(static_cast<long>(instance.s_node_grid_index.size()));
  for (long i = 0; i < solution.s_node_values.size(); ++i)
    solution.s_node_values[i] = solution.node_values[instance.s_node_grid_index[i]];

  CompensatedSum obj;
  for (long v = 0; v < num_vars; ++v)
    if (instance.objective[v] != 0.0) obj.add(instance.objective[v] * z[v]);
  solution.objective = obj.value() + instance.objective_constant;

  double max_violation = 0.0;
  CompensatedSum slack_sum;
  for (long r = 0; r < num_rows; ++r) {
    double activity = 0.0;
    for (const auto& [var, coef] : instance.rows[r]) activity += coef * z[var];
    const double violation = activity - instance.row_rhs[r];
    max_violation = std::max(max_violation, violation);
    slack_sum.add(solution.row_duals[r] * (instance.row_rhs[r] - activity));
  }
  const double scale = 1.0 + std::abs(solution.objective);
  solution.primal_residual = max_violation / scale;
  solution.cs_residual = std::abs(slack_sum.value()) / scale;
  return solution;
}

SignedMeasureGrid extract_dual_certificate(const LPInstance& instance,
                                           const LPSolution& solution) {
  if (solution.status != LPStatus::optimal)
    throw std::domain_error("dual certificate requires an optimal LP solution");

  const int n = static_cast<int>(instance.nodes.cols());
  std::vector<long> support;
  for (long i = 0; i < instance.value_vars; ++i) {
    const double atom = solution.row_duals[instance.bound_row_of_node[i]];
    if (atom < -1e-10) throw std::domain_error("negative dual multiplier on a bound row");
    if (atom >= 1e-10) support.push_back(i);
  }

  SignedMeasureGrid gamma;
  gamma.nodes.resize(static_cast<long>(support.size()), n);
  gamma.weights.resize(static_cast<long>(support.size()));
  gamma.normals = Matrix::Zero(static_cast<long>(support.size()), n);
  gamma.tags.assign(support.size(), SignedMeasureGrid::Tag::interior);
  for (long k = 0; k < static_cast<long>(support.size()); ++k) {
    gamma.nodes.row(k) = instance.nodes.row(support[k]);
    gamma.weights[k] = solution.row_duals[instance.bound_row_of_node[support[k]]];
  }

  CompensatedSum mass;
  std::vector<CompensatedSum> moment(n);
  for (long k = 0; k < gamma.size(); ++k) {
    mass.add(gamma.weights[k]);
    for (int d = 0; d < n; ++d) moment[d].add(gamma.weights[k] * gamma.nodes(k, d));
  }
  gamma.total_mass = mass.value();
  gamma.barycenter = Vector::Zero(n);
  if (std::abs(gamma.total_mass) > 1e-300)
    for (int d = 0; d < n; ++d) gamma.barycenter[d] = moment[d].value() / gamma.total_mass;
  return gamma;
}

double duality_gap(const DelegationProblem& problem, const LPSolution& solution,
                   const SignedMeasureGrid& measure, const SignedMeasureGrid& gamma) {
  CompensatedSum h_gamma;
  for (long k = 0; k < gamma.size(); ++k)
    h_gamma.add(gamma.weights[k] * first_best_payoff(problem, gamma.node(k)));
  const double u_mu = integrate(measure, solution.s_node_values);
  return h_gamma.value() - u_mu;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string var_name(const LPInstance& lp, long v) {
  if (v < lp.value_vars) return "u" + std::to_string(v);
  const long g = v - lp.value_vars;
  return "g" + std::to_string(g);
}

}  // namespace

void write_lp_format(const LPInstance& instance, std::ostream& out) {
  out << "\\ discretized delegation LP\n";
  out << "Maximize\n obj:";
  bool any = false;
  for (long v = 0; v < instance.num_vars(); ++v) {
    const double coef = instance.objective[v];
    if (coef == 0.0) continue;
    out << " " << (coef >= 0 ? "+" : "-") << " " << fmt(std::abs(coef)) << " "
        << var_name(instance, v);
    any = true;
  }
  if (!any) out << " 0 " << var_name(instance, 0);
  out << "\nSubject To\n";
  for (long r = 0; r < instance.num_rows(); ++r) {
    out << " c" << r << ":";
    for (const auto& [var, coef] : instance.rows[r])
      out << " " << (coef >= 0 ? "+" : "-") << " " << fmt(std::abs(coef)) << " "
          << var_name(instance, var);
    out << " <= " << fmt(instance.row_rhs[r]) << "\n";
  }
  out << "Bounds\n";
  for (long v = 0; v < instance.num_vars(); ++v) out << " " << var_name(instance, v) << " free\n";
  out << "End\n";
}

}  // namespace deleg
