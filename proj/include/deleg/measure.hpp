#pragma once

#include <vector>

#include "deleg/core.hpp"
#include "deleg/model.hpp"

namespace deleg {

struct GridSpec {
  int cells_per_axis = 101;  // interior cells (= interior nodes) per axis, >= 3
};

// Discretized signed measure: interior nodes carry nu x cell volume, boundary
// nodes carry the surface density x face element.  Corners get no weight for
// n >= 2 (their Hausdorff measure vanishes); in 1D the endpoints are atoms.
struct SignedMeasureGrid {
  enum class Tag { interior, boundary };

  Matrix nodes;              // one row per node
  Vector weights;            // signed
  std::vector<Tag> tags;
  Matrix normals;            // outward unit normal per boundary node, zero rows otherwise
  double total_mass = 0.0;
  Vector barycenter;         // first moment / total mass (zero vector if mass ~ 0)

  Box domain;
  int cells_per_axis = 0;
  Vector cell_widths;

  long size() const { return nodes.rows(); }
  Vector node(long i) const { return nodes.row(i).transpose(); }
};

// Interior density kappa f - div[(g - kappa s) f], expanded with the analytic
// Jacobian of g and gradient of f.  Throws std::domain_error off the interior.
double nu_interior(const DelegationProblem& problem, const Vector& s);

// Same formula without the interior check; the analytic continuation to the
// closed box, used by quadrature that needs values up to the faces.
double nu_interior_unchecked(const DelegationProblem& problem, const Vector& s);

// Boundary surface density [g(s) - kappa s].normal f(s).  The normal must be
// unit length to 1e-9 and s must lie on the boundary.
double nu_boundary(const DelegationProblem& problem, const Vector& s, const Vector& normal);

SignedMeasureGrid discretize_measure(const DelegationProblem& problem, const GridSpec& spec);

// Sum of weight_i * value_i with compensated accumulation.
double integrate(const SignedMeasureGrid& measure, const Vector& values);

// Midpoint coordinates lo + (i + 1/2) delta used by the discretizer; exposed
// so grids built elsewhere can share bit-identical coordinates.
std::vector<double> axis_midpoints(double lo, double hi, int cells);

}  // namespace deleg
