#pragma once

#include <vector>

#include "deleg/core.hpp"
#include "deleg/measure.hpp"
#include "deleg/model.hpp"

namespace deleg {

// Closed convex polygon in the plane, counter-clockwise, with outward vertex
// normals taken from the adjacent-edge bisector.
struct BoundaryCurve {
  Matrix vertices;  // V x 2
  Matrix normals;   // V x 2, unit rows

  long size() const { return vertices.rows(); }
  Vector vertex(long i) const { return vertices.row(i).transpose(); }
  Vector normal(long i) const { return normals.row(i).transpose(); }
};

// Validates convexity (positive cross products) and vertex count, then fills
// in the normals.  min_vertices defaults to the representation invariant.
BoundaryCurve make_curve(Matrix vertices, long min_vertices = 16);

BoundaryCurve circle_curve(const Vector& center, double radius, long num_vertices);

bool curve_contains(const BoundaryCurve& curve, const Vector& point);

struct NearestPoint {
  Vector point;
  double distance = 0.0;
  long nearest_vertex = -1;  // curve vertex closest to the projection
  long edge = -1;            // edge carrying the projection
  double param = 0.0;        // position along that edge in [0, 1]
};

NearestPoint nearest_on_curve(const BoundaryCurve& curve, const Vector& point);

double curve_area(const BoundaryCurve& curve);

struct BoundarySolveOptions {
  int max_iters = 100;
  double tol = 5e-3;          // max |first moment| of any vertex ray
  int cells_per_axis = 129;   // measure grid used for disintegration
  double damping = 0.25;
  double boundary_margin = 1e-4;  // vertices stay this far inside S
};

struct BoundarySolveReport {
  BoundaryCurve curve;
  bool converged = false;
  int iterations = 0;
  double max_residual = 0.0;
  std::vector<double> residuals;  // per-vertex first moments at the last sweep
};

// Fixed-point iteration for the optimal convex delegation boundary: each sweep
// bins the measure onto vertex normal rays by nearest-point projection and
// moves every vertex along its held normal to the exact zero of the ray's
// first moment, then re-convexifies and resamples at fixed angles.
// Requires a 2D problem with uniform density, linear bias with alpha in
// (0, kappa), quadratic curvature, and a centered square state space.
BoundarySolveReport solve_boundary(const DelegationProblem& problem,
                                   const BoundaryCurve& initial,
                                   const BoundarySolveOptions& opts = {});

}  // namespace deleg
