#include "deleg/boundary2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace deleg {

namespace {

double cross2(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

Matrix ccw_ordered(Matrix vertices) {
  const long v = vertices.rows();
  CompensatedSum twice_area;
  for (long i = 0; i < v; ++i) {
    const long j = (i + 1) % v;
    twice_area.add(cross2(vertices(i, 0), vertices(i, 1), vertices(j, 0), vertices(j, 1)));
  }
  if (twice_area.value() < 0.0) vertices = vertices.colwise().reverse().eval();
  return vertices;
}

}  // namespace

BoundaryCurve make_curve(Matrix vertices, long min_vertices) {
  if (vertices.cols() != 2) throw std::invalid_argument("boundary vertices must be planar");
  if (vertices.rows() < min_vertices)
    throw std::invalid_argument("boundary needs at least " + std::to_string(min_vertices) +
                                " vertices");
  vertices = ccw_ordered(std::move(vertices));

  const long v = vertices.rows();
  for (long i = 0; i < v; ++i) {
    const long j = (i + 1) % v;
    const long k = (i + 2) % v;
    const double cross = cross2(vertices(j, 0) - vertices(i, 0), vertices(j, 1) - vertices(i, 1),
                                vertices(k, 0) - vertices(j, 0), vertices(k, 1) - vertices(j, 1));
    if (cross < -1e-12) throw std::invalid_argument("boundary polygon is not convex");
  }

  BoundaryCurve curve;
  curve.vertices = std::move(vertices);
  curve.normals.resize(v, 2);
  for (long i = 0; i < v; ++i) {
    const long prev = (i + v - 1) % v;
    const long next = (i + 1) % v;
    Eigen::Vector2d e_in(curve.vertices(i, 0) - curve.vertices(prev, 0),
                         curve.vertices(i, 1) - curve.vertices(prev, 1));
    Eigen::Vector2d e_out(curve.vertices(next, 0) - curve.vertices(i, 0),
                          curve.vertices(next, 1) - curve.vertices(i, 1));
    Eigen::Vector2d n_in(e_in.y(), -e_in.x());
    Eigen::Vector2d n_out(e_out.y(), -e_out.x());
    n_in.normalize();
    n_out.normalize();
    Eigen::Vector2d n = n_in + n_out;
    const double len = n.norm();
    if (len < 1e-14) throw std::invalid_argument("degenerate vertex normal");
    curve.normals.row(i) = (n / len).transpose();
  }
  return curve;
}

BoundaryCurve circle_curve(const Vector& center, double radius, long num_vertices) {
  Matrix vertices(num_vertices, 2);
  for (long i = 0; i < num_vertices; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(num_vertices);
    vertices(i, 0) = center[0] + radius * std::cos(theta);
    vertices(i, 1) = center[1] + radius * std::sin(theta);
  }
  return make_curve(std::move(vertices));
}

bool curve_contains(const BoundaryCurve& curve, const Vector& point) {
  const long v = curve.size();
  for (long i = 0; i < v; ++i) {
    const long j = (i + 1) % v;
    const double cross = cross2(curve.vertices(j, 0) - curve.vertices(i, 0),
                                curve.vertices(j, 1) - curve.vertices(i, 1),
                                point[0] - curve.vertices(i, 0), point[1] - curve.vertices(i, 1));
    if (cross < -1e-12) return false;
  }
  return true;
}

NearestPoint nearest_on_curve(const BoundaryCurve& curve, const Vector& point) {
  const long v = curve.size();
  NearestPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (long i = 0; i < v; ++i) {
    const long j = (i + 1) % v;
    const Eigen::Vector2d a(curve.vertices(i, 0), curve.vertices(i, 1));
    const Eigen::Vector2d b(curve.vertices(j, 0), curve.vertices(j, 1));
    const Eigen::Vector2d ab = b - a;
    const Eigen::Vector2d ap(point[0] - a.x(), point[1] - a.y());
    const double len2 = ab.squaredNorm();
    const double t = (len2 > 0.0) ? std::clamp(ap.dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Eigen::Vector2d proj = a + t * ab;
    const double dist = (Eigen::Vector2d(point[0], point[1]) - proj).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.point = Vector(2);
      best.point << proj.x(), proj.y();
      best.nearest_vertex = (t <= 0.5) ? i : j;
      best.edge = i;
      best.param = t;
    }
  }
  return best;
}

double curve_area(const BoundaryCurve& curve) {
  const long v = curve.size();
  CompensatedSum twice_area;
  for (long i = 0; i < v; ++i) {
    const long j = (i + 1) % v;
    twice_area.add(cross2(curve.vertices(i, 0), curve.vertices(i, 1), curve.vertices(j, 0),
                          curve.vertices(j, 1)));
  }
  return 0.5 * twice_area.value();
}

namespace {

// Convex hull, Andrew monotone chain; returns CCW vertices without collinear
// points.
Matrix convex_hull(const Matrix& points) {
  std::vector<Eigen::Vector2d> pts(points.rows());
  for (long i = 0; i < points.rows(); ++i) pts[i] = Eigen::Vector2d(points(i, 0), points(i, 1));
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return a == b; }),
            pts.end());
  const long k = static_cast<long>(pts.size());
  if (k < 3) throw std::invalid_argument("degenerate point set for convex hull");

  std::vector<Eigen::Vector2d> hull(2 * k);
  long h = 0;
  for (long i = 0; i < k; ++i) {
    while (h >= 2 && cross2(hull[h - 1].x() - hull[h - 2].x(), hull[h - 1].y() - hull[h - 2].y(),
                            pts[i].x() - hull[h - 1].x(), pts[i].y() - hull[h - 1].y()) <= 0.0)
      --h;
    hull[h++] = pts[i];
  }
  const long lower_size = h + 1;
  for (long i = k - 2; i >= 0; --i) {
    while (h >= lower_size &&
           cross2(hull[h - 1].x() - hull[h - 2].x(), hull[h - 1].y() - hull[h - 2].y(),
                  pts[i].x() - hull[h - 1].x(), pts[i].y() - hull[h - 1].y()) <= 0.0)
      --h;
    hull[h++] = pts[i];
  }
  Matrix out(h - 1, 2);
  for (long i = 0; i < h - 1; ++i) out.row(i) << hull[i].x(), hull[i].y();
  return out;
}

// Intersection of the ray origin + r u (r > 0) with the polygon boundary.
double ray_exit(const Matrix& polygon, const Eigen::Vector2d& origin,
                const Eigen::Vector2d& u) {
  const long v = polygon.rows();
  double best = -1.0;
  for (long i = 0; i < v; ++i) {
    const long j = (i + 1) % v;
    const Eigen::Vector2d p(polygon(i, 0), polygon(i, 1));
    const Eigen::Vector2d q(polygon(j, 0), polygon(j, 1));
    const Eigen::Vector2d e = q - p;
    const double denom = cross2(u.x(), u.y(), e.x(), e.y());
    if (std::abs(denom) < 1e-15) continue;
    const Eigen::Vector2d w = p - origin;
    const double r = cross2(w.x(), w.y(), e.x(), e.y()) / denom;
    const double s = cross2(w.x(), w.y(), u.x(), u.y()) / denom;
    if (r > 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::max(best, r);
  }
  if (best <= 0.0) throw SolverError("boundary resampling ray missed the polygon", 0.0);
  return best;
}

struct RayAtom {
  double t;
  double w;
};

}  // namespace

BoundarySolveReport solve_boundary(const DelegationProblem& problem,
                                   const BoundaryCurve& initial,
                                   const BoundarySolveOptions& opts) {
  if (problem.n != 2) throw std::domain_error("boundary solver is two-dimensional");
  if (problem.density.kind != DensitySpec::Kind::uniform)
    throw std::domain_error("boundary solver requires a uniform density");
  if (problem.bias.kind != BiasSpec::Kind::linear || problem.bias.alpha <= 0.0 ||
      problem.bias.alpha >= problem.kappa)
    throw std::domain_error("boundary solver requires g = alpha s with alpha in (0, kappa)");
  if (problem.curvature.kind != CurvatureSpec::Kind::quadratic)
    throw std::domain_error("boundary solver requires quadratic curvature");
  const Box& box = problem.state_space;
  if (std::abs(box.lo[0] + box.hi[0]) > 1e-12 || std::abs(box.lo[1] + box.hi[1]) > 1e-12 ||
      std::abs((box.hi[0] - box.lo[0]) - (box.hi[1] - box.lo[1])) > 1e-12)
    throw std::domain_error("boundary solver requires a centered square state space");
  for (long i = 0; i < initial.size(); ++i)
    if (!box.strictly_contains(initial.vertex(i)))
      throw std::domain_error("initial curve must lie strictly inside the state space");

  const SignedMeasureGrid measure = discretize_measure(problem, {opts.cells_per_axis});
  const long num_vertices = initial.size();
  const Eigen::Vector2d center(box.center()[0], box.center()[1]);

  BoundarySolveReport report;
  report.curve = initial;
  report.residuals.assign(num_vertices, 0.0);

  for (int sweep = 0; sweep < opts.max_iters; ++sweep) {
    // Disintegrate the measure onto the vertex normal rays: signed distance to
    // the polygon, weight split linearly between the projection edge's two
    // vertices so bins vary continuously as the curve moves.
    std::vector<std::vector<RayAtom>> bins(num_vertices);
    for (long i = 0; i < measure.size(); ++i) {
      const Vector node = measure.node(i);
      const NearestPoint np = nearest_on_curve(report.curve, node);
      const double t = curve_contains(report.curve, node) ? -np.distance : np.distance;
      const long a = np.edge;
      const long b = (np.edge + 1) % num_vertices;
      if (np.param < 1.0)
        bins[a].push_back({t, measure.weights[i] * (1.0 - np.param)});
      if (np.param > 0.0)
        bins[b].push_back({t, measure.weights[i] * np.param});
    }

    report.max_residual = 0.0;
    std::vector<double> moves(num_vertices, 0.0);
    for (long v = 0; v < num_vertices; ++v) {
      CompensatedSum moment, variation;
      for (const auto& atom : bins[v]) {
        if (atom.t <= 0.0) continue;
        moment.add(atom.w * atom.t);
        variation.add(std::abs(atom.w));
      }
      // Variation-normalized first moment: the balance-point offset of the
      // ray measure in length units, comparable across vertex counts and
      // grids.  The same quantity is the update step: its zero is exactly the
      // equality condition, and normalizing by total variation rather than
      // net mass keeps thin near-corner bins from exploding the step.
      report.residuals[v] =
          variation.value() > 0.0 ? moment.value() / variation.value() : 0.0;
      report.max_residual = std::max(report.max_residual, std::abs(report.residuals[v]));
      moves[v] = report.residuals[v];
    }

    report.iterations = sweep;
    if (report.max_residual <= opts.tol) {
      report.converged = true;
      return report;
    }

    // Smooth the move field with a symmetric three-point kernel and cap the
    // step at a couple of grid cells: per-vertex roots are noisy at bin
    // granularity and raw updates would fold the polygon.
    const double step_cap = 2.0 * measure.cell_widths[0];
    std::vector<double> smoothed(num_vertices);
    for (long v = 0; v < num_vertices; ++v) {
      const long prev = (v + num_vertices - 1) % num_vertices;
      const long next = (v + 1) % num_vertices;
      smoothed[v] = 0.25 * moves[prev] + 0.5 * moves[v] + 0.25 * moves[next];
      smoothed[v] = std::clamp(smoothed[v], -step_cap, step_cap);
    }

    Matrix moved = report.curve.vertices;
    for (long v = 0; v < num_vertices; ++v) {
      moved.row(v) += opts.damping * smoothed[v] * report.curve.normals.row(v);
      moved(v, 0) = std::clamp(moved(v, 0), box.lo[0] + opts.boundary_margin,
                               box.hi[0] - opts.boundary_margin);
      moved(v, 1) = std::clamp(moved(v, 1), box.lo[1] + opts.boundary_margin,
                               box.hi[1] - opts.boundary_margin);
    }

    // Re-convexify and resample at fixed angles about the center so vertex
    // spacing stays even and symmetric sweeps stay symmetric.
    const Matrix hull = convex_hull(moved);
    Matrix resampled(num_vertices, 2);
    for (long v = 0; v < num_vertices; ++v) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(v) /
                           static_cast<double>(num_vertices);
      const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
      const double r = ray_exit(hull, center, u);
      resampled.row(v) = (center + r * u).transpose();
    }
    report.curve = make_curve(std::move(resampled), num_vertices);
  }

  report.iterations = opts.max_iters;
  report.converged = report.max_residual <= opts.tol;
  return report;
}

}  // namespace deleg
