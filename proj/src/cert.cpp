#include "deleg/cert.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace deleg {

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (b - a <= 0.0) return 0.0;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  CompensatedSum acc;
  acc.add(f(a));
  acc.add(f(b));
  for (int i = 1; i < panels; ++i) acc.add(((i % 2) ? 4.0 : 2.0) * f(a + i * h));
  return acc.value() * h / 3.0;
}

double nu_1d(const DelegationProblem& p, double x) { return nu_interior_unchecked(p, vec1(x)); }

double lower_atom(const DelegationProblem& p) {
  return nu_boundary(p, vec1(p.state_space.lo[0]), vec1(-1.0));
}

double upper_atom(const DelegationProblem& p) {
  return nu_boundary(p, vec1(p.state_space.hi[0]), vec1(1.0));
}

// integral over [s, s_hi] of (x - s) nu(x) dx plus the boundary atom term:
// the upper tail condition as a function of its lower limit.
double upper_tail(const DelegationProblem& p, double s, int panels) {
  const double s_hi = p.state_space.hi[0];
  double value = (s_hi - s) * upper_atom(p);
  if (s < s_hi)
    value += simpson([&](double x) { return (x - s) * nu_1d(p, x); }, s, s_hi, panels);
  return value;
}

double lower_tail(const DelegationProblem& p, double s, int panels) {
  const double s_lo = p.state_space.lo[0];
  double value = (s - s_lo) * lower_atom(p);
  if (s > s_lo)
    value += simpson([&](double x) { return (s - x) * nu_1d(p, x); }, s_lo, s, panels);
  return value;
}

void require_1d(const DelegationProblem& p, const char* what) {
  if (p.n != 1) throw std::domain_error(std::string(what) + " requires a one-dimensional problem");
}

}  // namespace

PoolingPartition extract_partition(const DelegationProblem& problem, const Menu& menu,
                                   const SignedMeasureGrid& measure, const CertOptions& opts) {
  validate_menu(menu);
  const long num_nodes = measure.size();

  std::vector<long> piece_of_node(num_nodes);
  std::vector<char> active(menu.pieces.size(), 0);
  for (long i = 0; i < num_nodes; ++i) {
    piece_of_node[i] = menu_eval(menu, measure.node(i)).second;
    active[piece_of_node[i]] = 1;
  }

  std::vector<long> active_pieces;
  for (size_t k = 0; k < menu.pieces.size(); ++k)
    if (active[k]) active_pieces.push_back(static_cast<long>(k));
  if (problem.n == 1) {
    std::sort(active_pieces.begin(), active_pieces.end(), [&](long k, long l) {
      return menu.pieces[k].a[0] < menu.pieces[l].a[0];
    });
  }

  PoolingPartition partition;
  partition.regions.resize(active_pieces.size());
  std::vector<long> region_of_piece(menu.pieces.size(), -1);
  for (size_t r = 0; r < active_pieces.size(); ++r) {
    const long k = active_pieces[r];
    region_of_piece[k] = static_cast<long>(r);
    PoolingRegion& region = partition.regions[r];
    region.piece = k;
    region.a = menu.pieces[k].a;
    region.c = menu.pieces[k].c;

    // A piece is tangent to h at -grad b(a); it touches the indirect utility
    // exactly when the piece carries no burn.
    const Vector candidate = -problem.curvature_grad_b(region.a);
    const double h = first_best_payoff(problem, candidate);
    const double gap = std::abs(region.a.dot(candidate) + region.c - h);
    if (gap <= opts.touch_tol * (1.0 + std::abs(h))) region.touch_point = candidate;
  }

  partition.region_of_node.resize(num_nodes);
  for (long i = 0; i < num_nodes; ++i) {
    partition.region_of_node[i] = region_of_piece[piece_of_node[i]];
    partition.regions[partition.region_of_node[i]].node_indices.push_back(i);
  }

  if (problem.n == 1) {
    // Region bounds from crossing abscissae of slope-adjacent active pieces.
    const double s_lo = problem.state_space.lo[0];
    const double s_hi = problem.state_space.hi[0];
    double left = s_lo;
    for (size_t r = 0; r + 1 < partition.regions.size(); ++r) {
      const auto& cur = menu.pieces[partition.regions[r].piece];
      const auto& nxt = menu.pieces[partition.regions[r + 1].piece];
      double cross = (cur.c - nxt.c) / (nxt.a[0] - cur.a[0]);
      cross = std::clamp(cross, left, s_hi);
      partition.regions[r].lo = left;
      partition.regions[r].hi = cross;
      left = cross;
    }
    partition.regions.back().lo = left;
    partition.regions.back().hi = s_hi;
  }
  return partition;
}

MajorizationCheck check_majorization_1d(const Ray1DMeasure& ray, double delta_mass,
                                        double delta_location, double tol) {
  MajorizationCheck check;
  CompensatedSum mass, moment;
  for (size_t i = 0; i < ray.weights.size(); ++i) {
    mass.add(ray.weights[i]);
    moment.add(ray.weights[i] * ray.abscissae[i]);
  }
  check.mass = mass.value();
  check.mass_residual = std::abs(check.mass - delta_mass);
  check.mean_residual = std::abs(moment.value() - delta_mass * delta_location);

  std::vector<double> cuts = ray.abscissae;
  cuts.push_back(delta_location);
  std::sort(cuts.begin(), cuts.end());
  check.wedge_residuals.reserve(cuts.size());
  check.worst_wedge = 0.0;
  for (double t : cuts) {
    CompensatedSum wedge;
    for (size_t i = 0; i < ray.weights.size(); ++i)
      if (ray.abscissae[i] > t) wedge.add(ray.weights[i] * (ray.abscissae[i] - t));
    const double residual = wedge.value() - delta_mass * std::max(delta_location - t, 0.0);
    check.wedge_residuals.push_back(residual);
    check.worst_wedge = std::max(check.worst_wedge, residual);
  }
  check.pass = check.mass_residual <= tol && check.mean_residual <= tol &&
               check.worst_wedge <= tol;
  return check;
}

MajorizationCheck check_convex_dominance_1d(const std::vector<double>& lower_x,
                                            const std::vector<double>& lower_w,
                                            const std::vector<double>& upper_x,
                                            const std::vector<double>& upper_w, double tol) {
  MajorizationCheck check;
  CompensatedSum mass_lo, mass_up, mom_lo, mom_up;
  for (size_t i = 0; i < lower_x.size(); ++i) {
    mass_lo.add(lower_w[i]);
    mom_lo.add(lower_w[i] * lower_x[i]);
  }
  for (size_t i = 0; i < upper_x.size(); ++i) {
    mass_up.add(upper_w[i]);
    mom_up.add(upper_w[i] * upper_x[i]);
  }
  check.mass = mass_lo.value();
  check.mass_residual = std::abs(mass_lo.value() - mass_up.value());
  check.mean_residual = std::abs(mom_lo.value() - mom_up.value());

  std::vector<double> cuts = lower_x;
  cuts.insert(cuts.end(), upper_x.begin(), upper_x.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  check.worst_wedge = 0.0;
  for (double t : cuts) {
    CompensatedSum diff;
    for (size_t i = 0; i < lower_x.size(); ++i)
      if (lower_x[i] > t) diff.add(lower_w[i] * (lower_x[i] - t));
    for (size_t i = 0; i < upper_x.size(); ++i)
      if (upper_x[i] > t) diff.add(-upper_w[i] * (upper_x[i] - t));
    check.wedge_residuals.push_back(diff.value());
    check.worst_wedge = std::max(check.worst_wedge, diff.value());
  }
  check.pass = check.mass_residual <= tol && check.mean_residual <= tol &&
               check.worst_wedge <= tol;
  return check;
}

namespace {

struct RayFragment {
  double abscissa;
  double weight;
};

void sort_and_merge(std::vector<RayFragment>& fragments) {
  std::sort(fragments.begin(), fragments.end(),
            [](const RayFragment& a, const RayFragment& b) { return a.abscissa < b.abscissa; });
  std::vector<RayFragment> merged;
  for (const auto& f : fragments) {
    if (!merged.empty() && f.abscissa - merged.back().abscissa <= 1e-15)
      merged.back().weight += f.weight;
    else
      merged.push_back(f);
  }
  fragments.swap(merged);
}

// Conditional measures per region for a 1D partition: interior cells are split
// exactly at region boundaries (fragment abscissa at the fragment midpoint),
// boundary atoms go to the region containing their coordinate, so the bins
// reproduce the discretized measure exactly.
std::vector<std::vector<RayFragment>> conditional_measures_1d(
    const PoolingPartition& partition, const SignedMeasureGrid& measure) {
  const double delta = measure.cell_widths[0];
  std::vector<std::vector<RayFragment>> bins(partition.regions.size());

  for (long i = 0; i < measure.size(); ++i) {
    const double x = measure.nodes(i, 0);
    const double w = measure.weights[i];
    if (measure.tags[i] == SignedMeasureGrid::Tag::boundary) {
      for (size_t r = 0; r < partition.regions.size(); ++r) {
        const auto& region = partition.regions[r];
        const bool last = (r + 1 == partition.regions.size());
        if (x >= region.lo && (x < region.hi || (last && x <= region.hi))) {
          bins[r].push_back({x, w});
          break;
        }
      }
    } else {
      const double cell_lo = x - 0.5 * delta;
      const double cell_hi = x + 0.5 * delta;
      for (size_t r = 0; r < partition.regions.size(); ++r) {
        const auto& region = partition.regions[r];
        const double lo = std::max(cell_lo, region.lo);
        const double hi = std::min(cell_hi, region.hi);
        if (hi - lo > 1e-15)
          bins[r].push_back({0.5 * (lo + hi), w * (hi - lo) / delta});
      }
    }
  }
  for (auto& bin : bins) sort_and_merge(bin);
  return bins;
}

}  // namespace

CertificateReport check_optimality_certificate(const DelegationProblem& problem,
                                               const Menu& menu,
                                               const SignedMeasureGrid& measure,
                                               const CertOptions& opts) {
  const PoolingPartition partition = extract_partition(problem, menu, measure, opts);
  CertificateReport report;
  report.pass = true;

  std::vector<std::vector<RayFragment>> bins;
  if (problem.n == 1) bins = conditional_measures_1d(partition, measure);

  const double cell_diag = measure.cell_widths.size() > 0 ? measure.cell_widths.norm() : 0.0;

  for (size_t r = 0; r < partition.regions.size(); ++r) {
    const PoolingRegion& region = partition.regions[r];
    RegionCheck rc;
    rc.region = static_cast<long>(r);
    rc.has_touch = region.touch_point.has_value();
    rc.singleton = region.node_indices.size() <= 1;

    Ray1DMeasure ray;
    double delta_location = 0.0;
    if (problem.n == 1) {
      ray.origin = vec1(region.lo);
      ray.direction = vec1(1.0);
      for (const auto& f : bins[r]) {
        ray.abscissae.push_back(f.abscissa);
        ray.weights.push_back(f.weight);
      }
      delta_location = rc.has_touch ? (*region.touch_point)[0] : region.lo;
    } else {
      // Project the region's nodes onto a ray through the touch point; regions
      // that are not one-dimensional within a cell-diagonal allowance are not
      // supported by this reduction.
      Vector origin;
      if (rc.has_touch) {
        origin = *region.touch_point;
      } else {
        Vector centroid = Vector::Zero(problem.n);
        for (long i : region.node_indices) centroid += measure.node(i);
        centroid /= static_cast<double>(region.node_indices.size());
        origin = centroid;
      }
      Vector direction = Vector::Zero(problem.n);
      double farthest = 0.0;
      for (long i : region.node_indices) {
        const Vector offset = measure.node(i) - origin;
        if (offset.norm() > farthest) {
          farthest = offset.norm();
          direction = offset;
        }
      }
      if (farthest > 1e-14) direction.normalize();
      else direction = Vector::Unit(problem.n, 0);

      double worst_transverse = 0.0;
      std::vector<RayFragment> fragments;
      for (long i : region.node_indices) {
        const Vector offset = measure.node(i) - origin;
        const double t = offset.dot(direction);
        worst_transverse = std::max(worst_transverse, (offset - t * direction).norm());
        fragments.push_back({t, measure.weights[i]});
      }
      if (region.node_indices.size() > 1 &&
          worst_transverse > opts.transverse_slack * cell_diag)
        throw std::domain_error(
            "pooling region is neither a singleton nor a one-dimensional ray; "
            "only ray regions are supported by the certificate reduction");
      sort_and_merge(fragments);
      ray.origin = origin;
      ray.direction = direction;
      for (const auto& f : fragments) {
        ray.abscissae.push_back(f.abscissa);
        ray.weights.push_back(f.weight);
      }
      delta_location = 0.0;  // touch point is the ray origin
    }

    CompensatedSum mass;
    for (double w : ray.weights) mass.add(w);
    rc.mass = mass.value();

    const double delta_mass = rc.has_touch ? rc.mass : 0.0;
    const MajorizationCheck mc = check_majorization_1d(ray, delta_mass, delta_location, opts.tol);

    const bool mass_ok = rc.mass >= -opts.tol;
    const bool touch_ok = rc.has_touch || std::abs(rc.mass) <= opts.tol;
    rc.pass = mass_ok && touch_ok && mc.pass;
    rc.residual = std::max({mc.mean_residual, mc.worst_wedge, std::max(0.0, -rc.mass),
                            rc.has_touch ? 0.0 : std::abs(rc.mass)});
    if (!mass_ok) rc.note = "negative region mass";
    else if (!touch_ok) rc.note = "positive mass but no touch point";
    else if (!mc.pass) rc.note = "convex dominance fails";

    report.worst_residual = std::max(report.worst_residual, rc.residual);
    report.pass = report.pass && rc.pass;
    report.regions.push_back(std::move(rc));
  }
  return report;
}

IntervalReport check_interval_delegation(const DelegationProblem& problem, double s1, double s2,
                                         const CertOptions& opts) {
  require_1d(problem, "interval delegation check");
  const double s_lo = problem.state_space.lo[0];
  const double s_hi = problem.state_space.hi[0];
  if (!(s1 < s2) || s1 < s_lo - 1e-12 || s2 > s_hi + 1e-12)
    throw std::domain_error("malformed delegation interval");
  s1 = std::clamp(s1, s_lo, s_hi);
  s2 = std::clamp(s2, s_lo, s_hi);

  IntervalReport report;
  report.s1 = s1;
  report.s2 = s2;

  // nu >= 0 on [s1, s2], including the boundary atoms if reached.
  report.min_nu = std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.eval_points; ++i) {
    const double x = s1 + (s2 - s1) * i / (opts.eval_points - 1);
    report.min_nu = std::min(report.min_nu, nu_1d(problem, x));
  }
  if (s1 <= s_lo + 1e-12) report.min_nu = std::min(report.min_nu, lower_atom(problem));
  if (s2 >= s_hi - 1e-12) report.min_nu = std::min(report.min_nu, upper_atom(problem));

  // Nonpositive upper tails with equality at s2.
  report.upper_equality = upper_tail(problem, s2, opts.quad_panels);
  report.upper_tail_worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.eval_points; ++i) {
    const double s = s2 + (s_hi - s2) * i / (opts.eval_points - 1);
    report.upper_tail_worst = std::max(report.upper_tail_worst,
                                       upper_tail(problem, s, opts.quad_panels));
  }

  // Mirrored lower tails with equality at s1.
  report.lower_equality = lower_tail(problem, s1, opts.quad_panels);
  report.lower_tail_worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.eval_points; ++i) {
    const double s = s_lo + (s1 - s_lo) * i / (opts.eval_points - 1);
    report.lower_tail_worst = std::max(report.lower_tail_worst,
                                       lower_tail(problem, s, opts.quad_panels));
  }

  const bool cond_i = report.min_nu >= -opts.tol;
  const bool cond_ii = report.upper_tail_worst <= opts.tol &&
                       std::abs(report.upper_equality) <= opts.tol;
  const bool cond_iii = report.lower_tail_worst <= opts.tol &&
                        std::abs(report.lower_equality) <= opts.tol;
  report.pass = cond_i && cond_ii && cond_iii;
  if (!cond_i) report.note = "nu negative inside the interval";
  else if (!cond_ii) report.note = "upper tail condition fails";
  else if (!cond_iii) report.note = "lower tail condition fails";
  return report;
}

namespace {

// Scan values of a residual on a grid, assert the scanned prefix is monotone
// non-increasing, and bisect the bracketing pair.  Returns the clamp value
// when the residual never turns negative.
double root_scan(const std::function<double(double)>& residual, const std::vector<double>& grid,
                 double clamp_value, bool* degenerate) {
  *degenerate = false;
  std::vector<double> values(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) values[i] = residual(grid[i]);

  if (values.front() < 0.0) {
    *degenerate = true;
    return grid.front();
  }
  size_t first_negative = grid.size();
  for (size_t i = 0; i < grid.size(); ++i) {
    if (values[i] < 0.0) {
      first_negative = i;
      break;
    }
  }
  if (first_negative == grid.size()) return clamp_value;

  const double slack = 1e-9 * (1.0 + std::abs(values.front()));
  for (size_t i = 1; i <= first_negative; ++i)
    if (values[i] > values[i - 1] + slack)
      throw std::domain_error("tail residual is not monotone on the scan grid");

  // Bracket with residual(a) >= 0 > residual(b); the grid may run either way.
  double a = grid[first_negative - 1];
  double b = grid[first_negative];
  for (int iter = 0; iter < 200 && std::abs(b - a) > 1e-14; ++iter) {
    const double mid = 0.5 * (a + b);
    if (residual(mid) >= 0.0)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

OptimalInterval find_optimal_interval(const DelegationProblem& problem, const CertOptions& opts) {
  require_1d(problem, "optimal interval search");
  const double s_lo = problem.state_space.lo[0];
  const double s_hi = problem.state_space.hi[0];

  // {nu >= 0} must be an interval on the scan grid (endpoints use the atoms).
  const int points = opts.eval_points;
  std::vector<double> coords(points + 2);
  std::vector<double> values(points + 2);
  coords.front() = s_lo;
  values.front() = lower_atom(problem);
  coords.back() = s_hi;
  values.back() = upper_atom(problem);
  for (int i = 0; i < points; ++i) {
    coords[i + 1] = s_lo + (s_hi - s_lo) * (i + 0.5) / points;
    values[i + 1] = nu_1d(problem, coords[i + 1]);
  }
  long first_pos = -1, last_pos = -1;
  long positives = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= -opts.tol) {
      if (first_pos < 0) first_pos = static_cast<long>(i);
      last_pos = static_cast<long>(i);
      ++positives;
    }
  }
  if (positives == 0)
    throw std::domain_error("nu is negative everywhere; no interval candidate");
  if (last_pos - first_pos + 1 != positives)
    throw std::domain_error("{nu >= 0} is not an interval on the scan grid");
  const double pos_lo = coords[first_pos];
  const double pos_hi = coords[last_pos];

  OptimalInterval out;

  // Upper endpoint: root of the equality residual scanned from the left edge
  // of the positive region.
  {
    auto residual = [&](double t) { return upper_tail(problem, t, opts.quad_panels); };
    std::vector<double> grid(opts.eval_points);
    for (int i = 0; i < opts.eval_points; ++i)
      grid[i] = pos_lo + (s_hi - pos_lo) * i / (opts.eval_points - 1);
    bool degenerate = false;
    out.s2 = root_scan(residual, grid, s_hi, &degenerate);
    out.degenerate = out.degenerate || degenerate;
  }

  // Lower endpoint: mirrored scan, walking down from the right edge.
  {
    auto residual = [&](double t) { return lower_tail(problem, t, opts.quad_panels); };
    std::vector<double> grid(opts.eval_points);
    for (int i = 0; i < opts.eval_points; ++i)
      grid[i] = pos_hi - (pos_hi - s_lo) * i / (opts.eval_points - 1);
    bool degenerate = false;
    out.s1 = root_scan(residual, grid, s_lo, &degenerate);
    out.degenerate = out.degenerate || degenerate;
  }

  if (out.degenerate || !(out.s1 < out.s2)) {
    out.degenerate = true;
    out.report.s1 = out.s1;
    out.report.s2 = out.s2;
    out.report.note = "residual sign indicates full pooling; no interior interval";
    return out;
  }
  out.report = check_interval_delegation(problem, out.s1, out.s2, opts);
  return out;
}

LogconcaveReport check_logconcave_bias(const DelegationProblem& problem,
                                       const CertOptions& opts) {
  require_1d(problem, "logconcave bias check");
  if (std::abs(problem.kappa - 1.0) > 1e-12)
    throw std::domain_error("logconcave bias check requires kappa = 1");
  if (problem.bias.kind != BiasSpec::Kind::affine)
    throw std::domain_error("logconcave bias check requires a constant bias g(s) = s + beta");

  LogconcaveReport report;
  const double s_lo = problem.state_space.lo[0];
  const double s_hi = problem.state_space.hi[0];
  const int points = std::max(opts.eval_points, 16);
  const double step = (s_hi - s_lo) / (points + 1);

  report.worst_convexity = -std::numeric_limits<double>::infinity();
  bool positive = true;
  std::vector<double> logf(points);
  for (int i = 0; i < points; ++i) {
    const double f = problem.density_at(vec1(s_lo + (i + 1) * step));
    if (f <= 0.0) {
      positive = false;
      break;
    }
    logf[i] = std::log(f);
  }
  if (positive) {
    for (int i = 1; i + 1 < points; ++i) {
      const double second = (logf[i - 1] - 2.0 * logf[i] + logf[i + 1]) / (step * step);
      report.worst_convexity = std::max(report.worst_convexity, second);
    }
    report.hypothesis_holds = report.worst_convexity <= opts.tol;
  }
  if (report.hypothesis_holds) report.interval = find_optimal_interval(problem, opts);
  return report;
}

ConvexDelegationReport check_convex_delegation(const DelegationProblem& problem,
                                               const BoundaryCurve& boundary,
                                               const ConvexDelegationOptions& opts) {
  if (problem.n != 2) throw std::domain_error("convex delegation check is two-dimensional");
  if (problem.curvature.kind != CurvatureSpec::Kind::quadratic)
    throw std::domain_error("convex delegation check requires quadratic curvature");

  // Cross-product sign test; make_curve enforces this for curves built here,
  // but the caller may hand us an arbitrary polygon.
  const long num_vertices = boundary.size();
  for (long i = 0; i < num_vertices; ++i) {
    const Vector a = boundary.vertex(i);
    const Vector b = boundary.vertex((i + 1) % num_vertices);
    const Vector c = boundary.vertex((i + 2) % num_vertices);
    const double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
    if (cross < -1e-12) throw std::domain_error("delegation boundary is not convex");
  }
  for (long i = 0; i < num_vertices; ++i) {
    const Vector v = boundary.vertex(i);
    if (opts.require_strict_interior ? !problem.state_space.strictly_contains(v)
                                     : !problem.state_space.contains(v, 1e-9))
      throw std::domain_error("delegation boundary leaves the state space");
  }

  const SignedMeasureGrid measure = discretize_measure(problem, {opts.cells_per_axis});

  ConvexDelegationReport report;
  report.min_nu = std::numeric_limits<double>::infinity();
  report.equality_residuals.assign(num_vertices, 0.0);
  report.tail_residuals.assign(num_vertices, 0.0);

  std::vector<std::vector<RayFragment>> bins(num_vertices);
  for (long i = 0; i < measure.size(); ++i) {
    const Vector node = measure.node(i);
    if (curve_contains(boundary, node)) {
      const double nu = measure.tags[i] == SignedMeasureGrid::Tag::boundary
                            ? nu_boundary(problem, node, measure.normals.row(i).transpose())
                            : nu_interior(problem, node);
      report.min_nu = std::min(report.min_nu, nu);
      continue;
    }
    const NearestPoint np = nearest_on_curve(boundary, node);
    if (np.distance <= 1e-12) continue;
    // Weights split linearly between the projection edge's endpoints; the
    // disintegration stays consistent (shares sum to the node weight) and the
    // bins vary continuously with the node position, which keeps the residual
    // noise below the certificate tolerance at desk-scale grids.
    const long a = np.edge;
    const long b = (np.edge + 1) % num_vertices;
    if (np.param < 1.0) bins[a].push_back({np.distance, measure.weights[i] * (1.0 - np.param)});
    if (np.param > 0.0) bins[b].push_back({np.distance, measure.weights[i] * np.param});
  }

  report.min_ray_mass = std::numeric_limits<double>::infinity();
  bool tails_ok = true, equalities_ok = true, mass_ok = true;
  for (long v = 0; v < num_vertices; ++v) {
    sort_and_merge(bins[v]);
    CompensatedSum mass, moment, variation;
    for (const auto& f : bins[v]) {
      mass.add(f.weight);
      moment.add(f.weight * f.abscissa);
      variation.add(std::abs(f.weight));
    }
    // Residuals are normalized by the ray's total variation, which makes them
    // balance-point offsets in length units, stable across grid and vertex
    // refinements; empty rays contribute nothing.
    const double scale = std::max(variation.value(), 1e-300);
    report.min_ray_mass = std::min(report.min_ray_mass, mass.value());
    report.equality_residuals[v] = variation.value() > 0.0
                                       ? std::abs(moment.value()) / scale
                                       : 0.0;

    double worst = 0.0;
    for (const auto& cut : bins[v]) {
      CompensatedSum wedge;
      for (const auto& f : bins[v])
        if (f.abscissa > cut.abscissa) wedge.add(f.weight * (f.abscissa - cut.abscissa));
      worst = std::max(worst, wedge.value());
    }
    report.tail_residuals[v] = variation.value() > 0.0 ? worst / scale : 0.0;

    if (report.equality_residuals[v] > report.worst_equality) {
      report.worst_equality = report.equality_residuals[v];
      report.worst_vertex = v;
    }
    report.worst_tail = std::max(report.worst_tail, worst);
    equalities_ok = equalities_ok && report.equality_residuals[v] <= opts.tol;
    tails_ok = tails_ok && worst <= opts.tol;
    mass_ok = mass_ok && mass.value() >= -opts.tol;
  }
  if (report.min_ray_mass == std::numeric_limits<double>::infinity())
    report.min_ray_mass = 0.0;

  report.pass = (report.min_nu >= -opts.tol) && equalities_ok && tails_ok && mass_ok;
  return report;
}

SignedMeasureGrid build_gamma_from_partition(const PoolingPartition& partition,
                                             const SignedMeasureGrid& measure,
                                             const CertificateReport& report) {
  if (!report.pass)
    throw std::domain_error("gamma construction requires a certified partition");
  if (report.regions.size() != partition.regions.size())
    throw std::domain_error("certificate report does not match the partition");

  const int n = static_cast<int>(measure.nodes.cols());
  std::vector<Vector> nodes;
  std::vector<double> weights;
  for (size_t r = 0; r < partition.regions.size(); ++r) {
    if (!partition.regions[r].touch_point) continue;
    const double mass = std::max(report.regions[r].mass, 0.0);
    if (mass <= 1e-15) continue;
    nodes.push_back(*partition.regions[r].touch_point);
    weights.push_back(mass);
  }

  SignedMeasureGrid gamma;
  gamma.nodes.resize(static_cast<long>(nodes.size()), n);
  gamma.weights.resize(static_cast<long>(nodes.size()));
  gamma.normals = Matrix::Zero(static_cast<long>(nodes.size()), n);
  gamma.tags.assign(nodes.size(), SignedMeasureGrid::Tag::interior);
  CompensatedSum mass;
  std::vector<CompensatedSum> moment(n);
  for (size_t k = 0; k < nodes.size(); ++k) {
    gamma.nodes.row(static_cast<long>(k)) = nodes[k].transpose();
    gamma.weights[static_cast<long>(k)] = weights[k];
    mass.add(weights[k]);
    for (int d = 0; d < n; ++d) moment[d].add(weights[k] * nodes[k][d]);
  }
  gamma.total_mass = mass.value();
  gamma.barycenter = Vector::Zero(n);
  if (std::abs(gamma.total_mass) > 1e-300)
    for (int d = 0; d < n; ++d) gamma.barycenter[d] = moment[d].value() / gamma.total_mass;
  return gamma;
}

Menu make_interval_menu(const DelegationProblem& problem, const SignedMeasureGrid& measure,
                        double s1, double s2) {
  require_1d(problem, "interval menu construction");
  std::vector<double> abscissae;
  for (long i = 0; i < measure.size(); ++i)
    if (measure.tags[i] == SignedMeasureGrid::Tag::interior)
      abscissae.push_back(measure.nodes(i, 0));
  std::sort(abscissae.begin(), abscissae.end());
  return interval_delegation_menu(problem, s1, s2, abscissae);
}

}  // namespace deleg
