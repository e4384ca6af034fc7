#include <doctest.h>

#include <cmath>
#include <numbers>

#include "deleg/boundary2d.hpp"
#include "deleg/cert.hpp"
#include "helpers.hpp"

using namespace deleg;
using deleg::testing::uniform_linear;

namespace {

// Distance from a point to the polygon boundary (not the filled region).
double boundary_distance(const BoundaryCurve& curve, const Vector& point) {
  return nearest_on_curve(curve, point).distance;
}

// Worst displacement of the vertex set under the symmetry group of the
// centered square: reflections and 90-degree rotations.
double symmetry_defect(const BoundaryCurve& curve) {
  const std::vector<std::function<Vector(const Vector&)>> group = {
      [](const Vector& v) { return vec2(-v[0], v[1]); },
      [](const Vector& v) { return vec2(v[0], -v[1]); },
      [](const Vector& v) { return vec2(v[1], v[0]); },
      [](const Vector& v) { return vec2(-v[1], -v[0]); },
      [](const Vector& v) { return vec2(-v[0], -v[1]); },
  };
  double worst = 0.0;
  for (const auto& g : group)
    for (long i = 0; i < curve.size(); ++i)
      worst = std::max(worst, boundary_distance(curve, g(curve.vertex(i))));
  return worst;
}

// Superellipse |x|^p + |y|^p = r^p: a strictly convex stand-in for the full
// square when r is close to the half-width.
BoundaryCurve superellipse(double r, double p, long vertices) {
  Matrix v(vertices, 2);
  for (long i = 0; i < vertices; ++i) {
    const double theta =
        2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(vertices);
    const double c = std::cos(theta), s = std::sin(theta);
    const double scale =
        r / std::pow(std::pow(std::abs(c), p) + std::pow(std::abs(s), p), 1.0 / p);
    v(i, 0) = scale * c;
    v(i, 1) = scale * s;
  }
  return make_curve(std::move(v));
}

}  // namespace

TEST_SUITE("boundary2d") {

TEST_CASE("curve construction and geometry") {
  const BoundaryCurve circle = circle_curve(vec2(0.0, 0.0), 0.3, 64);
  CHECK(curve_area(circle) ==
        doctest::Approx(std::numbers::pi * 0.09).epsilon(2e-3));
  for (long i = 0; i < circle.size(); ++i)
    CHECK(circle.normal(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(curve_contains(circle, vec2(0.1, 0.1)));
  CHECK_FALSE(curve_contains(circle, vec2(0.4, 0.0)));

  const NearestPoint np = nearest_on_curve(circle, vec2(0.6, 0.0));
  CHECK(np.distance == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(np.point[0] == doctest::Approx(0.3).epsilon(1e-3));

  CHECK_THROWS_AS(circle_curve(vec2(0.0, 0.0), 0.3, 8), std::invalid_argument);

  Matrix dented(16, 2);
  for (long i = 0; i < 16; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / 16.0;
    const double r = (i == 3) ? 0.05 : 0.3;
    dented.row(i) << r * std::cos(theta), r * std::sin(theta);
  }
  CHECK_THROWS_AS(make_curve(std::move(dented)), std::invalid_argument);
}

TEST_CASE("solver preconditions") {
  const auto p = uniform_linear(2, 0.5);
  const BoundaryCurve init = circle_curve(vec2(0.0, 0.0), 0.2, 32);

  CHECK_THROWS_AS(solve_boundary(uniform_linear(1, 0.5), init, {}), std::domain_error);
  CHECK_THROWS_AS(solve_boundary(uniform_linear(2, 1.0), init, {}), std::domain_error);

  const BoundaryCurve outside = circle_curve(vec2(0.0, 0.0), 0.6, 32);
  CHECK_THROWS_AS(solve_boundary(p, outside, {}), std::domain_error);
}

TEST_CASE("benchmark boundary: convergence, symmetry, certification") {
  const auto p = uniform_linear(2, 0.5);
  BoundarySolveOptions opts;
  opts.cells_per_axis = 97;
  opts.tol = 5e-3;
  opts.max_iters = 80;
  const BoundaryCurve init = circle_curve(vec2(0.0, 0.0), 0.2, 64);
  const BoundarySolveReport report = solve_boundary(p, init, opts);
  REQUIRE(report.converged);
  CHECK(report.max_residual <= opts.tol);

  CHECK(symmetry_defect(report.curve) <= 1e-3);

  ConvexDelegationOptions check_opts;
  check_opts.cells_per_axis = 97;
  const ConvexDelegationReport check = check_convex_delegation(p, report.curve, check_opts);
  CHECK(check.pass);

  SUBCASE("a converged curve is a fixed point") {
    BoundarySolveOptions one_sweep = opts;
    one_sweep.max_iters = 1;
    const BoundarySolveReport again = solve_boundary(p, report.curve, one_sweep);
    CHECK(again.converged);
    CHECK((again.curve.vertices - report.curve.vertices).lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("vertex refinement moves the enclosed area by at most one percent") {
    const BoundaryCurve init32 = circle_curve(vec2(0.0, 0.0), 0.2, 32);
    BoundarySolveOptions opts32 = opts;
    const BoundarySolveReport coarse = solve_boundary(p, init32, opts32);
    REQUIRE(coarse.converged);
    const double a1 = curve_area(coarse.curve);
    const double a2 = curve_area(report.curve);
    CHECK(std::abs(a1 - a2) <= 0.01 * std::max(a1, a2));
  }
}

TEST_CASE("aligned limit pushes the boundary to the state-space edge") {
  const auto p = uniform_linear(2, 0.95);
  BoundarySolveOptions opts;
  opts.cells_per_axis = 97;
  opts.tol = 5e-3;
  opts.max_iters = 120;
  const BoundaryCurve init = circle_curve(vec2(0.0, 0.0), 0.3, 48);
  const BoundarySolveReport report = solve_boundary(p, init, opts);
  double min_distance = std::numeric_limits<double>::infinity();
  for (long i = 0; i < report.curve.size(); ++i) {
    const Vector v = report.curve.vertex(i);
    min_distance = std::min({min_distance, 0.5 - std::abs(v[0]), 0.5 - std::abs(v[1])});
  }
  CHECK(min_distance < 0.05);
}

TEST_CASE("convex delegation check on reference sets") {
  const auto p_half = uniform_linear(2, 0.5);

  SUBCASE("a ball close to the faces fails the balance condition") {
    const BoundaryCurve big = circle_curve(vec2(0.0, 0.0), 0.49, 64);
    const ConvexDelegationReport report = check_convex_delegation(p_half, big, {});
    CHECK_FALSE(report.pass);
    CHECK(std::max(report.worst_equality, -report.min_ray_mass) > 5e-3);
  }

  SUBCASE("aligned principal: the whole square passes trivially") {
    const auto p_aligned = uniform_linear(2, 1.0);
    const BoundaryCurve nearly_square = superellipse(0.49995, 200.0, 64);
    const ConvexDelegationReport report = check_convex_delegation(p_aligned, nearly_square, {});
    CHECK(report.pass);
    CHECK(report.worst_equality <= 1e-12);  // every ray carries zero weight
  }

  SUBCASE("non-convex polygons are rejected") {
    BoundaryCurve dented = circle_curve(vec2(0.0, 0.0), 0.3, 32);
    dented.vertices(5, 0) *= 0.2;
    dented.vertices(5, 1) *= 0.2;
    CHECK_THROWS_AS(check_convex_delegation(p_half, dented, {}), std::domain_error);
  }
}

}  // TEST_SUITE
