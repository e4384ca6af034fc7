#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deleg/boundary2d.hpp"
#include "deleg/core.hpp"
#include "deleg/measure.hpp"
#include "deleg/mech.hpp"
#include "deleg/model.hpp"

namespace deleg {

struct CertOptions {
  double tol = 1e-6;              // equality / positivity tolerance
  double touch_tol = 1e-7;        // |U - h| <= touch_tol * (1 + |h|)
  int eval_points = 2001;         // scan resolution for interval conditions
  int quad_panels = 512;          // Simpson panels per tail integral
  double transverse_slack = 1.5;  // ray-region width allowance, in cell diagonals
};

// Maximal region on which the menu's indirect utility is affine.
struct PoolingRegion {
  std::vector<long> node_indices;  // measure nodes served by this piece
  long piece = -1;
  Vector a;
  double c = 0.0;
  std::optional<Vector> touch_point;  // unique point with U = h, if any
  double lo = 0.0, hi = 0.0;          // covered sub-interval of S (1D only)
};

struct PoolingPartition {
  std::vector<PoolingRegion> regions;
  std::vector<long> region_of_node;
};

// Signed measure carried by a one-dimensional ray.
struct Ray1DMeasure {
  Vector origin;
  Vector direction;
  std::vector<double> abscissae;  // strictly increasing
  std::vector<double> weights;
};

struct MajorizationCheck {
  bool pass = false;
  double mass = 0.0;
  double mass_residual = 0.0;
  double mean_residual = 0.0;
  double worst_wedge = 0.0;               // max over t of the wedge-test violation
  std::vector<double> wedge_residuals;    // one per abscissa
};

struct RegionCheck {
  long region = -1;
  double mass = 0.0;
  bool singleton = false;
  bool has_touch = false;
  bool pass = false;
  double residual = 0.0;
  std::string note;
};

struct CertificateReport {
  bool pass = false;
  double worst_residual = 0.0;
  std::vector<RegionCheck> regions;
  std::optional<double> gap;  // filled when a gamma certificate is built
};

// Nodes are assigned to the piece attaining menu_eval (lowest index on ties);
// in 1D each region also records the exact sub-interval it covers, bounded by
// the crossing abscissae of adjacent active pieces.
PoolingPartition extract_partition(const DelegationProblem& problem, const Menu& menu,
                                   const SignedMeasureGrid& measure,
                                   const CertOptions& opts = {});

// mu|_Q <=_cx delta: mass equality, barycenter equality and the family of
// wedge inequalities sum_i w_i (x_i - t)+ <= M (loc - t)+ at every abscissa,
// which together are equivalent to the integrated-cdf majorization test.
MajorizationCheck check_majorization_1d(const Ray1DMeasure& ray, double delta_mass,
                                        double delta_location, double tol = 1e-6);

// Convex dominance between two measures on a line (used for gamma >= mu).
MajorizationCheck check_convex_dominance_1d(const std::vector<double>& lower_x,
                                            const std::vector<double>& lower_w,
                                            const std::vector<double>& upper_x,
                                            const std::vector<double>& upper_w,
                                            double tol = 1e-6);

// Per-region verification of the pooling optimality certificate: nonnegative
// region mass and convex dominance of the conditional measure by the touch
// atom.  Supports singleton regions and one-dimensional rays; anything wider
// raises std::domain_error.
CertificateReport check_optimality_certificate(const DelegationProblem& problem,
                                               const Menu& menu,
                                               const SignedMeasureGrid& measure,
                                               const CertOptions& opts = {});

struct IntervalReport {
  bool pass = false;
  double s1 = 0.0, s2 = 0.0;
  double min_nu = 0.0;            // min of nu over [s1, s2]
  double upper_tail_worst = 0.0;  // max over s >= s2 of the (x - s)-weighted tail
  double upper_equality = 0.0;    // tail value at s = s2
  double lower_tail_worst = 0.0;
  double lower_equality = 0.0;
  std::string note;
};

// Interval-delegation optimality conditions, checked by quadrature against the
// analytic nu (interior density plus boundary atoms).
IntervalReport check_interval_delegation(const DelegationProblem& problem, double s1, double s2,
                                         const CertOptions& opts = {});

struct OptimalInterval {
  double s1 = 0.0, s2 = 0.0;
  bool degenerate = false;  // residual sign indicated full pooling on a side
  IntervalReport report;
};

// Solves the endpoint equality conditions by bisection on the tail residual;
// clamps to the state-space ends when no interior root exists.  Requires
// {nu >= 0} to be an interval on the scan grid.
OptimalInterval find_optimal_interval(const DelegationProblem& problem,
                                      const CertOptions& opts = {});

struct LogconcaveReport {
  bool hypothesis_holds = false;        // f logconcave on the scan grid
  double worst_convexity = 0.0;         // max second difference of log f
  std::optional<OptimalInterval> interval;
};

// n = 1, kappa = 1, constant bias: if f is logconcave an optimal interval
// exists; verified numerically and then delegated to find_optimal_interval.
LogconcaveReport check_logconcave_bias(const DelegationProblem& problem,
                                       const CertOptions& opts = {});

struct ConvexDelegationOptions {
  int cells_per_axis = 97;
  double tol = 5e-3;
  bool require_strict_interior = false;
};

struct ConvexDelegationReport {
  bool pass = false;
  double min_nu = 0.0;                    // min of nu over A
  double worst_equality = 0.0;            // max |first moment| over boundary rays
  double worst_tail = 0.0;                // max wedge-test value over rays
  double min_ray_mass = 0.0;
  long worst_vertex = -1;
  std::vector<double> equality_residuals;
  std::vector<double> tail_residuals;
};

// Convex-delegation optimality: nu >= 0 on A, and on every vertex normal ray
// the disintegrated measure (nearest-point binning of S \ A) has zero first
// moment and nonpositive (x - z)-weighted tails.
ConvexDelegationReport check_convex_delegation(const DelegationProblem& problem,
                                               const BoundaryCurve& boundary,
                                               const ConvexDelegationOptions& opts = {});

// gamma = sum over regions of (region mass) x atom at the touch point.  The
// partition must have passed check_optimality_certificate (the report is the evidence).
SignedMeasureGrid build_gamma_from_partition(const PoolingPartition& partition,
                                             const SignedMeasureGrid& measure,
                                             const CertificateReport& report);

// Canonical 1D interval menu on the measure's interior abscissae.
Menu make_interval_menu(const DelegationProblem& problem, const SignedMeasureGrid& measure,
                        double s1, double s2);

}  // namespace deleg
