#pragma once

#include <cstdint>

#include "deleg/boundary2d.hpp"
#include "deleg/core.hpp"
#include "deleg/measure.hpp"
#include "deleg/mech.hpp"
#include "deleg/model.hpp"

namespace deleg {

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  long samples = 0;
};

// Monte Carlo principal payoff of a mechanism.  States are drawn with the
// counter-based generator (uniform boxes directly, 1D analytic densities by
// inverse cdf); lotteries are never sampled, their expectations enter the
// payoff analytically.  Chunked compensated reductions make the result
// independent of the worker count.
McEstimate mc_principal_payoff(const DelegationProblem& problem, const Mechanism& mechanism,
                               long samples, std::uint64_t seed, int threads = 1);

// Payoff of delegating to a convex set: types inside act freely, types outside
// get the nearest boundary point (the quadratic best response).
McEstimate mc_delegation_payoff(const DelegationProblem& problem, const BoundaryCurve& curve,
                                long samples, std::uint64_t seed, int threads = 1);

// Payoff of delegating to an axis-aligned action box (coordinate clamping).
McEstimate mc_box_delegation_payoff(const DelegationProblem& problem, const Box& action_box,
                                    long samples, std::uint64_t seed, int threads = 1);

// Paired comparison with common random numbers: payoff(curve) - payoff(box).
McEstimate mc_payoff_difference(const DelegationProblem& problem, const BoundaryCurve& curve,
                                const Box& action_box, long samples, std::uint64_t seed,
                                int threads = 1);

struct IdentityCheck {
  double direct = 0.0;    // grid quadrature of grad U . (g - kappa s) + kappa U over F
  double weighted = 0.0;  // integral of U against the signed measure
  double residual = 0.0;
};

// The two payoff routes must agree for any feasible menu; the residual decays
// with grid refinement.
IdentityCheck divergence_identity_check(const DelegationProblem& problem, const Menu& menu,
                                        const GridSpec& spec);

// Same identity against the exact interval-delegation indirect utility
// U(s) = a s + b(a), a = clamp(s, s1, s2) (1D quadratic curvature); the full
// state interval gives U = h.  Free of menu sampling granularity, so the
// residual is pure quadrature error.
IdentityCheck divergence_identity_check_interval(const DelegationProblem& problem, double s1,
                                                 double s2, const GridSpec& spec);

}  // namespace deleg
