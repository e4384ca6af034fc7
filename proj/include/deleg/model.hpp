#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deleg/core.hpp"

namespace deleg {

// State density f with analytic gradient.  Built-in families cover the
// configurations the CLI accepts; `analytic` takes arbitrary callables.
struct DensitySpec {
  enum class Kind { uniform, analytic };

  Kind kind = Kind::uniform;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;

  static DensitySpec uniform() {
    DensitySpec d;
    d.kind = Kind::uniform;
    return d;
  }

  static DensitySpec analytic(std::function<double(const Vector&)> f,
                              std::function<Vector(const Vector&)> grad_f) {
    DensitySpec d;
    d.kind = Kind::analytic;
    d.f = std::move(f);
    d.grad_f = std::move(grad_f);
    return d;
  }
};

// Principal target g(s) with analytic Jacobian.
struct BiasSpec {
  enum class Kind { linear, affine, analytic };

  Kind kind = Kind::linear;
  double alpha = 1.0;  // linear: g(s) = alpha * s
  Vector beta;         // affine: g(s) = s + beta
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> jacobian;

  static BiasSpec linear(double alpha) {
    BiasSpec b;
    b.kind = Kind::linear;
    b.alpha = alpha;
    return b;
  }

  static BiasSpec affine(Vector beta) {
    BiasSpec b;
    b.kind = Kind::affine;
    b.beta = std::move(beta);
    return b;
  }

  static BiasSpec analytic(std::function<Vector(const Vector&)> g,
                           std::function<Matrix(const Vector&)> jacobian) {
    BiasSpec b;
    b.kind = Kind::analytic;
    b.g = std::move(g);
    b.jacobian = std::move(jacobian);
    return b;
  }
};

// Action curvature b(a).  The default quadratic family has closed-form
// conjugate machinery; analytic curvature supplies b and its gradient and the
// conjugate is evaluated by damped Newton on the first-order condition.
struct CurvatureSpec {
  enum class Kind { quadratic, analytic };

  Kind kind = Kind::quadratic;
  std::function<double(const Vector&)> b;
  std::function<Vector(const Vector&)> grad_b;

  static CurvatureSpec quadratic() {
    CurvatureSpec c;
    c.kind = Kind::quadratic;
    return c;
  }

  static CurvatureSpec analytic(std::function<double(const Vector&)> b,
                                std::function<Vector(const Vector&)> grad_b) {
    CurvatureSpec c;
    c.kind = Kind::analytic;
    c.b = std::move(b);
    c.grad_b = std::move(grad_b);
    return c;
  }
};

struct ProblemOptions {
  double density_mass_tol = 1e-6;  // |integral of f over S - 1| tolerance
  int density_check_cells = 512;   // per-axis quadrature cells for the check
};

// One delegation instance: dimension, state box, density, bias, kappa and
// curvature.  Validated at construction; all evaluation is pure and
// thread-safe.
struct DelegationProblem {
  int n = 1;
  Box state_space;
  DensitySpec density;
  BiasSpec bias;
  double kappa = 1.0;
  CurvatureSpec curvature;

  double density_at(const Vector& s) const;
  Vector density_grad(const Vector& s) const;
  Vector bias_at(const Vector& s) const;
  Matrix bias_jacobian(const Vector& s) const;
  double curvature_b(const Vector& a) const;
  Vector curvature_grad_b(const Vector& a) const;
};

// Throws std::invalid_argument on malformed primitives (degenerate box,
// kappa <= 0, unnormalized density, missing callables).
DelegationProblem make_problem(int n, Box state_space, DensitySpec density, BiasSpec bias,
                               double kappa, CurvatureSpec curvature,
                               const ProblemOptions& opts = {});

// Finite lottery over actions.
struct LotteryAtom {
  Vector action;
  double probability = 1.0;
};

struct Lottery {
  std::vector<LotteryAtom> atoms;

  Vector mean() const;
  static Lottery degenerate(Vector action);
};

void validate_lottery(const Lottery& lottery);

// argmax_a a.s + b(a) for caller-supplied curvature callbacks; damped Newton
// on the first-order condition s + grad_b(a) = 0 with a finite-difference
// Jacobian.  Throws SolverError with the last residual on non-convergence.
Vector conjugate_argmax(const std::function<Vector(const Vector&)>& grad_b, const Vector& s,
                        int max_iters = 100, double tol = 1e-12);

// First-best payoff h(s) = sup_a a.s + b(a) and its argmax.
double first_best_payoff(const DelegationProblem& problem, const Vector& s);
Vector first_best_action(const DelegationProblem& problem, const Vector& s);

// Expected payoffs of a lottery: agent E[a].s + E[b(a)], principal
// E[a].g(s) + kappa E[b(a)].
double agent_payoff(const DelegationProblem& problem, const Lottery& lottery, const Vector& s);
double principal_payoff(const DelegationProblem& problem, const Lottery& lottery, const Vector& s);

double lottery_expected_b(const DelegationProblem& problem, const Lottery& lottery);

}  // namespace deleg
