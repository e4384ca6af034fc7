#include "deleg/model.hpp"

#include <cmath>

namespace deleg {

double DelegationProblem::density_at(const Vector& s) const {
  if (density.kind == DensitySpec::Kind::uniform) return 1.0 / state_space.volume();
  return density.f(s);
}

Vector DelegationProblem::density_grad(const Vector& s) const {
  if (density.kind == DensitySpec::Kind::uniform) return Vector::Zero(n);
  return density.grad_f(s);
}

Vector DelegationProblem::bias_at(const Vector& s) const {
  switch (bias.kind) {
    case BiasSpec::Kind::linear:
      return bias.alpha * s;
    case BiasSpec::Kind::affine:
      return s + bias.beta;
    case BiasSpec::Kind::analytic:
      return bias.g(s);
  }
  return s;
}

Matrix DelegationProblem::bias_jacobian(const Vector& s) const {
  switch (bias.kind) {
    case BiasSpec::Kind::linear:
      return bias.alpha * Matrix::Identity(n, n);
    case BiasSpec::Kind::affine:
      return Matrix::Identity(n, n);
    case BiasSpec::Kind::analytic:
      return bias.jacobian(s);
  }
  return Matrix::Identity(n, n);
}

double DelegationProblem::curvature_b(const Vector& a) const {
  if (curvature.kind == CurvatureSpec::Kind::quadratic) return -0.5 * a.squaredNorm();
  return curvature.b(a);
}

Vector DelegationProblem::curvature_grad_b(const Vector& a) const {
  if (curvature.kind == CurvatureSpec::Kind::quadratic) return -a;
  return curvature.grad_b(a);
}

namespace {

// Midpoint quadrature of f over the box; used only by the construction check.
double density_mass(const DelegationProblem& p, int cells) {
  const int n = p.n;
  std::vector<long> idx(n, 0);
  Vector widths(n);
  for (int i = 0; i < n; ++i) widths[i] = (p.state_space.hi[i] - p.state_space.lo[i]) / cells;
  double cell_vol = 1.0;
  for (int i = 0; i < n; ++i) cell_vol *= widths[i];

  long total = 1;
  for (int i = 0; i < n; ++i) total *= cells;
  CompensatedSum acc;
  Vector s(n);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (int i = 0; i < n; ++i) {
      idx[i] = rem % cells;
      rem /= cells;
    }
    for (int i = 0; i < n; ++i) s[i] = p.state_space.lo[i] + (idx[i] + 0.5) * widths[i];
    acc.add(p.density_at(s) * cell_vol);
  }
  return acc.value();
}

}  // namespace

DelegationProblem make_problem(int n, Box state_space, DensitySpec density, BiasSpec bias,
                               double kappa, CurvatureSpec curvature,
                               const ProblemOptions& opts) {
  if (n < 1) throw std::invalid_argument("state dimension must be positive");
  if (state_space.dim() != n || state_space.hi.size() != n)
    throw std::invalid_argument("state space dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (!(state_space.lo[i] < state_space.hi[i]))
      throw std::invalid_argument("state space must have nonempty interior");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (density.kind == DensitySpec::Kind::analytic && (!density.f || !density.grad_f))
    throw std::invalid_argument("analytic density requires f and grad_f");
  if (bias.kind == BiasSpec::Kind::analytic && (!bias.g || !bias.jacobian))
    throw std::invalid_argument("analytic bias requires g and its Jacobian");
  if (bias.kind == BiasSpec::Kind::affine && bias.beta.size() != n)
    throw std::invalid_argument("affine bias offset has wrong dimension");
  if (curvature.kind == CurvatureSpec::Kind::analytic && (!curvature.b || !curvature.grad_b))
    throw std::invalid_argument("analytic curvature requires b and grad_b");

  DelegationProblem p;
  p.n = n;
  p.state_space = std::move(state_space);
  p.density = std::move(density);
  p.bias = std::move(bias);
  p.kappa = kappa;
  p.curvature = std::move(curvature);

  if (p.density.kind == DensitySpec::Kind::analytic && opts.density_mass_tol < 1e9) {
    // Per-axis cell count shrinks with dimension to keep the check cheap.
    const int cells = std::max(8, static_cast<int>(std::pow(opts.density_check_cells, 1.0 / n)));
    const double mass = density_mass(p, cells);
    if (std::abs(mass - 1.0) > opts.density_mass_tol)
      throw std::invalid_argument("density does not integrate to 1 over the state space (got " +
                                  std::to_string(mass) + ")");
  }
  return p;
}

Vector Lottery::mean() const {
  Vector m = Vector::Zero(atoms.empty() ? 0 : atoms.front().action.size());
  for (const auto& atom : atoms) m += atom.probability * atom.action;
  return m;
}

Lottery Lottery::degenerate(Vector action) {
  Lottery l;
  l.atoms.push_back({std::move(action), 1.0});
  return l;
}

void validate_lottery(const Lottery& lottery) {
  if (lottery.atoms.empty()) throw std::invalid_argument("lottery needs at least one atom");
  CompensatedSum mass;
  for (const auto& atom : lottery.atoms) {
    if (atom.probability < 0.0) throw std::invalid_argument("negative lottery probability");
    mass.add(atom.probability);
  }
  if (std::abs(mass.value() - 1.0) > 1e-12)
    throw std::invalid_argument("lottery probabilities must sum to 1");
}

Vector conjugate_argmax(const std::function<Vector(const Vector&)>& grad_b, const Vector& s,
                        int max_iters, double tol) {
  const int n = static_cast<int>(s.size());
  Vector a = s;  // exact for the quadratic family, a decent start elsewhere
  Vector resid = s + grad_b(a);
  double norm = resid.norm();
  for (int iter = 0; iter < max_iters && norm > tol; ++iter) {
    // Finite-difference Jacobian of grad_b; n is small so this is cheap.
    Matrix jac(n, n);
    const double step = 1e-6 * (1.0 + a.norm());
    for (int j = 0; j < n; ++j) {
      Vector ap = a, am = a;
      ap[j] += step;
      am[j] -= step;
      jac.col(j) = (grad_b(ap) - grad_b(am)) / (2.0 * step);
    }
    Vector delta = jac.fullPivLu().solve(-resid);
    if (!delta.allFinite()) throw SolverError("conjugate solve produced non-finite step", norm);

    // Backtracking damping on the residual norm.
    double t = 1.0;
    for (int k = 0; k < 60; ++k) {
      Vector trial = a + t * delta;
      Vector trial_resid = s + grad_b(trial);
      if (trial_resid.norm() < norm) {
        a = trial;
        resid = trial_resid;
        norm = resid.norm();
        break;
      }
      t *= 0.5;
      if (k == 59) throw SolverError("conjugate line search stalled", norm);
    }
  }
  if (norm > tol) throw SolverError("conjugate iteration did not converge", norm);
  return a;
}

double first_best_payoff(const DelegationProblem& problem, const Vector& s) {
  if (problem.curvature.kind == CurvatureSpec::Kind::quadratic) return 0.5 * s.squaredNorm();
  const Vector a = first_best_action(problem, s);
  return a.dot(s) + problem.curvature_b(a);
}

Vector first_best_action(const DelegationProblem& problem, const Vector& s) {
  if (problem.curvature.kind == CurvatureSpec::Kind::quadratic) return s;
  return conjugate_argmax(problem.curvature.grad_b, s);
}

double lottery_expected_b(const DelegationProblem& problem, const Lottery& lottery) {
  CompensatedSum acc;
  for (const auto& atom : lottery.atoms)
    acc.add(atom.probability * problem.curvature_b(atom.action));
  return acc.value();
}

double agent_payoff(const DelegationProblem& problem, const Lottery& lottery, const Vector& s) {
  return lottery.mean().dot(s) + lottery_expected_b(problem, lottery);
}

double principal_payoff(const DelegationProblem& problem, const Lottery& lottery,
                        const Vector& s) {
  return lottery.mean().dot(problem.bias_at(s)) +
         problem.kappa * lottery_expected_b(problem, lottery);
}

}  // namespace deleg
