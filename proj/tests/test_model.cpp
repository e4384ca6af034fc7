#include <doctest.h>

#include <cmath>

#include "deleg/model.hpp"
#include "helpers.hpp"

using namespace deleg;
using deleg::testing::uniform_affine;
using deleg::testing::uniform_linear;

namespace {

// Strictly concave non-quadratic curvature with superlinear decay:
// b(a) = -|a|^2/2 - |a|^4/4, grad b = -a (1 + |a|^2).
CurvatureSpec quartic_curvature() {
  return CurvatureSpec::analytic(
      [](const Vector& a) { return -0.5 * a.squaredNorm() - 0.25 * std::pow(a.squaredNorm(), 2); },
      [](const Vector& a) { return (-(1.0 + a.squaredNorm()) * a).eval(); });
}

DelegationProblem quartic_problem() {
  return make_problem(1, make_box({-0.5}, {0.5}), DensitySpec::uniform(), BiasSpec::linear(0.5),
                      1.0, quartic_curvature());
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("construction rejects degenerate primitives") {
  CHECK_THROWS_AS(uniform_linear(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(1, make_box({0.5}, {0.5}), DensitySpec::uniform(),
                               BiasSpec::linear(1.0), 1.0, CurvatureSpec::quadratic()),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_problem(1, make_box({0.0}, {1.0}), DensitySpec::uniform(),
                               BiasSpec::linear(1.0), 0.0, CurvatureSpec::quadratic()),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_problem(1, make_box({0.0}, {1.0}), DensitySpec::uniform(),
                               BiasSpec::linear(1.0), -2.0, CurvatureSpec::quadratic()),
                  std::invalid_argument);
}

TEST_CASE("construction checks density normalization") {
  auto bad = DensitySpec::analytic([](const Vector&) { return 2.0; },
                                   [](const Vector& s) { return Vector::Zero(s.size()).eval(); });
  CHECK_THROWS_AS(make_problem(1, make_box({0.0}, {1.0}), bad, BiasSpec::linear(1.0), 1.0,
                               CurvatureSpec::quadratic()),
                  std::invalid_argument);
}

TEST_CASE("first-best payoff, quadratic closed forms") {
  const auto p1 = uniform_linear(1, 0.5);
  CHECK(first_best_payoff(p1, vec1(0.0)) == 0.0);
  CHECK(first_best_payoff(p1, vec1(0.5)) == 0.125);

  const auto p2 = uniform_linear(2, 0.5);
  CHECK(first_best_payoff(p2, vec2(0.3, -0.4)) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("first-best action, quadratic identity") {
  const auto p2 = uniform_linear(2, 0.5);
  const Vector s = vec2(0.2, 0.1);
  CHECK((first_best_action(p2, s) - s).norm() == 0.0);
  CHECK(first_best_action(uniform_linear(1, 0.5), vec1(0.0))[0] == 0.0);
}

TEST_CASE("first-best action satisfies the first-order condition") {
  const auto p = quartic_problem();
  for (double x : {-0.5, -0.2, 0.0, 0.3, 0.5}) {
    const Vector s = vec1(x);
    const Vector a = first_best_action(p, s);
    CHECK((s + p.curvature_grad_b(a)).norm() <= 1e-10);
  }
}

TEST_CASE("closed form and inner maximization agree for quadratic b") {
  const auto p = uniform_linear(1, 0.5);
  auto quad_grad = [](const Vector& a) { return (-a).eval(); };
  for (double x : {-0.5, -0.25, 0.0, 0.125, 0.5}) {
    const Vector a = conjugate_argmax(quad_grad, vec1(x));
    const double via_newton = a[0] * x + p.curvature_b(a);
    CHECK(std::abs(via_newton - first_best_payoff(p, vec1(x))) <= 1e-10);
  }
}

TEST_CASE("conjugate solver reports non-convergence") {
  auto grad = [](const Vector& a) { return (-(1.0 + a.squaredNorm()) * a).eval(); };
  CHECK_THROWS_AS(conjugate_argmax(grad, vec1(0.4), 0), SolverError);
}

TEST_CASE("payoff evaluation") {
  const auto p = uniform_linear(1, 0.5);

  SUBCASE("degenerate lottery at the first-best action attains h") {
    const Vector s = vec1(0.37);
    const Lottery l = Lottery::degenerate(s);
    CHECK(agent_payoff(p, l, s) == doctest::Approx(first_best_payoff(p, s)).epsilon(1e-15));
  }

  SUBCASE("two-point lottery, direct arithmetic") {
    Lottery l;
    l.atoms.push_back({vec1(0.5), 0.5});
    l.atoms.push_back({vec1(0.1), 0.5});
    CHECK(agent_payoff(p, l, vec1(0.3)) == doctest::Approx(0.025).epsilon(1e-12));
  }

  SUBCASE("principal payoff at the aligned action") {
    const Lottery l = Lottery::degenerate(vec1(0.4));
    CHECK(principal_payoff(p, l, vec1(0.4)) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("lottery validation") {
  Lottery empty;
  CHECK_THROWS_AS(validate_lottery(empty), std::invalid_argument);

  Lottery unbalanced;
  unbalanced.atoms.push_back({vec1(0.0), 0.6});
  unbalanced.atoms.push_back({vec1(1.0), 0.5});
  CHECK_THROWS_AS(validate_lottery(unbalanced), std::invalid_argument);

  Lottery ok;
  ok.atoms.push_back({vec1(0.0), 0.5});
  ok.atoms.push_back({vec1(1.0), 0.5});
  CHECK_NOTHROW(validate_lottery(ok));
}

TEST_CASE("first-best payoff is convex along lines") {
  const auto p2 = uniform_linear(2, 0.5);
  const Vector base = vec2(-0.4, 0.3);
  const Vector dir = vec2(1.0, -0.7);
  const double step = 0.02;
  for (int i = 1; i < 40; ++i) {
    const double h0 = first_best_payoff(p2, base + (i - 1) * step * dir);
    const double h1 = first_best_payoff(p2, base + i * step * dir);
    const double h2 = first_best_payoff(p2, base + (i + 1) * step * dir);
    CHECK(h0 - 2.0 * h1 + h2 >= -1e-9);
  }
}

TEST_CASE("any lottery's agent payoff stays below the first-best") {
  const auto p = quartic_problem();
  const CounterRng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    Lottery l;
    const int atoms = 1 + static_cast<int>(rng.bits(trial, 0) % 4);
    double remaining = 1.0;
    for (int k = 0; k < atoms; ++k) {
      const double prob = (k + 1 == atoms) ? remaining
                                           : remaining * rng.uniform(trial, 10 + k);
      remaining -= prob;
      l.atoms.push_back({vec1(2.0 * rng.uniform(trial, 100 + k) - 1.0), prob});
    }
    for (double x : {-0.5, -0.1, 0.2, 0.5}) {
      const Vector s = vec1(x);
      CHECK(agent_payoff(p, l, s) <= first_best_payoff(p, s) + 1e-9);
    }
  }
}

}  // TEST_SUITE
