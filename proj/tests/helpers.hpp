#pragma once

#include "deleg/model.hpp"

namespace deleg::testing {

// Uniform on [-1/2, 1/2]^n with g = alpha s and quadratic curvature.
inline DelegationProblem uniform_linear(int n, double alpha, double kappa = 1.0) {
  Box box;
  box.lo = Vector::Constant(n, -0.5);
  box.hi = Vector::Constant(n, 0.5);
  return make_problem(n, std::move(box), DensitySpec::uniform(), BiasSpec::linear(alpha), kappa,
                      CurvatureSpec::quadratic());
}

// Uniform on [0, 1] with g(s) = s + beta and quadratic curvature.
inline DelegationProblem uniform_affine(double beta, double kappa = 1.0) {
  return make_problem(1, make_box({0.0}, {1.0}), DensitySpec::uniform(),
                      BiasSpec::affine(vec1(beta)), kappa, CurvatureSpec::quadratic());
}

}  // namespace deleg::testing
