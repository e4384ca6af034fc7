#pragma once

#include <utility>
#include <vector>

#include "deleg/core.hpp"

namespace deleg {

// Standard computational form: min cost.x  s.t.  A x = rhs, x >= 0, with A
// stored column-wise sparse.
struct SparseLP {
  long rows = 0;
  long cols = 0;
  std::vector<std::vector<std::pair<long, double>>> columns;
  Vector cost;
  Vector rhs;
};

enum class SimplexStatus { optimal, infeasible, unbounded, iteration_limit };

struct SimplexResult {
  SimplexStatus status = SimplexStatus::iteration_limit;
  Vector x;
  Vector duals;  // equality-row multipliers at the final basis
  double objective = 0.0;
  long iterations = 0;
  double residual = 0.0;  // ||A x - rhs||_inf at exit
};

// Two-phase revised simplex with Bland's entering/leaving rule throughout, a
// dense basis inverse with periodic refactorization, and no randomness: the
// same input bits always produce the same output bits.
SimplexResult simplex_solve(const SparseLP& lp, long max_pivots = 1000000);

}  // namespace deleg
