#include "deleg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace deleg {

namespace {

constexpr long kChunk = 8192;

// State sampler: pure function of the sample counter.
class StateSampler {
 public:
  StateSampler(const DelegationProblem& problem, std::uint64_t seed)
      : problem_(problem), rng_(seed) {
    if (problem.density.kind == DensitySpec::Kind::analytic) {
      if (problem.n != 1)
        throw std::invalid_argument("analytic density sampling is supported in 1D only");
      build_inverse_cdf();
    }
  }

  Vector draw(long index) const {
    Vector s(problem_.n);
    if (problem_.density.kind == DensitySpec::Kind::uniform) {
      for (int d = 0; d < problem_.n; ++d) {
        const double u = rng_.uniform(static_cast<std::uint64_t>(index), d);
        s[d] = problem_.state_space.lo[d] +
               u * (problem_.state_space.hi[d] - problem_.state_space.lo[d]);
      }
      return s;
    }
    const double u = rng_.uniform(static_cast<std::uint64_t>(index), 0);
    s[0] = inverse_cdf(u);
    return s;
  }

 private:
  void build_inverse_cdf() {
    const double lo = problem_.state_space.lo[0];
    const double hi = problem_.state_space.hi[0];
    const int cells = 4096;
    grid_.resize(cells + 1);
    cdf_.resize(cells + 1);
    cdf_[0] = 0.0;
    grid_[0] = lo;
    double prev_f = problem_.density_at(vec1(lo));
    CompensatedSum acc;
    for (int i = 1; i <= cells; ++i) {
      grid_[i] = lo + (hi - lo) * i / cells;
      const double f = problem_.density_at(vec1(grid_[i]));
      acc.add(0.5 * (prev_f + f) * (hi - lo) / cells);
      cdf_[i] = acc.value();
      prev_f = f;
    }
    const double total = cdf_.back();
    if (total <= 0.0) throw std::invalid_argument("density has nonpositive mass");
    for (double& c : cdf_) c /= total;
  }

  double inverse_cdf(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.front();
    if (it == cdf_.end()) return grid_.back();
    const long j = it - cdf_.begin();
    const double c0 = cdf_[j - 1], c1 = cdf_[j];
    const double t = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
    return grid_[j - 1] + t * (grid_[j] - grid_[j - 1]);
  }

  const DelegationProblem& problem_;
  CounterRng rng_;
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

// Deterministic chunked reduction: per-chunk compensated sums are merged in
// chunk order, so any thread count produces identical bits.
McEstimate run_mc(const DelegationProblem& problem, std::uint64_t seed, long samples, int threads,
                  const std::function<double(const Vector&)>& payoff) {
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  threads = std::max(1, threads);

  const StateSampler sampler(problem, seed);
  const long num_chunks = (samples + kChunk - 1) / kChunk;
  std::vector<CompensatedSum> sums(num_chunks), squares(num_chunks);

  auto work = [&](long chunk) {
    const long begin = chunk * kChunk;
    const long end = std::min(begin + kChunk, samples);
    CompensatedSum sum, square;
    for (long i = begin; i < end; ++i) {
      const double value = payoff(sampler.draw(i));
      sum.add(value);
      square.add(value * value);
    }
    sums[chunk] = sum;
    squares[chunk] = square;
  };

  if (threads == 1 || num_chunks == 1) {
    for (long chunk = 0; chunk < num_chunks; ++chunk) work(chunk);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        for (long chunk = t; chunk < num_chunks; chunk += threads) work(chunk);
      });
    }
    for (auto& th : pool) th.join();
  }

  CompensatedSum total, total_sq;
  for (long chunk = 0; chunk < num_chunks; ++chunk) {
    total.add(sums[chunk]);
    total_sq.add(squares[chunk]);
  }
  McEstimate est;
  est.samples = samples;
  est.estimate = total.value() / samples;
  const double variance =
      std::max(0.0, total_sq.value() / samples - est.estimate * est.estimate);
  est.standard_error = std::sqrt(variance / samples);
  return est;
}

Vector nearest_action_on_curve(const BoundaryCurve& curve, const Vector& s) {
  if (curve_contains(curve, s)) return s;
  return nearest_on_curve(curve, s).point;
}

}  // namespace

McEstimate mc_principal_payoff(const DelegationProblem& problem, const Mechanism& mechanism,
                               long samples, std::uint64_t seed, int threads) {
  const size_t pieces = mechanism.lotteries.size();
  std::vector<Vector> mean(pieces);
  std::vector<double> expected_b(pieces);
  for (size_t k = 0; k < pieces; ++k) {
    mean[k] = mechanism.lotteries[k].mean();
    expected_b[k] = lottery_expected_b(problem, mechanism.lotteries[k]);
  }
  return run_mc(problem, seed, samples, threads, [&](const Vector& s) {
    const long k = menu_eval(mechanism.menu, s).second;
    return mean[k].dot(problem.bias_at(s)) + problem.kappa * expected_b[k];
  });
}

McEstimate mc_delegation_payoff(const DelegationProblem& problem, const BoundaryCurve& curve,
                                long samples, std::uint64_t seed, int threads) {
  if (problem.n != 2) throw std::invalid_argument("curve delegation payoff is two-dimensional");
  return run_mc(problem, seed, samples, threads, [&](const Vector& s) {
    const Vector a = nearest_action_on_curve(curve, s);
    return a.dot(problem.bias_at(s)) + problem.kappa * problem.curvature_b(a);
  });
}

McEstimate mc_box_delegation_payoff(const DelegationProblem& problem, const Box& action_box,
                                    long samples, std::uint64_t seed, int threads) {
  if (action_box.dim() != problem.n)
    throw std::invalid_argument("action box dimension mismatch");
  return run_mc(problem, seed, samples, threads, [&](const Vector& s) {
    Vector a(problem.n);
    for (int d = 0; d < problem.n; ++d)
      a[d] = std::clamp(s[d], action_box.lo[d], action_box.hi[d]);
    return a.dot(problem.bias_at(s)) + problem.kappa * problem.curvature_b(a);
  });
}

McEstimate mc_payoff_difference(const DelegationProblem& problem, const BoundaryCurve& curve,
                                const Box& action_box, long samples, std::uint64_t seed,
                                int threads) {
  if (problem.n != 2) throw std::invalid_argument("paired comparison is two-dimensional");
  return run_mc(problem, seed, samples, threads, [&](const Vector& s) {
    const Vector a_curve = nearest_action_on_curve(curve, s);
    Vector a_box(problem.n);
    for (int d = 0; d < problem.n; ++d)
      a_box[d] = std::clamp(s[d], action_box.lo[d], action_box.hi[d]);
    const double p_curve =
        a_curve.dot(problem.bias_at(s)) + problem.kappa * problem.curvature_b(a_curve);
    const double p_box =
        a_box.dot(problem.bias_at(s)) + problem.kappa * problem.curvature_b(a_box);
    return p_curve - p_box;
  });
}

IdentityCheck divergence_identity_check_interval(const DelegationProblem& problem, double s1,
                                                 double s2, const GridSpec& spec) {
  if (problem.n != 1 || problem.curvature.kind != CurvatureSpec::Kind::quadratic)
    throw std::domain_error("exact interval identity requires 1D quadratic curvature");
  const SignedMeasureGrid measure = discretize_measure(problem, spec);
  const double cell = measure.cell_widths[0];

  CompensatedSum direct;
  Vector u_values(measure.size());
  for (long i = 0; i < measure.size(); ++i) {
    const Vector s = measure.node(i);
    const double a = std::clamp(s[0], s1, s2);
    u_values[i] = a * s[0] - 0.5 * a * a;
    if (measure.tags[i] != SignedMeasureGrid::Tag::interior) continue;
    const double drift = problem.bias_at(s)[0] - problem.kappa * s[0];
    direct.add((a * drift + problem.kappa * u_values[i]) * problem.density_at(s) * cell);
  }

  IdentityCheck check;
  check.direct = direct.value();
  check.weighted = integrate(measure, u_values);
  check.residual = std::abs(check.direct - check.weighted);
  return check;
}

IdentityCheck divergence_identity_check(const DelegationProblem& problem, const Menu& menu,
                                        const GridSpec& spec) {
  const FeasibilityVerdict verdict = check_feasible_menu(problem, menu, 1e-9);
  if (!verdict.feasible)
    throw std::domain_error("divergence identity requires a feasible menu");

  const SignedMeasureGrid measure = discretize_measure(problem, spec);

  double cell_volume = 1.0;
  for (int d = 0; d < problem.n; ++d) cell_volume *= measure.cell_widths[d];

  CompensatedSum direct;
  Vector menu_values(measure.size());
  for (long i = 0; i < measure.size(); ++i) {
    const Vector s = measure.node(i);
    const auto [value, piece] = menu_eval(menu, s);
    menu_values[i] = value;
    if (measure.tags[i] != SignedMeasureGrid::Tag::interior) continue;
    const Vector grad_u = menu.pieces[piece].a;  // active-piece slope
    const Vector drift = problem.bias_at(s) - problem.kappa * s;
    const double integrand = grad_u.dot(drift) + problem.kappa * value;
    direct.add(integrand * problem.density_at(s) * cell_volume);
  }

  IdentityCheck check;
  check.direct = direct.value();
  check.weighted = integrate(measure, menu_values);
  check.residual = std::abs(check.direct - check.weighted);
  return check;
}

}  // namespace deleg
