#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace deleg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Axis-aligned box [lo_i, hi_i]^n.
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }

  Vector center() const { return 0.5 * (lo + hi); }

  bool contains(const Vector& s, double tol = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (s[i] < lo[i] - tol || s[i] > hi[i] + tol) return false;
    return true;
  }

  bool strictly_contains(const Vector& s, double margin = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (s[i] <= lo[i] + margin || s[i] >= hi[i] - margin) return false;
    return true;
  }

  // Box scaled about its center by factor rho.
  Box scaled(double rho) const {
    Box out;
    const Vector c = center();
    out.lo = c + rho * (lo - c);
    out.hi = c + rho * (hi - c);
    return out;
  }
};

inline Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Box b;
  b.lo = Eigen::Map<const Vector>(std::data(lo), static_cast<long>(lo.size()));
  b.hi = Eigen::Map<const Vector>(std::data(hi), static_cast<long>(hi.size()));
  return b;
}

inline Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

inline Vector vec2(double x, double y) {
  Vector v(2);
  v[0] = x;
  v[1] = y;
  return v;
}

// Thrown when an iterative solver fails to converge; carries the last residual.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Neumaier compensated accumulator.  Summation order is fixed by the caller,
// so reductions are reproducible bit-for-bit regardless of chunking.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Counter-based generator: the j-th draw of sample i is a pure function of
// (seed, i, j), so parallel sampling is order-independent.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter, std::uint64_t slot) const {
    std::uint64_t x = seed_;
    x ^= 0x9e3779b97f4a7c15ull + counter * 0xbf58476d1ce4e5b9ull;
    x = mix(x);
    x ^= 0x94d049bb133111ebull + slot * 0xd6e8feb86659fd93ull;
    x = mix(x);
    return mix(x + counter);
  }

  // Uniform draw in [0, 1).
  double uniform(std::uint64_t counter, std::uint64_t slot) const {
    return static_cast<double>(bits(counter, slot) >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t seed_;
};

}  // namespace deleg
