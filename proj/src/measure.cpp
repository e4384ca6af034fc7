#include "deleg/measure.hpp"

#include <cmath>

namespace deleg {

double nu_interior_unchecked(const DelegationProblem& problem, const Vector& s) {
  const double f = problem.density_at(s);
  const Vector grad_f = problem.density_grad(s);
  const Vector drift = problem.bias_at(s) - problem.kappa * s;
  const double div_drift = problem.bias_jacobian(s).trace() - problem.kappa * problem.n;
  return problem.kappa * f - div_drift * f - drift.dot(grad_f);
}

double nu_interior(const DelegationProblem& problem, const Vector& s) {
  if (!problem.state_space.strictly_contains(s))
    throw std::domain_error("nu_interior requires a point strictly inside the state space");
  return nu_interior_unchecked(problem, s);
}

double nu_boundary(const DelegationProblem& problem, const Vector& s, const Vector& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw std::domain_error("boundary normal must be unit length");
  const Box& box = problem.state_space;
  bool on_face = false;
  for (int i = 0; i < problem.n; ++i) {
    if (s[i] < box.lo[i] - 1e-12 || s[i] > box.hi[i] + 1e-12)
      throw std::domain_error("boundary point lies outside the state space");
    if (std::abs(s[i] - box.lo[i]) <= 1e-12 || std::abs(s[i] - box.hi[i]) <= 1e-12)
      on_face = true;
  }
  if (!on_face) throw std::domain_error("point is not on the state-space boundary");
  const Vector drift = problem.bias_at(s) - problem.kappa * s;
  return drift.dot(normal) * problem.density_at(s);
}

std::vector<double> axis_midpoints(double lo, double hi, int cells) {
  const double delta = (hi - lo) / cells;
  std::vector<double> out(cells);
  for (int i = 0; i < cells; ++i) out[i] = lo + (i + 0.5) * delta;
  return out;
}

namespace {

// Row-major iteration over a tensor grid given per-axis coordinate lists.
template <typename F>
void for_each_tensor(const std::vector<std::vector<double>>& axes, F&& fn) {
  const int n = static_cast<int>(axes.size());
  std::vector<int> idx(n, 0);
  Vector point(n);
  while (true) {
    for (int i = 0; i < n; ++i) point[i] = axes[i][idx[i]];
    fn(point);
    int d = n - 1;
    while (d >= 0) {
      if (++idx[d] < static_cast<int>(axes[d].size())) break;
      idx[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
}

}  // namespace

SignedMeasureGrid discretize_measure(const DelegationProblem& problem, const GridSpec& spec) {
  const int m = spec.cells_per_axis;
  if (m < 3)
    throw std::invalid_argument("grid needs at least 3 interior nodes per axis");

  const int n = problem.n;
  const Box& box = problem.state_space;

  SignedMeasureGrid grid;
  grid.domain = box;
  grid.cells_per_axis = m;
  grid.cell_widths.resize(n);
  for (int i = 0; i < n; ++i) grid.cell_widths[i] = (box.hi[i] - box.lo[i]) / m;

  long interior_count = 1;
  for (int i = 0; i < n; ++i) interior_count *= m;
  long face_count = (n == 1) ? 1 : interior_count / m;  // nodes per face
  const long total = interior_count + 2 * n * face_count;

  grid.nodes.resize(total, n);
  grid.weights.resize(total);
  grid.normals = Matrix::Zero(total, n);
  grid.tags.assign(total, SignedMeasureGrid::Tag::interior);

  double cell_volume = 1.0;
  for (int i = 0; i < n; ++i) cell_volume *= grid.cell_widths[i];

  std::vector<std::vector<double>> mids(n);
  for (int i = 0; i < n; ++i) mids[i] = axis_midpoints(box.lo[i], box.hi[i], m);

  long row = 0;
  for_each_tensor(mids, [&](const Vector& s) {
    grid.nodes.row(row) = s.transpose();
    grid.weights[row] = nu_interior(problem, s) * cell_volume;
    ++row;
  });

  // Faces: for axis d and each side, tensor-product midpoints on the free
  // axes; the face element is the product of free-axis cell widths (1 in 1D).
  for (int d = 0; d < n; ++d) {
    for (int side = 0; side < 2; ++side) {
      const double coord = (side == 0) ? box.lo[d] : box.hi[d];
      Vector normal = Vector::Zero(n);
      normal[d] = (side == 0) ? -1.0 : 1.0;
      double face_element = 1.0;
      std::vector<std::vector<double>> face_axes(n);
      for (int i = 0; i < n; ++i) {
        if (i == d) {
          face_axes[i] = {coord};
        } else {
          face_axes[i] = mids[i];
          face_element *= grid.cell_widths[i];
        }
      }
      for_each_tensor(face_axes, [&](const Vector& s) {
        grid.nodes.row(row) = s.transpose();
        grid.weights[row] = nu_boundary(problem, s, normal) * face_element;
        grid.normals.row(row) = normal.transpose();
        grid.tags[row] = SignedMeasureGrid::Tag::boundary;
        ++row;
      });
    }
  }

  CompensatedSum mass;
  std::vector<CompensatedSum> moment(n);
  for (long i = 0; i < total; ++i) {
    mass.add(grid.weights[i]);
    for (int k = 0; k < n; ++k) moment[k].add(grid.weights[i] * grid.nodes(i, k));
  }
  grid.total_mass = mass.value();
  grid.barycenter = Vector::Zero(n);
  if (std::abs(grid.total_mass) > 1e-300)
    for (int k = 0; k < n; ++k) grid.barycenter[k] = moment[k].value() / grid.total_mass;
  return grid;
}

double integrate(const SignedMeasureGrid& measure, const Vector& values) {
  if (values.size() != measure.size())
    throw std::domain_error("value vector length does not match measure nodes");
  CompensatedSum acc;
  for (long i = 0; i < measure.size(); ++i) acc.add(measure.weights[i] * values[i]);
  return acc.value();
}

}  // namespace deleg
