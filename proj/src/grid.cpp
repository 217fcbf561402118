#include "pdpap/grid.hpp"

#include "pdpap/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pdpap {

GridSpec::GridSpec(int n_per_side) : n_(n_per_side), h_(0.0) {
  if (n_per_side < 3)
    throw ConfigError("grid needs at least 3 nodes per side, got " + std::to_string(n_per_side));
  h_ = 1.0 / static_cast<double>(n_ - 1);
}

bool GridSpec::is_boundary(int node) const noexcept {
  const int i = column(node);
  const int j = row(node);
  return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
}

int GridSpec::interior_index(int node) const noexcept {
  if (is_boundary(node))
    return -1;
  return (row(node) - 1) * (n_ - 2) + (column(node) - 1);
}

EdgeField EdgeField::zeros(const GridSpec& grid) {
  return EdgeField{Vector::Zero(grid.horizontal_edge_count()),
                   Vector::Zero(grid.vertical_edge_count())};
}

double EdgeField::dot(const EdgeField& other) const {
  if (dx.size() != other.dx.size() || dy.size() != other.dy.size())
    throw SizeMismatch("edge field sizes differ");
  return dx.dot(other.dx) + dy.dot(other.dy);
}

std::vector<BoundaryPoint> boundary_parametrization(const GridSpec& grid) {
  const int n = grid.n();
  const int count = grid.boundary_count();
  std::vector<BoundaryPoint> points;
  points.reserve(count);
  auto push = [&](int i, int j) {
    const int k = static_cast<int>(points.size());
    points.push_back({grid.node(i, j), static_cast<double>(k) / count});
  };
  for (int i = 0; i < n - 1; ++i) // bottom, left to right
    push(i, 0);
  for (int j = 0; j < n - 1; ++j) // right, upwards
    push(n - 1, j);
  for (int i = n - 1; i > 0; --i) // top, right to left
    push(i, n - 1);
  for (int j = n - 1; j > 0; --j) // left, downwards
    push(0, j);
  return points;
}

double boundary_function(int i, double t) {
  if (i < 1)
    throw ConfigError("boundary condition index must be >= 1");
  const int j = (i + 1) / 2;
  const double arg = 2.0 * std::numbers::pi * j * t;
  return (i % 2 == 1) ? std::cos(arg) : std::sin(arg);
}

BoundaryTrace boundary_data(const GridSpec& grid, int i) {
  const auto points = boundary_parametrization(grid);
  BoundaryTrace trace{Vector(static_cast<Eigen::Index>(points.size()))};
  for (std::size_t k = 0; k < points.size(); ++k)
    trace.values[static_cast<Eigen::Index>(k)] = boundary_function(i, points[k].t);
  return trace;
}

GridFunction extend_boundary(const GridSpec& grid, const BoundaryTrace& trace) {
  if (trace.values.size() != grid.boundary_count())
    throw SizeMismatch("boundary trace does not match grid");
  GridFunction f = GridFunction::Zero(grid.node_count());
  const auto points = boundary_parametrization(grid);
  for (std::size_t k = 0; k < points.size(); ++k)
    f[points[k].node] = trace.values[static_cast<Eigen::Index>(k)];
  return f;
}

EdgeField forward_difference(const GridSpec& grid, const GridFunction& f, double scale) {
  if (f.size() != grid.node_count())
    throw SizeMismatch("grid function does not match grid");
  const int n = grid.n();
  EdgeField e = EdgeField::zeros(grid);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i + 1 < n; ++i)
      e.dx[grid.horizontal_edge(i, j)] = scale * (f[grid.node(i + 1, j)] - f[grid.node(i, j)]);
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i < n; ++i)
      e.dy[grid.vertical_edge(i, j)] = scale * (f[grid.node(i, j + 1)] - f[grid.node(i, j)]);
  return e;
}

GridFunction forward_difference_transpose(const GridSpec& grid, const EdgeField& e, double scale) {
  if (e.dx.size() != grid.horizontal_edge_count() || e.dy.size() != grid.vertical_edge_count())
    throw SizeMismatch("edge field does not match grid");
  const int n = grid.n();
  GridFunction f = GridFunction::Zero(grid.node_count());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      const double v = scale * e.dx[grid.horizontal_edge(i, j)];
      f[grid.node(i + 1, j)] += v;
      f[grid.node(i, j)] -= v;
    }
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = scale * e.dy[grid.vertical_edge(i, j)];
      f[grid.node(i, j + 1)] += v;
      f[grid.node(i, j)] -= v;
    }
  return f;
}

EdgeField gradient(const GridSpec& grid, const GridFunction& f) {
  return forward_difference(grid, f, 1.0 / grid.h());
}

GridFunction divergence(const GridSpec& grid, const EdgeField& e) {
  return -forward_difference_transpose(grid, e, 1.0 / grid.h());
}

} // namespace pdpap
