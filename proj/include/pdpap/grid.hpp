#pragma once

#include <Eigen/Core>

#include <vector>

namespace pdpap {

using Vector = Eigen::VectorXd;

/// Nodal scalar field on the grid, indexed row-major: node(i, j) = j * N + i,
/// where i runs along x and j along y.
using GridFunction = Vector;

/// Regular N x N node grid on the unit square.
class GridSpec {
public:
  /// Throws ConfigError when n_per_side < 3.
  explicit GridSpec(int n_per_side);

  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }

  int node_count() const noexcept { return n_ * n_; }
  int interior_count() const noexcept { return (n_ - 2) * (n_ - 2); }
  int boundary_count() const noexcept { return 4 * (n_ - 1); }
  int horizontal_edge_count() const noexcept { return (n_ - 1) * n_; }
  int vertical_edge_count() const noexcept { return n_ * (n_ - 1); }

  int node(int i, int j) const noexcept { return j * n_ + i; }
  int column(int node) const noexcept { return node % n_; }
  int row(int node) const noexcept { return node / n_; }
  bool is_boundary(int node) const noexcept;

  /// Position of a node in [0,1]^2.
  double x(int node) const noexcept { return column(node) * h_; }
  double y(int node) const noexcept { return row(node) * h_; }

  /// Interior numbering, row-major over 1 <= i, j <= N-2. Returns -1 for boundary nodes.
  int interior_index(int node) const noexcept;
  int interior_to_node(int k) const noexcept { return node(k % (n_ - 2) + 1, k / (n_ - 2) + 1); }

  /// Horizontal edge (i,j)-(i+1,j) and vertical edge (i,j)-(i,j+1).
  int horizontal_edge(int i, int j) const noexcept { return j * (n_ - 1) + i; }
  int vertical_edge(int i, int j) const noexcept { return j * n_ + i; }

  bool operator==(const GridSpec&) const = default;

private:
  int n_;
  double h_;
};

/// Values on grid edges: dx on horizontal edges, dy on vertical edges.
struct EdgeField {
  Vector dx;
  Vector dy;

  static EdgeField zeros(const GridSpec& grid);
  bool empty() const noexcept { return dx.size() == 0 && dy.size() == 0; }
  double dot(const EdgeField& other) const;
};

/// Values on the 4(N-1) boundary nodes in perimeter order.
struct BoundaryTrace {
  Vector values;
};

struct BoundaryPoint {
  int node;
  double t; ///< normalized arclength in [0, 1)
};

/// Perimeter walk starting at (0,0), counterclockwise, perimeter normalized to 1.
std::vector<BoundaryPoint> boundary_parametrization(const GridSpec& grid);

/// Boundary data for condition index i >= 1: cos(2 pi j t) for i = 2j-1,
/// sin(2 pi j t) for i = 2j.
BoundaryTrace boundary_data(const GridSpec& grid, int i);

/// Evaluates the trigonometric boundary family at a single perimeter coordinate.
double boundary_function(int i, double t);

/// Forward differences from nodes to edges, scaled by 1/h.
EdgeField gradient(const GridSpec& grid, const GridFunction& f);

/// Negative adjoint of gradient with respect to the Euclidean inner products:
/// <gradient(f), e> = -<f, divergence(e)>.
GridFunction divergence(const GridSpec& grid, const EdgeField& e);

/// Forward differences with an arbitrary scale factor; gradient() uses 1/h.
EdgeField forward_difference(const GridSpec& grid, const GridFunction& f, double scale);

/// Transpose of forward_difference with the same scale.
GridFunction forward_difference_transpose(const GridSpec& grid, const EdgeField& e, double scale);

/// Embeds a boundary trace into a full nodal field (interior zero).
GridFunction extend_boundary(const GridSpec& grid, const BoundaryTrace& trace);

} // namespace pdpap
