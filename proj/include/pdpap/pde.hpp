#pragma once

#include "pdpap/control.hpp"
#include "pdpap/grid.hpp"
#include "pdpap/prox.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace pdpap {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Interior-node system A_x u = b_i(x) for every boundary condition i.
/// Dirichlet values are eliminated, so A is symmetric and shared by the adjoint.
struct AssembledSystem {
  SparseMatrix A;
  std::vector<Vector> rhs;
  std::vector<BoundaryTrace> boundary;
};

enum class BundleRole { Primal, Adjoint };

/// m full nodal fields. Primal fields carry the boundary data on boundary
/// nodes; adjoint fields are zero there.
struct StateBundle {
  std::vector<GridFunction> fields;
  BundleRole role = BundleRole::Primal;

  std::size_t size() const noexcept { return fields.size(); }
};

/// Builds A_x = D^T diag(a_e) D + c I on interior nodes, with D the 1/h
/// forward-difference gradient and a_e the mean of the two endpoint values
/// (a = 1 for ScalarReaction). rhs_i holds the eliminated boundary couplings.
/// Throws CoercivityError for nonpositive diffusion values or negative c.
AssembledSystem assemble(PdeFamily family, const GridSpec& grid, const ControlParam& x,
                         std::span<const BoundaryTrace> boundary);

/// Caches the x-independent parts of the assembly. ScalarReaction reuses the
/// Laplacian and right-hand sides and only shifts the diagonal.
class SystemAssembler {
public:
  SystemAssembler(PdeFamily family, GridSpec grid, std::vector<BoundaryTrace> boundary);

  AssembledSystem assemble(const ControlParam& x) const;

  PdeFamily family() const noexcept { return family_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const std::vector<BoundaryTrace>& boundary() const noexcept { return boundary_; }

private:
  PdeFamily family_;
  GridSpec grid_;
  std::vector<BoundaryTrace> boundary_;
  SparseMatrix laplacian_;          // ScalarReaction only
  std::vector<Vector> laplace_rhs_; // ScalarReaction only
};

/// Exact solves of every boundary condition. Throws SingularSystem.
StateBundle solve_exact(const GridSpec& grid, const AssembledSystem& system);

/// Restriction of a nodal field to the interior numbering, and the inverse embedding.
Vector restrict_interior(const GridSpec& grid, const GridFunction& f);
void scatter_interior(const GridSpec& grid, const Vector& interior, GridFunction& f);

/// -grad Q(u) restricted to interior nodes: -2 beta_hat (u_i - z_i).
std::vector<Vector> adjoint_rhs(const GridSpec& grid, const StateBundle& u,
                                std::span<const GridFunction> z, double beta_hat);

/// Exact adjoint solves A w_i = -grad Q(u_i). Throws SingularSystem.
StateBundle solve_adjoint_exact(const GridSpec& grid, const AssembledSystem& system,
                                const StateBundle& u, std::span<const GridFunction> z,
                                double beta_hat);

/// Riesz representation of the control derivative of B(u, w; x) = sum_i <A_x u_i - b_i(x), w_i>.
/// Scalar part: sum_i <u_i, w_i>. Field part: the transpose of the affine dependence
/// of the assembly on a.
ControlGradient riesz_gradient(PdeFamily family, const GridSpec& grid, const StateBundle& u,
                               const StateBundle& w);

/// B(u, w; x) evaluated through the full nodal operator; used to check riesz_gradient.
double bilinear_form(PdeFamily family, const GridSpec& grid, const ControlParam& x,
                     const StateBundle& u, const StateBundle& w);

/// Q(u) = beta_hat sum_i |u_i - z_i|^2 over all nodes.
double data_misfit(const StateBundle& u, std::span<const GridFunction> z, double beta_hat);

/// beta_hat = beta / (2 |z_bar|^2), z_bar the nodal mean of the measurements.
double normalized_beta(double beta, std::span<const GridFunction> z);

/// Everything that defines one inverse problem instance.
struct InverseProblem {
  PdeFamily family = PdeFamily::ScalarReaction;
  GridSpec grid{3};
  std::vector<BoundaryTrace> boundary;
  std::vector<GridFunction> z;
  double beta_hat = 0.0;
  RegConfig reg;

  std::size_t m() const noexcept { return boundary.size(); }
};

/// Norms of the four optimality-system residuals.
struct OptimalityResiduals {
  double pde = 0;     ///< |A_x u - b(x)|
  double adjoint = 0; ///< |A_x w + grad Q(u)|
  double control = 0; ///< |x - prox_F(x - (riesz + K* y))|
  double dual = 0;    ///< |y - prox_G*(y + K x)|
};

OptimalityResiduals optimality_residuals(const InverseProblem& problem, const ControlParam& x,
                                         const StateBundle& u, const StateBundle& w,
                                         const DualVar& y);

} // namespace pdpap
