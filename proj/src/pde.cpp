#include "pdpap/pde.hpp"

#include "pdpap/error.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>

namespace pdpap {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_coefficients(PdeFamily family, const ControlParam& x) {
  check_family(family, x);
  if (!std::isfinite(x.c) || x.c < 0.0)
    throw CoercivityError("reaction coefficient must be finite and nonnegative, got " +
                          std::to_string(x.c));
  if (x.a && !(x.a->array() > 0.0).all())
    throw CoercivityError("diffusion coefficient must be positive at every node");
  if (x.a && !x.a->allFinite())
    throw CoercivityError("diffusion coefficient must be finite");
}

// Visits every edge with at least one interior endpoint as (p, q, edge weight a_e / h^2).
template <class F>
void for_each_active_edge(const GridSpec& grid, const GridFunction* a, F&& f) {
  const int n = grid.n();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  auto visit = [&](int p, int q) {
    if (grid.is_boundary(p) && grid.is_boundary(q))
      return;
    const double ae = a ? 0.5 * ((*a)[p] + (*a)[q]) : 1.0;
    f(p, q, ae * inv_h2);
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i + 1 < n; ++i)
      visit(grid.node(i, j), grid.node(i + 1, j));
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i < n; ++i)
      visit(grid.node(i, j), grid.node(i, j + 1));
}

std::vector<GridFunction> boundary_fields(const GridSpec& grid,
                                          std::span<const BoundaryTrace> boundary) {
  std::vector<GridFunction> fields;
  fields.reserve(boundary.size());
  for (const auto& trace : boundary)
    fields.push_back(extend_boundary(grid, trace));
  return fields;
}

AssembledSystem assemble_unchecked(const GridSpec& grid, const GridFunction* a, double c,
                                   std::span<const BoundaryTrace> boundary) {
  const int ni = grid.interior_count();
  const auto f = boundary_fields(grid, boundary);
  AssembledSystem system;
  system.boundary.assign(boundary.begin(), boundary.end());
  system.rhs.assign(boundary.size(), Vector::Zero(ni));

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(ni) * 5);
  for (int k = 0; k < ni; ++k)
    triplets.emplace_back(k, k, c);
  for_each_active_edge(grid, a, [&](int p, int q, double weight) {
    const int ip = grid.interior_index(p);
    const int iq = grid.interior_index(q);
    if (ip >= 0 && iq >= 0) {
      triplets.emplace_back(ip, ip, weight);
      triplets.emplace_back(iq, iq, weight);
      triplets.emplace_back(ip, iq, -weight);
      triplets.emplace_back(iq, ip, -weight);
      return;
    }
    const int inner = ip >= 0 ? ip : iq;
    const int outer = ip >= 0 ? q : p;
    triplets.emplace_back(inner, inner, weight);
    for (std::size_t i = 0; i < f.size(); ++i)
      system.rhs[i][inner] += weight * f[i][outer];
  });
  system.A.resize(ni, ni);
  system.A.setFromTriplets(triplets.begin(), triplets.end());
  system.A.makeCompressed();
  return system;
}

void check_bundle(const GridSpec& grid, const StateBundle& b, std::size_t m, const char* what) {
  if (b.size() != m)
    throw SizeMismatch(std::string(what) + " bundle has the wrong number of fields");
  for (const auto& field : b.fields)
    if (field.size() != grid.node_count())
      throw SizeMismatch(std::string(what) + " field does not match grid");
}

} // namespace

AssembledSystem assemble(PdeFamily family, const GridSpec& grid, const ControlParam& x,
                         std::span<const BoundaryTrace> boundary) {
  check_coefficients(family, x);
  if (x.a && x.a->size() != grid.node_count())
    throw SizeMismatch("diffusion field does not match grid");
  for (const auto& trace : boundary)
    if (trace.values.size() != grid.boundary_count())
      throw SizeMismatch("boundary trace does not match grid");
  return assemble_unchecked(grid, x.a ? &*x.a : nullptr, x.c, boundary);
}

SystemAssembler::SystemAssembler(PdeFamily family, GridSpec grid,
                                 std::vector<BoundaryTrace> boundary)
    : family_(family), grid_(grid), boundary_(std::move(boundary)) {
  for (const auto& trace : boundary_)
    if (trace.values.size() != grid_.boundary_count())
      throw SizeMismatch("boundary trace does not match grid");
  if (family_ == PdeFamily::ScalarReaction) {
    AssembledSystem base = assemble_unchecked(grid_, nullptr, 0.0, boundary_);
    laplacian_ = std::move(base.A);
    laplace_rhs_ = std::move(base.rhs);
  }
}

AssembledSystem SystemAssembler::assemble(const ControlParam& x) const {
  if (family_ == PdeFamily::DiffusionReaction)
    return pdpap::assemble(family_, grid_, x, boundary_);
  check_coefficients(family_, x);
  AssembledSystem system{laplacian_, laplace_rhs_, boundary_};
  for (Eigen::Index k = 0; k < system.A.outerSize(); ++k)
    system.A.coeffRef(k, k) += x.c;
  return system;
}

Vector restrict_interior(const GridSpec& grid, const GridFunction& f) {
  if (f.size() != grid.node_count())
    throw SizeMismatch("grid function does not match grid");
  const int inner = grid.n() - 2;
  Vector out(grid.interior_count());
  for (int j = 0; j < inner; ++j)
    out.segment(j * inner, inner) = f.segment(grid.node(1, j + 1), inner);
  return out;
}

void scatter_interior(const GridSpec& grid, const Vector& interior, GridFunction& f) {
  if (interior.size() != grid.interior_count() || f.size() != grid.node_count())
    throw SizeMismatch("interior vector does not match grid");
  const int inner = grid.n() - 2;
  for (int j = 0; j < inner; ++j)
    f.segment(grid.node(1, j + 1), inner) = interior.segment(j * inner, inner);
}

namespace {

void factorize(Eigen::SimplicialLDLT<SparseMatrix>& ldlt, const SparseMatrix& A) {
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success)
    throw SingularSystem("factorization of the system matrix failed");
}

} // namespace

StateBundle solve_exact(const GridSpec& grid, const AssembledSystem& system) {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  factorize(ldlt, system.A);
  StateBundle u;
  u.role = BundleRole::Primal;
  u.fields.reserve(system.rhs.size());
  for (std::size_t i = 0; i < system.rhs.size(); ++i) {
    GridFunction field = extend_boundary(grid, system.boundary[i]);
    const Vector interior = ldlt.solve(system.rhs[i]);
    if (ldlt.info() != Eigen::Success || !interior.allFinite())
      throw SingularSystem("solve with the system matrix failed");
    scatter_interior(grid, interior, field);
    u.fields.push_back(std::move(field));
  }
  return u;
}

std::vector<Vector> adjoint_rhs(const GridSpec& grid, const StateBundle& u,
                                std::span<const GridFunction> z, double beta_hat) {
  check_bundle(grid, u, z.size(), "state");
  std::vector<Vector> out;
  out.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i].size() != grid.node_count())
      throw SizeMismatch("measurement does not match grid");
    out.push_back(-2.0 * beta_hat * restrict_interior(grid, u.fields[i] - z[i]));
  }
  return out;
}

StateBundle solve_adjoint_exact(const GridSpec& grid, const AssembledSystem& system,
                                const StateBundle& u, std::span<const GridFunction> z,
                                double beta_hat) {
  const auto rhs = adjoint_rhs(grid, u, z, beta_hat);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  factorize(ldlt, system.A);
  StateBundle w;
  w.role = BundleRole::Adjoint;
  for (const auto& b : rhs) {
    GridFunction field = GridFunction::Zero(grid.node_count());
    scatter_interior(grid, ldlt.solve(b), field);
    w.fields.push_back(std::move(field));
  }
  return w;
}

ControlGradient riesz_gradient(PdeFamily family, const GridSpec& grid, const StateBundle& u,
                               const StateBundle& w) {
  check_bundle(grid, u, u.size(), "state");
  check_bundle(grid, w, u.size(), "adjoint");
  ControlGradient g = ControlGradient::zeros(family, grid);
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const GridFunction& ui = u.fields[i];
    const GridFunction& wi = w.fields[i];
    for (int k = 0; k < grid.interior_count(); ++k) {
      const int node = grid.interior_to_node(k);
      g.c += ui[node] * wi[node];
    }
    if (family != PdeFamily::DiffusionReaction)
      continue;
    // d/da_p of sum_e a_e (D u)_e (D w)_e with a_e = (a_p + a_q) / 2; w is taken
    // as zero on the boundary.
    GridFunction& ga = *g.a;
    for_each_active_edge(grid, nullptr, [&](int p, int q, double) {
      const double wp = grid.is_boundary(p) ? 0.0 : wi[p];
      const double wq = grid.is_boundary(q) ? 0.0 : wi[q];
      const double contrib = 0.5 * inv_h2 * (ui[q] - ui[p]) * (wq - wp);
      ga[p] += contrib;
      ga[q] += contrib;
    });
  }
  return g;
}

double bilinear_form(PdeFamily family, const GridSpec& grid, const ControlParam& x,
                     const StateBundle& u, const StateBundle& w) {
  check_bundle(grid, u, u.size(), "state");
  check_bundle(grid, w, u.size(), "adjoint");
  const auto points = boundary_parametrization(grid);
  std::vector<BoundaryTrace> traces;
  for (const auto& field : u.fields) {
    BoundaryTrace t{Vector(static_cast<Eigen::Index>(points.size()))};
    for (std::size_t k = 0; k < points.size(); ++k)
      t.values[static_cast<Eigen::Index>(k)] = field[points[k].node];
    traces.push_back(std::move(t));
  }
  const AssembledSystem system = assemble(family, grid, x, traces);
  double b = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vector ui = restrict_interior(grid, u.fields[i]);
    const Vector wi = restrict_interior(grid, w.fields[i]);
    b += wi.dot(system.A * ui - system.rhs[i]);
  }
  return b;
}

double data_misfit(const StateBundle& u, std::span<const GridFunction> z, double beta_hat) {
  if (u.size() != z.size())
    throw SizeMismatch("state and measurement counts differ");
  double q = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    q += (u.fields[i] - z[i]).squaredNorm();
  return beta_hat * q;
}

double normalized_beta(double beta, std::span<const GridFunction> z) {
  if (z.empty())
    throw ConfigError("no measurements");
  Vector mean = Vector::Zero(z.front().size());
  for (const auto& zi : z)
    mean += zi;
  mean /= static_cast<double>(z.size());
  const double nrm2 = mean.squaredNorm();
  if (nrm2 == 0.0)
    throw ConfigError("mean measurement is zero; cannot normalize the data term");
  return beta / (2.0 * nrm2);
}

OptimalityResiduals optimality_residuals(const InverseProblem& problem, const ControlParam& x,
                                         const StateBundle& u, const StateBundle& w,
                                         const DualVar& y) {
  const GridSpec& grid = problem.grid;
  const AssembledSystem system = assemble(problem.family, grid, x, problem.boundary);
  const auto adj = adjoint_rhs(grid, u, problem.z, problem.beta_hat);
  OptimalityResiduals res;
  double pde2 = 0.0;
  double adj2 = 0.0;
  for (std::size_t i = 0; i < problem.m(); ++i) {
    pde2 += (system.A * restrict_interior(grid, u.fields[i]) - system.rhs[i]).squaredNorm();
    adj2 += (system.A * restrict_interior(grid, w.fields[i]) - adj[i]).squaredNorm();
  }
  res.pde = std::sqrt(pde2);
  res.adjoint = std::sqrt(adj2);

  const CouplingOperator K(grid, problem.family, problem.reg);
  const ControlGradient g = riesz_gradient(problem.family, grid, u, w) + K.adjoint(y);
  res.control = (x - prox_F(x - g, 1.0, problem.reg)).norm();

  if (K.active() && !y.empty()) {
    DualVar shifted = y;
    const DualVar kx = K.apply(x);
    shifted.y.dx += kx.y.dx;
    shifted.y.dy += kx.y.dy;
    const DualVar projected = prox_Gstar(grid, shifted, 1.0, problem.reg);
    res.dual = std::sqrt((y.y.dx - projected.y.dx).squaredNorm() +
                         (y.y.dy - projected.y.dy).squaredNorm());
  }
  return res;
}

} // namespace pdpap
