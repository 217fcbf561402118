#include "pdpap/prox.hpp"

#include "pdpap/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pdpap {

void RegConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ConfigError("lambda must lie in (0, 1)");
  if (!(alpha >= 0.0))
    throw ConfigError("alpha must be nonnegative");
  if (!(gamma >= 0.0))
    throw ConfigError("gamma must be nonnegative");
}

double prox_F_scalar(double v, double tau, const RegConfig& cfg) {
  return std::clamp(v / (1.0 + tau * cfg.alpha), cfg.lower(), cfg.upper());
}

ControlParam prox_F(const ControlParam& v, double tau, const RegConfig& cfg) {
  ControlParam out = v;
  out.c = prox_F_scalar(v.c, tau, cfg);
  if (out.a) {
    const double shrink = 1.0 / (1.0 + tau * cfg.alpha);
    *out.a = (*out.a * shrink).cwiseMax(cfg.lower()).cwiseMin(cfg.upper());
  }
  return out;
}

namespace {

// Calls f(dx_index or -1, dy_index or -1) for each node's forward-difference pair.
template <class F>
void for_each_node_pair(const GridSpec& grid, F&& f) {
  const int n = grid.n();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      f(i + 1 < n ? grid.horizontal_edge(i, j) : -1, j + 1 < n ? grid.vertical_edge(i, j) : -1);
}

} // namespace

Vector pointwise_norms(const GridSpec& grid, const EdgeField& e) {
  Vector norms(grid.node_count());
  Eigen::Index k = 0;
  for_each_node_pair(grid, [&](int ex, int ey) {
    const double vx = ex >= 0 ? e.dx[ex] : 0.0;
    const double vy = ey >= 0 ? e.dy[ey] : 0.0;
    norms[k++] = std::hypot(vx, vy);
  });
  return norms;
}

DualVar prox_Gstar(const GridSpec& grid, const DualVar& y, double /*sigma*/,
                   const RegConfig& cfg) {
  if (y.empty() || cfg.gamma == 0.0)
    return y;
  DualVar out = y;
  const double radius = cfg.gamma;
  for_each_node_pair(grid, [&](int ex, int ey) {
    const double vx = ex >= 0 ? out.y.dx[ex] : 0.0;
    const double vy = ey >= 0 ? out.y.dy[ey] : 0.0;
    const double norm = std::hypot(vx, vy);
    if (norm > radius) {
      const double s = radius / norm;
      if (ex >= 0)
        out.y.dx[ex] *= s;
      if (ey >= 0)
        out.y.dy[ey] *= s;
    }
  });
  return out;
}

CouplingOperator::CouplingOperator(const GridSpec& grid, PdeFamily family, const RegConfig& cfg)
    : grid_(grid), family_(family), gamma_(cfg.gamma), active_(cfg.gamma > 0.0) {
  if (active_ && family == PdeFamily::ScalarReaction)
    throw ConfigError("total variation needs a diffusion field; ScalarReaction requires gamma = 0");
}

DualVar CouplingOperator::zero_dual() const {
  if (!active_)
    return DualVar{};
  return DualVar{EdgeField::zeros(grid_)};
}

DualVar CouplingOperator::apply(const ControlParam& x) const {
  if (!active_)
    return DualVar{};
  if (!x.a)
    throw ConfigError("coupling operator needs a diffusion field");
  return DualVar{forward_difference(grid_, *x.a, 1.0)};
}

ControlGradient CouplingOperator::adjoint(const DualVar& y) const {
  ControlGradient g = ControlGradient::zeros(family_, grid_);
  if (!active_ || y.empty())
    return g;
  *g.a = forward_difference_transpose(grid_, y.y, 1.0);
  return g;
}

double CouplingOperator::g_value(const ControlParam& x) const {
  if (!active_)
    return 0.0;
  return gamma_ * pointwise_norms(grid_, apply(x).y).sum();
}

DualVar apply_K(const CouplingOperator& K, const ControlParam& x) { return K.apply(x); }

ControlGradient apply_K_adjoint(const CouplingOperator& K, const DualVar& y) {
  return K.adjoint(y);
}

double estimate_K_norm(const GridSpec& grid, double rel_tol) {
  // Rayleigh quotients of K^T K underestimate |K|^2 and converge at the square of
  // the eigenvalue ratio; iterate well below rel_tol so the reported norm meets it.
  const double stop = std::min(rel_tol, 1e-6) * 1e-6;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  GridFunction v(grid.node_count());
  for (auto& e : v)
    e = normal(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200000; ++it) {
    const GridFunction kv =
        forward_difference_transpose(grid, forward_difference(grid, v, 1.0), 1.0);
    const double next = v.dot(kv);
    const double nrm = kv.norm();
    if (nrm == 0.0)
      return 0.0;
    v = kv / nrm;
    if (it > 10 && std::abs(next - lambda) <= stop * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

double estimate_K_norm(const CouplingOperator& K, double rel_tol) {
  return K.active() ? estimate_K_norm(K.grid(), rel_tol) : 0.0;
}

} // namespace pdpap
