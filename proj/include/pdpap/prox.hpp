#pragma once

#include "pdpap/control.hpp"
#include "pdpap/grid.hpp"

namespace pdpap {

/// Parameters of F(x) = (alpha/2)|x|^2 + indicator of [lambda, 1/lambda] and
/// G(Kx) = gamma * sum_nodes |(Kx)_node|_2.
struct RegConfig {
  double alpha = 0.0;
  double lambda = 0.1;
  double gamma = 0.0;

  double lower() const noexcept { return lambda; }
  double upper() const noexcept { return 1.0 / lambda; }
  /// Throws ConfigError unless 0 < lambda < 1 and alpha, gamma >= 0.
  void validate() const;
};

/// Dual variable of the total-variation term, living on grid edges.
/// Empty when the coupling operator is inactive.
struct DualVar {
  EdgeField y;

  bool empty() const noexcept { return y.empty(); }
};

/// prox_{tau F}: componentwise clamp(v / (1 + tau alpha), lambda, 1/lambda).
ControlParam prox_F(const ControlParam& v, double tau, const RegConfig& cfg);
double prox_F_scalar(double v, double tau, const RegConfig& cfg);

/// prox_{sigma G*}: projection of each node's (dx, dy) pair onto the ball of
/// radius gamma. Independent of sigma since G* is an indicator.
DualVar prox_Gstar(const GridSpec& grid, const DualVar& y, double sigma, const RegConfig& cfg);

/// Euclidean norm of each node's (dx, dy) pair; edges missing at the last
/// column or row count as zero.
Vector pointwise_norms(const GridSpec& grid, const EdgeField& e);

/// Linear coupling K: unit-step forward differences of the diffusion field,
/// zero on the scalar part. Inactive (the zero operator with an empty range)
/// when gamma == 0.
class CouplingOperator {
public:
  /// Throws ConfigError for ScalarReaction with gamma > 0.
  CouplingOperator(const GridSpec& grid, PdeFamily family, const RegConfig& cfg);

  bool active() const noexcept { return active_; }
  const GridSpec& grid() const noexcept { return grid_; }

  DualVar apply(const ControlParam& x) const;
  ControlGradient adjoint(const DualVar& y) const;
  DualVar zero_dual() const;

  /// G(Kx), the total variation of the diffusion field scaled by gamma.
  double g_value(const ControlParam& x) const;

private:
  GridSpec grid_;
  PdeFamily family_;
  double gamma_;
  bool active_;
};

DualVar apply_K(const CouplingOperator& K, const ControlParam& x);
ControlGradient apply_K_adjoint(const CouplingOperator& K, const DualVar& y);

/// Power-iteration estimate of |K| for the unit-step 2-D difference gradient.
double estimate_K_norm(const GridSpec& grid, double rel_tol = 1e-6);
/// 0 for an inactive operator.
double estimate_K_norm(const CouplingOperator& K, double rel_tol = 1e-6);

} // namespace pdpap
