#pragma once

#include "pdpap/control.hpp"
#include "pdpap/pde.hpp"
#include "pdpap/prox.hpp"
#include "pdpap/splitting.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pdpap {

/// Step length and over-relaxation schedule.
///   Constant:    tau, sigma, omega fixed.
///   Accelerated: omega_k = 1/sqrt(1 + 2 gF tau_k), tau_{k+1} = tau_k omega_k,
///                sigma_{k+1} = sigma_k / omega_k.
///   LinearRate:  sigma = gF tau / gG, omega = 1/(1 + 2 gF tau), fixed.
struct StepRule {
  enum class Tag { Constant, Accelerated, LinearRate };

  Tag tag = Tag::Constant;
  double tau = 0.0;
  double sigma = 0.0;
  double omega = 1.0;
  double gamma_F = 0.0;
  double gamma_Gstar = 0.0;

  static StepRule constant(double tau, double sigma, double omega = 1.0);
  static StepRule accelerated(double tau0, double sigma0, double gamma_F);
  static StepRule linear_rate(double tau, double gamma_F, double gamma_Gstar);

  /// Throws ConfigError for nonpositive parameters or omega outside (0, 1].
  void validate() const;
};

struct StepParams {
  double tau = 0.0;   ///< tau_{k+1}
  double sigma = 0.0; ///< sigma_{k+1}
  double omega = 1.0; ///< omega_k
};

/// (tau_k, sigma_k) -> (tau_{k+1}, sigma_{k+1}, omega_k).
StepParams advance_step_rule(const StepRule& rule, double tau_k, double sigma_k);

/// Full iterate v = (u, w, x, y) with per-system inner solver states.
struct IterateState {
  ControlParam x;
  ControlParam x_prev;
  StateBundle u;
  StateBundle w;
  DualVar y;
  std::vector<SplitterState> solver_u;
  std::vector<SplitterState> solver_w;
  std::int64_t k = 0;
  double tau = 0.0;   ///< tau_k for the next iteration
  double sigma = 0.0; ///< sigma_k; the next iteration uses sigma_{k+1}
  double omega = 1.0; ///< omega of the last completed iteration
};

struct PdpapOptions {
  /// Worker threads for the m independent inner solves; 1 runs serially.
  int threads = 1;
  /// Test hook: keep x frozen at its initial value (prox replaced by identity at x^0).
  bool freeze_control = false;
};

/// Primal-dual splitting with one inner solver step per outer iteration.
class Pdpap {
public:
  Pdpap(InverseProblem problem, StepRule rule, SplittingKind kind, PdpapOptions options = {});

  const InverseProblem& problem() const noexcept { return problem_; }
  const StepRule& rule() const noexcept { return rule_; }
  const SplittingKind& kind() const noexcept { return kind_; }
  const CouplingOperator& coupling() const noexcept { return K_; }
  const SystemAssembler& assembler() const noexcept { return assembler_; }

  /// Exact PDE and adjoint solves at x0, y0 = K x0, fresh quasi-CG directions.
  /// Throws ConfigError when x0 is outside the box.
  IterateState initialize(const ControlParam& x0) const;

  /// One outer iteration. Errors from the inner solver are rethrown with the
  /// iteration index in the message.
  void iterate(IterateState& state);

private:
  void inner_steps(const AssembledSystem& system, IterateState& state);

  InverseProblem problem_;
  StepRule rule_;
  SplittingKind kind_;
  PdpapOptions options_;
  SystemAssembler assembler_;
  CouplingOperator K_;
  Splitter splitter_;
};

IterateState initialize(const InverseProblem& problem, const ControlParam& x0);

/// Stateless single iteration; prepares a fresh splitter each call.
IterateState iterate(const InverseProblem& problem, IterateState state, const StepRule& rule,
                     const SplittingKind& kind);

/// J(x) = F(x) + Q(S(x)) + G(Kx) with an exact solve; +inf when x is infeasible.
double objective(const InverseProblem& problem, const ControlParam& x);

/// J evaluated with a given (possibly inexact) state u instead of S(x).
double objective_with_state(const InverseProblem& problem, const ControlParam& x,
                            const StateBundle& u);

/// Scalar control: |c - c_ref| / |c_ref|.
/// Field control: |(c_ref / c) a - a_ref| / |a_ref|, invariant under (a, c) -> (t a, t c).
/// Throws ConfigError for a zero reference.
double relative_error(const ControlParam& x, const ControlParam& x_ref);

/// One logged point of a run.
struct LogRow {
  std::int64_t k = 0;
  double t_sec = 0.0;
  double c = 0.0;
  double relerr = 0.0;
  double J_exact = 0.0;
  double J_inexact = 0.0;
  double res_pde = 0.0;
  double res_adj = 0.0;
  double res_x = 0.0;
  double res_y = 0.0;

  bool operator==(const LogRow&) const = default;
};

using IterationLog = std::vector<LogRow>;

} // namespace pdpap
