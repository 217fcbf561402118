#include "pdpap/pdpap.hpp"

#include "pdpap/error.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace pdpap {

StepRule StepRule::constant(double tau, double sigma, double omega) {
  StepRule rule;
  rule.tag = Tag::Constant;
  rule.tau = tau;
  rule.sigma = sigma;
  rule.omega = omega;
  return rule;
}

StepRule StepRule::accelerated(double tau0, double sigma0, double gamma_F) {
  StepRule rule;
  rule.tag = Tag::Accelerated;
  rule.tau = tau0;
  rule.sigma = sigma0;
  rule.gamma_F = gamma_F;
  return rule;
}

StepRule StepRule::linear_rate(double tau, double gamma_F, double gamma_Gstar) {
  StepRule rule;
  rule.tag = Tag::LinearRate;
  rule.tau = tau;
  rule.gamma_F = gamma_F;
  rule.gamma_Gstar = gamma_Gstar;
  rule.sigma = gamma_F * tau / gamma_Gstar;
  rule.omega = 1.0 / (1.0 + 2.0 * gamma_F * tau);
  return rule;
}

void StepRule::validate() const {
  if (!(tau > 0.0))
    throw ConfigError("tau must be positive");
  switch (tag) {
  case Tag::Constant:
    if (!(sigma > 0.0))
      throw ConfigError("sigma must be positive");
    if (!(omega > 0.0 && omega <= 1.0))
      throw ConfigError("omega must lie in (0, 1]");
    break;
  case Tag::Accelerated:
    if (!(sigma > 0.0))
      throw ConfigError("sigma must be positive");
    if (!(gamma_F > 0.0))
      throw ConfigError("the accelerated rule needs gamma_F > 0");
    break;
  case Tag::LinearRate:
    if (!(gamma_F > 0.0 && gamma_Gstar > 0.0))
      throw ConfigError("the linear-rate rule needs gamma_F > 0 and gamma_Gstar > 0");
    break;
  }
}

StepParams advance_step_rule(const StepRule& rule, double tau_k, double sigma_k) {
  switch (rule.tag) {
  case StepRule::Tag::Constant:
    return {tau_k, sigma_k, rule.omega};
  case StepRule::Tag::Accelerated: {
    const double omega = 1.0 / std::sqrt(1.0 + 2.0 * rule.gamma_F * tau_k);
    return {tau_k * omega, sigma_k / omega, omega};
  }
  case StepRule::Tag::LinearRate:
    return {rule.tau, rule.gamma_F * rule.tau / rule.gamma_Gstar,
            1.0 / (1.0 + 2.0 * rule.gamma_F * rule.tau)};
  }
  return {tau_k, sigma_k, 1.0};
}

namespace {

template <class F>
void parallel_for(std::size_t count, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(count, threads > 1 ? threads : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < count; i += workers)
            f(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

bool in_box(const ControlParam& x, const RegConfig& reg) {
  const auto inside = [&](double v) { return v >= reg.lower() && v <= reg.upper(); };
  if (!inside(x.c))
    return false;
  return !x.a || ((x.a->array() >= reg.lower()) && (x.a->array() <= reg.upper())).all();
}

void check_problem(const InverseProblem& problem) {
  problem.reg.validate();
  if (problem.boundary.empty())
    throw ConfigError("problem has no boundary conditions");
  if (problem.z.size() != problem.boundary.size())
    throw SizeMismatch("one measurement per boundary condition is required");
  for (const auto& z : problem.z)
    if (z.size() != problem.grid.node_count())
      throw SizeMismatch("measurement does not match grid");
}

std::pair<double, double> initial_steps(const StepRule& rule) {
  return {rule.tau, rule.sigma};
}

} // namespace

IterateState initialize(const InverseProblem& problem, const ControlParam& x0) {
  check_problem(problem);
  check_family(problem.family, x0);
  if (!in_box(x0, problem.reg))
    throw ConfigError("initial control lies outside [lambda, 1/lambda]");
  const GridSpec& grid = problem.grid;
  const AssembledSystem system = assemble(problem.family, grid, x0, problem.boundary);

  IterateState state;
  state.x = x0;
  state.x_prev = x0;
  state.u = solve_exact(grid, system);
  state.w = solve_adjoint_exact(grid, system, state.u, problem.z, problem.beta_hat);
  const CouplingOperator K(grid, problem.family, problem.reg);
  state.y = K.apply(x0);
  state.k = 0;
  return state;
}

Pdpap::Pdpap(InverseProblem problem, StepRule rule, SplittingKind kind, PdpapOptions options)
    : problem_(std::move(problem)),
      rule_(rule),
      kind_(kind),
      options_(options),
      assembler_(problem_.family, problem_.grid, problem_.boundary),
      K_(problem_.grid, problem_.family, problem_.reg),
      splitter_(kind) {
  check_problem(problem_);
  rule_.validate();
}

IterateState Pdpap::initialize(const ControlParam& x0) const {
  IterateState state = pdpap::initialize(problem_, x0);
  const GridSpec& grid = problem_.grid;
  for (std::size_t i = 0; i < problem_.m(); ++i) {
    state.solver_u.push_back(
        SplitterState::make(kind_, restrict_interior(grid, state.u.fields[i])));
    state.solver_w.push_back(
        SplitterState::make(kind_, restrict_interior(grid, state.w.fields[i])));
  }
  std::tie(state.tau, state.sigma) = initial_steps(rule_);
  state.omega = rule_.omega;
  return state;
}

void Pdpap::inner_steps(const AssembledSystem& system, IterateState& state) {
  const GridSpec& grid = problem_.grid;
  const std::size_t m = problem_.m();
  parallel_for(m, options_.threads, [&](std::size_t i) {
    splitter_.step(system.rhs[i], state.solver_u[i]);
    scatter_interior(grid, state.solver_u[i].u, state.u.fields[i]);
  });
  const auto adj = adjoint_rhs(grid, state.u, problem_.z, problem_.beta_hat);
  parallel_for(m, options_.threads, [&](std::size_t i) {
    splitter_.step(adj[i], state.solver_w[i]);
    scatter_interior(grid, state.solver_w[i].u, state.w.fields[i]);
  });
}

void Pdpap::iterate(IterateState& state) {
  if (state.solver_u.size() != problem_.m() || state.solver_w.size() != problem_.m())
    throw SizeMismatch("iterate state was not initialized for this problem");
  try {
    const AssembledSystem system = assembler_.assemble(state.x);
    splitter_.prepare(system.A);
    inner_steps(system, state);
  } catch (const SolverBreakdown& e) {
    throw SolverBreakdown("iteration " + std::to_string(state.k) + ": " + e.what());
  } catch (const SingularSystem& e) {
    throw SingularSystem("iteration " + std::to_string(state.k) + ": " + e.what());
  }

  const StepParams next = advance_step_rule(rule_, state.tau, state.sigma);
  const double tau = state.tau;

  ControlParam x_next = state.x;
  if (!options_.freeze_control) {
    const ControlGradient g =
        riesz_gradient(problem_.family, problem_.grid, state.u, state.w) + K_.adjoint(state.y);
    x_next = prox_F(state.x - tau * g, tau, problem_.reg);
  }

  if (K_.active()) {
    const ControlParam x_bar = x_next + next.omega * (x_next - state.x);
    DualVar shifted = state.y;
    const DualVar kx = K_.apply(x_bar);
    shifted.y.dx += next.sigma * kx.y.dx;
    shifted.y.dy += next.sigma * kx.y.dy;
    state.y = prox_Gstar(problem_.grid, shifted, next.sigma, problem_.reg);
  }

  state.x_prev = std::move(state.x);
  state.x = std::move(x_next);
  state.tau = next.tau;
  state.sigma = next.sigma;
  state.omega = next.omega;
  ++state.k;
}

IterateState iterate(const InverseProblem& problem, IterateState state, const StepRule& rule,
                     const SplittingKind& kind) {
  Pdpap solver(problem, rule, kind);
  if (state.solver_u.size() != problem.m()) {
    const GridSpec& grid = problem.grid;
    state.solver_u.clear();
    state.solver_w.clear();
    for (std::size_t i = 0; i < problem.m(); ++i) {
      state.solver_u.push_back(
          SplitterState::make(kind, restrict_interior(grid, state.u.fields[i])));
      state.solver_w.push_back(
          SplitterState::make(kind, restrict_interior(grid, state.w.fields[i])));
    }
  }
  if (!(state.tau > 0.0)) {
    std::tie(state.tau, state.sigma) = initial_steps(rule);
    state.omega = rule.omega;
  }
  solver.iterate(state);
  return state;
}

double objective_with_state(const InverseProblem& problem, const ControlParam& x,
                            const StateBundle& u) {
  if (!in_box(x, problem.reg))
    return std::numeric_limits<double>::infinity();
  const CouplingOperator K(problem.grid, problem.family, problem.reg);
  return 0.5 * problem.reg.alpha * x.squared_norm() +
         data_misfit(u, problem.z, problem.beta_hat) + K.g_value(x);
}

double objective(const InverseProblem& problem, const ControlParam& x) {
  if (!in_box(x, problem.reg))
    return std::numeric_limits<double>::infinity();
  const AssembledSystem system = assemble(problem.family, problem.grid, x, problem.boundary);
  return objective_with_state(problem, x, solve_exact(problem.grid, system));
}

double relative_error(const ControlParam& x, const ControlParam& x_ref) {
  if (x_ref.has_field() && x.has_field()) {
    const double ref_norm = x_ref.a->norm();
    if (ref_norm == 0.0 || x.c == 0.0)
      throw ConfigError("relative error needs a nonzero reference and control scale");
    return ((x_ref.c / x.c) * *x.a - *x_ref.a).norm() / ref_norm;
  }
  if (x_ref.has_field() != x.has_field())
    throw SizeMismatch("control and reference differ in shape");
  if (x_ref.c == 0.0)
    throw ConfigError("relative error needs a nonzero reference");
  return std::abs(x.c - x_ref.c) / std::abs(x_ref.c);
}

} // namespace pdpap
