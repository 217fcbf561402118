#include "pdpap/harness.hpp"

#include "pdpap/error.hpp"
#include "pdpap/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace pdpap {

std::string_view to_string(Experiment experiment) {
  return experiment == Experiment::ScalarCoefficient ? "exp1" : "exp2";
}

namespace {

constexpr int coarse_n = 51;
constexpr int fine_n = 101;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("key '" + std::string(key) + "': not an integer: '" + std::string(text) + "'");
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "on" || text == "1" || text == "yes")
    return true;
  if (text == "false" || text == "off" || text == "0" || text == "no")
    return false;
  throw ConfigError("key '" + std::string(key) + "': not a boolean: '" + std::string(text) + "'");
}

Experiment parse_experiment(std::string_view text) {
  if (text == "exp1" || text == "scalar")
    return Experiment::ScalarCoefficient;
  if (text == "exp2" || text == "diffusion")
    return Experiment::DiffusionCoefficient;
  throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

std::string_view rule_name(StepRule::Tag tag) {
  switch (tag) {
  case StepRule::Tag::Constant:
    return "constant";
  case StepRule::Tag::Accelerated:
    return "accelerated";
  case StepRule::Tag::LinearRate:
    return "linear_rate";
  }
  return "constant";
}

StepRule::Tag parse_rule(std::string_view text) {
  for (auto tag : {StepRule::Tag::Constant, StepRule::Tag::Accelerated, StepRule::Tag::LinearRate})
    if (text == rule_name(tag))
      return tag;
  throw ConfigError("unknown step_rule '" + std::string(text) + "'");
}

} // namespace

ExperimentConfig ExperimentConfig::defaults(Experiment experiment, GridSize grid, int n) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.grid = grid;
  cfg.n = grid == GridSize::Coarse ? coarse_n : grid == GridSize::Fine ? fine_n : n;
  const bool fine = grid == GridSize::Fine;
  cfg.beta = 1e2;
  cfg.sigma = 1.0;
  cfg.omega = 1.0;
  cfg.lambda = 0.1;
  if (experiment == Experiment::ScalarCoefficient) {
    cfg.alpha = 1e-5;
    cfg.gamma = 0.0;
    cfg.tau = fine ? 2.0e-3 : 2.5e-2;
    cfg.m = 6;
    cfg.iterations = fine ? 125000 : 20000;
    cfg.c0 = 4.0;
  } else {
    cfg.alpha = 0.0;
    cfg.gamma = 1e-2;
    cfg.tau = fine ? 1e-2 : 2.5e-2;
    cfg.m = 10;
    cfg.iterations = fine ? 500000 : 200000;
    cfg.c0 = 2.0;
  }
  cfg.a0 = 1.0;
  return cfg;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  std::map<std::string, std::string, std::less<>> entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!entries.emplace(key, std::string(trim(line.substr(eq + 1)))).second)
      throw ConfigError("duplicate key '" + key + "'");
  }

  auto take = [&](std::string_view key) -> std::optional<std::string> {
    const auto it = entries.find(key);
    if (it == entries.end())
      return std::nullopt;
    std::string value = it->second;
    entries.erase(it);
    return value;
  };

  const Experiment experiment =
      parse_experiment(take("experiment").value_or(std::string("exp1")));
  GridSize grid = GridSize::Coarse;
  int n = coarse_n;
  if (auto g = take("grid")) {
    if (*g == "coarse")
      grid = GridSize::Coarse;
    else if (*g == "fine")
      grid = GridSize::Fine;
    else {
      grid = GridSize::Custom;
      n = parse_int<int>("grid", *g);
    }
  }
  ExperimentConfig cfg = defaults(experiment, grid, n);

  auto real = [&](std::string_view key, double& target) {
    if (auto v = take(key))
      target = io::parse_double(*v);
  };
  if (auto v = take("splitting"))
    cfg.splitting = SplittingKind::parse(*v);
  if (auto v = take("iterations"))
    cfg.iterations = parse_int<std::int64_t>("iterations", *v);
  if (auto v = take("seed"))
    cfg.seed = parse_int<std::uint64_t>("seed", *v);
  real("alpha", cfg.alpha);
  real("beta", cfg.beta);
  real("gamma", cfg.gamma);
  real("tau", cfg.tau);
  real("sigma", cfg.sigma);
  real("omega", cfg.omega);
  real("lambda", cfg.lambda);
  if (auto v = take("m"))
    cfg.m = parse_int<int>("m", *v);
  if (auto v = take("log_every"))
    cfg.log_every = parse_int<std::int64_t>("log_every", *v);
  if (auto v = take("output"))
    cfg.output = *v;
  real("noise_level", cfg.noise_level);
  real("c0", cfg.c0);
  real("a0", cfg.a0);
  if (auto v = take("step_rule"))
    cfg.step_rule = parse_rule(*v);
  real("gamma_F", cfg.gamma_F);
  real("gamma_Gstar", cfg.gamma_Gstar);
  if (auto v = take("timing"))
    cfg.timing = parse_bool("timing", *v);
  if (auto v = take("log_residuals"))
    cfg.log_residuals = parse_bool("log_residuals", *v);

  if (!entries.empty())
    throw ConfigError("unknown key '" + entries.begin()->first + "'");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  auto real = [&](std::string_view key, double v) {
    out << key << " = " << io::format_double(v) << '\n';
  };
  out << "experiment = " << to_string(experiment) << '\n';
  out << "grid = "
      << (grid == GridSize::Coarse ? std::string("coarse")
          : grid == GridSize::Fine ? std::string("fine")
                                   : std::to_string(n))
      << '\n';
  out << "splitting = " << splitting.to_string() << '\n';
  out << "iterations = " << iterations << '\n';
  out << "seed = " << seed << '\n';
  real("alpha", alpha);
  real("beta", beta);
  real("gamma", gamma);
  real("tau", tau);
  real("sigma", sigma);
  real("omega", omega);
  real("lambda", lambda);
  out << "m = " << m << '\n';
  out << "log_every = " << log_every << '\n';
  if (!output.empty())
    out << "output = " << output << '\n';
  real("noise_level", noise_level);
  real("c0", c0);
  real("a0", a0);
  out << "step_rule = " << rule_name(step_rule) << '\n';
  real("gamma_F", gamma_F);
  real("gamma_Gstar", gamma_Gstar);
  out << "timing = " << (timing ? "true" : "false") << '\n';
  out << "log_residuals = " << (log_residuals ? "true" : "false") << '\n';
  return out.str();
}

PdeFamily ExperimentConfig::family() const noexcept {
  return experiment == Experiment::ScalarCoefficient ? PdeFamily::ScalarReaction
                                                     : PdeFamily::DiffusionReaction;
}

StepRule ExperimentConfig::step() const {
  switch (step_rule) {
  case StepRule::Tag::Accelerated:
    return StepRule::accelerated(tau, sigma, gamma_F);
  case StepRule::Tag::LinearRate:
    return StepRule::linear_rate(tau, gamma_F, gamma_Gstar);
  case StepRule::Tag::Constant:
    break;
  }
  return StepRule::constant(tau, sigma, omega);
}

void ExperimentConfig::validate() const {
  if (n < 3)
    throw ConfigError("grid needs at least 3 nodes per side");
  if (iterations < 0)
    throw ConfigError("iterations must be nonnegative");
  if (log_every < 1)
    throw ConfigError("log_every must be at least 1");
  if (m < 2 || m % 2 != 0)
    throw ConfigError("m must be a positive even number (cos/sin pairs)");
  if (!(beta > 0.0))
    throw ConfigError("beta must be positive");
  if (!(noise_level >= 0.0))
    throw ConfigError("noise_level must be nonnegative");
  reg().validate();
  step().validate();
  if (experiment == Experiment::ScalarCoefficient && gamma != 0.0)
    throw ConfigError("exp1 has no total-variation term; gamma must be 0");
  const auto inside = [&](double v) { return v >= lambda && v <= 1.0 / lambda; };
  if (!inside(c0) || (experiment == Experiment::DiffusionCoefficient && !inside(a0)))
    throw ConfigError("initial control lies outside [lambda, 1/lambda]");
  if (gamma > 0.0) {
    const double k_norm = estimate_K_norm(grid_spec());
    const double product = tau * sigma * k_norm * k_norm;
    if (!(product < 1.0))
      throw ConfigError("step condition violated: tau sigma |K|^2 = " + io::format_double(product) +
                        " >= 1");
  }
}

std::vector<BoundaryTrace> boundary_conditions(const GridSpec& grid, int m) {
  std::vector<BoundaryTrace> traces;
  traces.reserve(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i)
    traces.push_back(boundary_data(grid, i));
  return traces;
}

MeasurementSet generate_data(PdeFamily family, const GridSpec& grid, const ControlParam& x_hat,
                             int m, std::uint64_t seed, double noise_level) {
  const auto boundary = boundary_conditions(grid, m);
  const AssembledSystem system = assemble(family, grid, x_hat, boundary);
  const StateBundle u_hat = solve_exact(grid, system);
  MeasurementSet data;
  data.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double per_entry = 1.0 / std::sqrt(static_cast<double>(grid.node_count()));
  for (const auto& u : u_hat.fields) {
    const double std_dev = noise_level * u.norm() * per_entry;
    GridFunction z = u;
    if (std_dev > 0.0)
      for (auto& v : z)
        v += std_dev * normal(rng);
    data.z.push_back(std::move(z));
    data.noise_std.push_back(std_dev);
  }
  return data;
}

GridFunction diffusion_phantom(const GridSpec& grid) {
  GridFunction a = GridFunction::Ones(grid.node_count());
  for (int node = 0; node < grid.node_count(); ++node) {
    const double x = grid.x(node);
    const double y = grid.y(node);
    if (std::hypot(x - 0.35, y - 0.65) <= 0.2)
      a[node] = 2.0;
    else if (x >= 0.55 && x <= 0.85 && y >= 0.15 && y <= 0.4)
      a[node] = 0.5;
  }
  return a;
}

ControlParam ground_truth(const ExperimentConfig& cfg) {
  if (cfg.experiment == Experiment::ScalarCoefficient)
    return ControlParam::scalar(1.0);
  return ControlParam::field(diffusion_phantom(cfg.grid_spec()), 1.0);
}

ControlParam initial_control(const ExperimentConfig& cfg) {
  if (cfg.experiment == Experiment::ScalarCoefficient)
    return ControlParam::scalar(cfg.c0);
  return ControlParam::field(GridFunction::Constant(cfg.grid_spec().node_count(), cfg.a0), cfg.c0);
}

InverseProblem build_problem(const ExperimentConfig& cfg) {
  InverseProblem problem;
  problem.family = cfg.family();
  problem.grid = cfg.grid_spec();
  problem.boundary = boundary_conditions(problem.grid, cfg.m);
  problem.z = generate_data(problem.family, problem.grid, ground_truth(cfg), cfg.m, cfg.seed,
                            cfg.noise_level)
                  .z;
  problem.beta_hat = normalized_beta(cfg.beta, problem.z);
  problem.reg = cfg.reg();
  return problem;
}

int threads_from_env() {
  const char* value = std::getenv("PDPAP_THREADS");
  if (!value)
    return 1;
  int threads = 1;
  const std::string_view text(value);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), threads);
  if (ec != std::errc() || threads < 1)
    return 1;
  return threads;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const InverseProblem problem = build_problem(cfg);
  RunResult result;
  result.truth = ground_truth(cfg);
  const ControlParam& reference = options.reference ? *options.reference : result.truth;
  if (options.reference && !options.reference->same_shape(result.truth))
    throw ConfigError("reference control does not match the experiment");

  PdpapOptions popts;
  popts.threads = options.threads > 0 ? options.threads : threads_from_env();
  Pdpap solver(problem, cfg.step(), cfg.splitting, popts);

  using clock = std::chrono::steady_clock;
  double elapsed = 0.0;
  auto segment_start = clock::now();
  auto stop_clock = [&] {
    elapsed += std::chrono::duration<double>(clock::now() - segment_start).count();
  };

  if (options.csv)
    io::write_log_header(*options.csv);

  IterateState state = solver.initialize(initial_control(cfg));
  auto record = [&](const IterateState& s) {
    stop_clock();
    LogRow row;
    row.k = s.k;
    row.t_sec = cfg.timing ? elapsed : 0.0;
    row.c = s.x.c;
    row.relerr = relative_error(s.x, reference);
    row.J_exact = objective(problem, s.x);
    row.J_inexact = objective_with_state(problem, s.x, s.u);
    if (cfg.log_residuals) {
      const auto res = optimality_residuals(problem, s.x, s.u, s.w, s.y);
      row.res_pde = res.pde;
      row.res_adj = res.adjoint;
      row.res_x = res.control;
      row.res_y = res.dual;
    } else {
      row.res_pde = row.res_adj = row.res_x = row.res_y = std::numeric_limits<double>::quiet_NaN();
    }
    result.log.push_back(row);
    if (options.csv) {
      io::write_log_row(*options.csv, row);
      options.csv->flush();
    }
    if (options.observer)
      options.observer(row, s);
    segment_start = clock::now();
  };

  record(state);
  for (std::int64_t k = 1; k <= cfg.iterations; ++k) {
    solver.iterate(state);
    if (k % cfg.log_every == 0 || k == cfg.iterations)
      record(state);
  }
  result.final_state = std::move(state);
  return result;
}

ReferenceSolution compute_reference(const ExperimentConfig& cfg, std::int64_t iterations,
                                    const std::optional<std::filesystem::path>& path) {
  if (iterations < cfg.iterations)
    throw ConfigError("reference needs at least as many iterations as the run it serves");
  ExperimentConfig ref = cfg;
  ref.splitting = SplittingKind::full();
  ref.iterations = iterations;
  ref.log_every = std::max<std::int64_t>(iterations, 1);
  ref.log_residuals = false;
  const RunResult run = run_experiment(ref);
  ReferenceSolution solution{run.final_state.x, iterations, ref.splitting};
  if (path)
    io::write_control(*path, solution.x);
  return solution;
}

} // namespace pdpap
