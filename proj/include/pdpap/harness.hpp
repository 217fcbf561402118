#pragma once

#include "pdpap/pdpap.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace pdpap {

enum class Experiment {
  ScalarCoefficient,   ///< "exp1": recover c in -lap u + c u = 0
  DiffusionCoefficient ///< "exp2": recover (a, c) in -div(a grad u) + c u = 0, TV on a
};

enum class GridSize { Coarse, Fine, Custom };

/// Flat key-value experiment description. Unspecified keys take the published
/// parameter table for the chosen experiment and grid.
struct ExperimentConfig {
  Experiment experiment = Experiment::ScalarCoefficient;
  GridSize grid = GridSize::Coarse;
  int n = 51;
  SplittingKind splitting = SplittingKind::full();
  std::int64_t iterations = 20000;
  std::uint64_t seed = 1;
  double alpha = 1e-5;
  double beta = 1e2;
  double gamma = 0.0;
  double tau = 2.5e-2;
  double sigma = 1.0;
  double omega = 1.0;
  double lambda = 0.1;
  int m = 6;
  std::int64_t log_every = 100;
  std::string output;

  double noise_level = 0.01;
  double c0 = 4.0;
  double a0 = 1.0;
  StepRule::Tag step_rule = StepRule::Tag::Constant;
  double gamma_F = 0.0;
  double gamma_Gstar = 0.0;
  /// When false the t_sec column is written as 0, making logs bitwise reproducible.
  bool timing = true;
  bool log_residuals = true;

  /// Published parameter set for an experiment and grid (Custom uses the coarse row).
  static ExperimentConfig defaults(Experiment experiment, GridSize grid, int n = 51);

  /// Parses `key = value` lines; `#` starts a comment. Throws ConfigError.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Every key, fixed order; parse(serialize()) reproduces the config.
  std::string serialize() const;

  /// Throws ConfigError for out-of-range values, odd m, or a violated
  /// step condition tau sigma |K|^2 < 1 when the TV term is active.
  void validate() const;

  PdeFamily family() const noexcept;
  GridSpec grid_spec() const { return GridSpec(n); }
  RegConfig reg() const { return RegConfig{alpha, lambda, gamma}; }
  StepRule step() const;

  bool operator==(const ExperimentConfig&) const = default;
};

std::string_view to_string(Experiment experiment);

/// Synthetic measurements z_i = u_hat_i + noise.
struct MeasurementSet {
  std::vector<GridFunction> z;
  std::vector<double> noise_std;
  std::uint64_t seed = 0;
};

/// Boundary traces f_1..f_m.
std::vector<BoundaryTrace> boundary_conditions(const GridSpec& grid, int m);

/// Solves with the ground truth and adds i.i.d. Gaussian noise with per-entry
/// standard deviation noise_level |u_hat_i| / sqrt(node count), so the noise
/// vector norm is about noise_level |u_hat_i|. noise_level = 0 returns u_hat.
MeasurementSet generate_data(PdeFamily family, const GridSpec& grid, const ControlParam& x_hat,
                             int m, std::uint64_t seed, double noise_level = 0.01);

/// Piecewise-constant diffusion phantom: background 1, a disk of value 2
/// (radius 0.2 at (0.35, 0.65)) and a rectangle of value 0.5 over
/// [0.55, 0.85] x [0.15, 0.4].
GridFunction diffusion_phantom(const GridSpec& grid);

ControlParam ground_truth(const ExperimentConfig& cfg);
ControlParam initial_control(const ExperimentConfig& cfg);

/// Builds data, normalization and boundary conditions for a config.
InverseProblem build_problem(const ExperimentConfig& cfg);

struct RunOptions {
  /// Relative errors are measured against this; the ground truth otherwise.
  std::optional<ControlParam> reference;
  /// Called at every logged iterate.
  std::function<void(const LogRow&, const IterateState&)> observer;
  /// CSV sink written incrementally; nullptr disables.
  std::ostream* csv = nullptr;
  /// Inner worker threads; 0 reads PDPAP_THREADS (default 1).
  int threads = 0;
};

struct RunResult {
  IterationLog log;
  IterateState final_state;
  ControlParam truth;
};

/// initialize + iterate loop with logging every cfg.log_every iterations and at
/// the last iteration. The wall clock excludes data generation and logging.
/// Solver errors propagate after the partial log has been flushed.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct ReferenceSolution {
  ControlParam x;
  std::int64_t iterations = 0;
  SplittingKind kind = SplittingKind::full();
};

/// Runs the Full splitting for `iterations` and, when `path` is given, persists x.
/// Throws ConfigError when iterations < cfg.iterations.
ReferenceSolution compute_reference(const ExperimentConfig& cfg, std::int64_t iterations,
                                    const std::optional<std::filesystem::path>& path = {});

/// Reads PDPAP_THREADS; 1 when unset or invalid.
int threads_from_env();

} // namespace pdpap
