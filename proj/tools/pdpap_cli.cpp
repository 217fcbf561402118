#include "pdpap/error.hpp"
#include "pdpap/harness.hpp"
#include "pdpap/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pdpap;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path.string());
  return out;
}

int generate_data_command(const fs::path& config, const fs::path& dir) {
  const auto cfg = ExperimentConfig::load(config);
  cfg.validate();
  fs::create_directories(dir);
  const auto truth = ground_truth(cfg);
  const auto data = generate_data(cfg.family(), cfg.grid_spec(), truth, cfg.m, cfg.seed,
                                  cfg.noise_level);
  auto out = open_output(dir / "measurements.csv");
  io::write_fields(out, data.z, "z");
  io::write_control(dir / "ground_truth.txt", truth);
  auto cfg_out = open_output(dir / "config.txt");
  cfg_out << cfg.serialize();
  std::cout << "wrote " << data.z.size() << " measurements on a " << cfg.n << "x" << cfg.n
            << " grid to " << dir.string() << "\n";
  for (std::size_t i = 0; i < data.noise_std.size(); ++i)
    std::cout << "  z" << i + 1 << " noise std " << io::format_double(data.noise_std[i]) << "\n";
  return 0;
}

int run_command(const fs::path& config, const fs::path& dir, const std::string& reference) {
  const auto cfg = ExperimentConfig::load(config);
  fs::create_directories(dir);
  RunOptions options;
  if (!reference.empty())
    options.reference = io::read_control(fs::path(reference));
  auto csv = open_output(dir / "log.csv");
  options.csv = &csv;
  const auto result = run_experiment(cfg, options);
  io::write_control(dir / "final_control.txt", result.final_state.x);
  const auto& last = result.log.back();
  std::cout << "k = " << last.k << "  c = " << io::format_double(last.c)
            << "  relerr = " << io::format_double(last.relerr)
            << "  J = " << io::format_double(last.J_exact) << "\n";
  return 0;
}

int reference_command(const fs::path& config, std::int64_t iterations, const fs::path& out) {
  const auto cfg = ExperimentConfig::load(config);
  if (out.has_parent_path())
    fs::create_directories(out.parent_path());
  const auto ref = compute_reference(cfg, iterations, out);
  std::cout << "reference after " << ref.iterations << " full-solve iterations: c = "
            << io::format_double(ref.x.c) << " -> " << out.string() << "\n";
  return 0;
}

int diagnose_command(const fs::path& config) {
  const auto cfg = ExperimentConfig::load(config);
  const auto problem = build_problem(cfg);
  const auto x0 = initial_control(cfg);
  const auto system = assemble(problem.family, problem.grid, x0, problem.boundary);
  const auto report = diagnose(cfg.splitting, system.A);

  std::cout << "experiment      " << to_string(cfg.experiment) << "\n";
  std::cout << "grid            " << cfg.n << "x" << cfg.n << "\n";
  std::cout << "splitting       " << cfg.splitting.to_string() << "\n";
  std::cout << "system size     " << system.A.rows() << "\n";
  std::cout << "gamma_N         " << io::format_double(report.gamma_N) << "\n";
  std::cout << "alpha           " << io::format_double(report.alpha) << "\n";
  std::cout << "stationary      " << (report.stationary ? "yes" : "no") << "\n";
  std::cout << "diag dominant   " << (report.diag_dominant ? "yes" : "no") << "\n";
  std::cout << "spd             " << (report.spd ? "yes" : "no") << "\n";
  std::cout << "alpha iters     " << report.alpha_iterations << "\n";

  const double k_norm = estimate_K_norm(problem.grid);
  const double product = cfg.tau * cfg.sigma * k_norm * k_norm;
  std::cout << "|K|^2           " << io::format_double(k_norm * k_norm) << "\n";
  std::cout << "tau sigma |K|^2 " << io::format_double(product);
  if (cfg.gamma > 0.0)
    std::cout << (product < 1.0 ? "  ok" : "  VIOLATED") << "\n";
  else
    std::cout << "  (coupling inactive)\n";
  if (report.stationary && !(report.alpha < 1.0))
    std::cout << "warning: splitting is not contractive at x0\n";
  return cfg.gamma > 0.0 && !(product < 1.0) ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual proximal splitting for coefficient inverse problems"};
  app.require_subcommand(1);

  std::string config, out, reference;
  std::int64_t iterations = 0;

  auto* gen = app.add_subcommand("generate-data", "Write synthetic measurements");
  gen->add_option("--config", config)->required();
  gen->add_option("--out", out, "output directory")->required();

  auto* run = app.add_subcommand("run", "Run an experiment and log convergence");
  run->add_option("--config", config)->required();
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--reference", reference, "control file to measure relative error against");

  auto* ref = app.add_subcommand("reference", "Compute a full-solve reference control");
  ref->add_option("--config", config)->required();
  ref->add_option("--iters", iterations)->required()->check(CLI::NonNegativeNumber);
  ref->add_option("--out", out, "output file")->required();

  auto* diag = app.add_subcommand("diagnose", "Report splitting constants at the initial control");
  diag->add_option("--config", config)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return generate_data_command(config, out);
    if (*run)
      return run_command(config, out, reference);
    if (*ref)
      return reference_command(config, iterations, out);
    return diagnose_command(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
