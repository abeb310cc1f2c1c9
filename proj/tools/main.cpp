#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "vlab/experiments.hpp"

int main(int argc, char** argv) {
  using namespace vlab;
  CLI::App app{"vlab: viscous point-vortex and Oseen-vortex laboratory"};
  app.require_subcommand(1);
  std::string out;
  app.add_option("--out", out, "Output directory (overrides the config)");
  app.set_version_flag("--version", VLAB_VERSION);

  std::string config;
  auto* sim = app.add_subcommand("simulate", "Run the periodic Navier-Stokes solver");
  sim->add_option("--config", config, "Simulation config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output directory");

  auto* pv = app.add_subcommand("pointvortex", "Integrate the point-vortex system");
  pv->add_option("--config", config, "Point-vortex config (JSON)")->required()->check(CLI::ExistingFile);
  pv->add_option("--out", out, "Output directory");

  int mode = 0;
  double alpha = 0.0;
  int basis_size = 96;
  std::size_t count = 0;
  auto* spec = app.add_subcommand("spectrum", "Eigenvalues of L_n - alpha Lambda_n as CSV re,im");
  spec->add_option("--n", mode, "Angular mode")->required();
  spec->add_option("--alpha", alpha, "Circulation Reynolds number")->required();
  spec->add_option("--basis-size", basis_size, "Laguerre basis size")->check(CLI::Range(8, 4096));
  spec->add_option("--count", count, "Number of eigenvalues (0: all)");

  std::string grid;
  int n_max = 8;
  auto* bnd = app.add_subcommand("bounds", "Spectral and pseudospectral bounds Sigma, Psi");
  bnd->add_option("--alpha-grid", grid, "\"0,2,8\", \"lin:a:b:count\" or \"log:a:b:count\"")->required();
  bnd->add_option("--basis-size", basis_size, "Laguerre basis size")->check(CLI::Range(8, 4096));
  bnd->add_option("--n-max", n_max, "Highest angular mode")->check(CLI::Range(2, 64));
  bnd->add_option("--out", out, "Output directory");

  auto* exp = app.add_subcommand("experiment", "Run an experiment pipeline");
  exp->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      auto cfg = cli::parse_simulate_config(cli::read_text(config),
                                            std::filesystem::path(config).parent_path());
      if (!out.empty()) cfg.output = out;
      return cli::simulate(cfg, std::cout);
    }
    if (*pv) {
      auto cfg = cli::parse_pointvortex_config(cli::read_text(config));
      if (!out.empty()) cfg.output = out;
      return cli::pointvortex(cfg, std::cout);
    }
    if (*spec) return cli::spectrum(mode, alpha, basis_size, count, std::cout);
    if (*bnd)
      return cli::bounds(cli::parse_alpha_grid(grid), basis_size, n_max, out.empty() ? "out/bounds" : out,
                         std::cout);
    if (*exp) return cli::experiment(config, out, std::cout);
  } catch (const InvalidInput& e) {
    std::cerr << "vlab: invalid input: " << e.what() << "\n";
    return 2;
  } catch (const ExperimentFailure& e) {
    std::cerr << "vlab: experiment failed at stage '" << e.stage << "': " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "vlab: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
