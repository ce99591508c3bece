#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <mspum/fem.hpp>

#include "config.hpp"
#include "diagnostics.hpp"
#include "experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale partition of unity method for rough-coefficient "
               "elliptic problems on the unit square"};

  std::string config_path, sweep_text, export_list, out_dir;
  int fine_exp = -1, threads = -1;
  double eps = -1.0;
  bool ideal = false, diagnostics = false, print_config = false, no_cache = false;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--fine-exp", fine_exp, "fine grid exponent, h = 2^-k");
  app.add_option("--sweep", sweep_text,
                 "comma-separated H_exp:m cells, e.g. \"1:0,2:1,3:2\"");
  app.add_option("--eps", eps, "coefficient oscillation length");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_option("--export", export_list, "comma list of vtk,pgm,csv");
  app.add_flag("--ideal", ideal, "use ideal (whole-domain) correctors");
  app.add_flag("--diagnostics", diagnostics, "run property diagnostics instead of the sweep");
  app.add_flag("--print-config", print_config, "echo the effective config and exit");
  app.add_flag("--no-cache", no_cache, "disable the on-disk reference cache");

  CLI11_PARSE(app, argc, argv);

  mspum::cli::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = mspum::cli::load_config_file(config_path);
    if (fine_exp >= 0) config.fine_exp = fine_exp;
    if (!sweep_text.empty() || app.count("--sweep"))
      config.sweep = mspum::cli::parse_sweep(sweep_text);
    if (eps > 0.0) config.eps = eps;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (threads >= 0) config.threads = threads;
    if (app.count("--export")) {
      config.export_vtk = export_list.find("vtk") != std::string::npos;
      config.export_pgm = export_list.find("pgm") != std::string::npos;
      config.export_decay_csv = export_list.find("csv") != std::string::npos;
    }
    if (ideal) config.ideal = true;
    if (no_cache) config.use_cache = false;
    mspum::cli::validate(config);
  } catch (const mspum::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  if (print_config) {
    std::cout << mspum::cli::config_to_json(config).dump(2) << "\n";
    return kExitOk;
  }

  try {
    if (diagnostics) {
      const auto report = mspum::cli::run_diagnostics(config, std::cout);
      return report["pass"].get<bool>() ? kExitOk : kExitSolverFailure;
    }
    mspum::cli::run_experiment(config, std::cout);
    return kExitOk;
  } catch (const mspum::SolveError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const mspum::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}
