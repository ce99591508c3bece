#pragma once

#include <iosfwd>

#include <mspum/msolver.hpp>

#include "config.hpp"

namespace mspum::cli {

struct CellResult {
  SweepCell cell;
  ErrorReport report;
  double pu_residual = 0.0;   // max |B 1 - 1|
  double solve_residual = 0.0;
  int reduced_dim = 0;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  double reference_residual = 0.0;
  int reference_iterations = 0;
  double reference_seconds = 0.0;
  double total_seconds = 0.0;
  std::string csv_path;
  std::string summary_path;
};

/// Run the sweep, write CSV + JSON summary (and optional exports) under
/// config.out_dir, and echo progress to `log`.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace mspum::cli
