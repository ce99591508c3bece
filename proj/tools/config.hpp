#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mspum::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepCell {
  int coarse_exp = 1;  // H = 2^-coarse_exp
  int m = 0;
};

struct ExperimentConfig {
  int fine_exp = 8;
  std::vector<SweepCell> sweep = {{1, 0}, {2, 0}, {2, 1}, {3, 1}, {3, 2}, {4, 2}};
  double eps = 0.05;
  double arc_radius = 0.9;
  double arc_value = 1e-3;
  double cg_tol = 1e-10;
  double constraint_tol = 1e-9;
  std::string out_dir = "out";
  bool export_vtk = false;
  bool export_pgm = false;
  bool export_decay_csv = false;
  int threads = 0;  // 0 = hardware concurrency
  bool ideal = false;
  std::uint64_t seed = 0;
  int fine_cap = 2048;
  bool use_cache = true;

  int fine_n() const { return 1 << fine_exp; }
  int resolved_threads() const;
};

/// Throws ConfigError on violated field constraints.
void validate(const ExperimentConfig& config);

/// "1:0,2:0,2:1" -> cells; throws ConfigError on malformed input.
std::vector<SweepCell> parse_sweep(const std::string& text);

ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace mspum::cli
