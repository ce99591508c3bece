#include "config.hpp"

#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace mspum::cli {

using nlohmann::ordered_json;

int ExperimentConfig::resolved_threads() const {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void validate(const ExperimentConfig& c) {
  if (c.fine_exp < 1 || c.fine_exp > 14)
    throw ConfigError("fine_exp must be in [1, 14]");
  if ((1 << c.fine_exp) > c.fine_cap)
    throw ConfigError("fine grid 2^" + std::to_string(c.fine_exp) +
                      " exceeds fine_cap " + std::to_string(c.fine_cap));
  for (const auto& cell : c.sweep) {
    if (cell.coarse_exp < 1)
      throw ConfigError("sweep coarse exponent must be >= 1");
    if (cell.coarse_exp >= c.fine_exp)
      throw ConfigError("sweep coarse exponent " + std::to_string(cell.coarse_exp) +
                        " must be smaller than fine_exp " + std::to_string(c.fine_exp));
    if (cell.m < 0) throw ConfigError("sweep m must be >= 0");
  }
  if (!(c.eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(c.arc_radius > 0.0)) throw ConfigError("arc_radius must be positive");
  if (!(c.arc_value > 0.0)) throw ConfigError("arc_value must be positive");
  if (!(c.cg_tol > 0.0) || !(c.constraint_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

std::vector<SweepCell> parse_sweep(const std::string& text) {
  std::vector<SweepCell> cells;
  if (text.empty()) return cells;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("sweep item '" + item + "' is not of the form H_exp:m");
    try {
      SweepCell cell;
      cell.coarse_exp = std::stoi(item.substr(0, colon));
      cell.m = std::stoi(item.substr(colon + 1));
      cells.push_back(cell);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse sweep item '" + item + "'");
    }
    pos = comma + 1;
  }
  return cells;
}

ExperimentConfig config_from_json(const ordered_json& j) {
  static const std::vector<std::string> known = {
      "fine_exp", "sweep", "eps", "arc_radius", "arc_value", "cg_tol",
      "constraint_tol", "out_dir", "export_vtk", "export_pgm",
      "export_decay_csv", "threads", "ideal", "seed", "fine_cap", "use_cache"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("fine_exp")) c.fine_exp = j["fine_exp"].get<int>();
    if (j.contains("sweep")) {
      c.sweep.clear();
      for (const auto& item : j["sweep"])
        c.sweep.push_back({item.at(0).get<int>(), item.at(1).get<int>()});
    }
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    if (j.contains("arc_radius")) c.arc_radius = j["arc_radius"].get<double>();
    if (j.contains("arc_value")) c.arc_value = j["arc_value"].get<double>();
    if (j.contains("cg_tol")) c.cg_tol = j["cg_tol"].get<double>();
    if (j.contains("constraint_tol")) c.constraint_tol = j["constraint_tol"].get<double>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("export_vtk")) c.export_vtk = j["export_vtk"].get<bool>();
    if (j.contains("export_pgm")) c.export_pgm = j["export_pgm"].get<bool>();
    if (j.contains("export_decay_csv"))
      c.export_decay_csv = j["export_decay_csv"].get<bool>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("ideal")) c.ideal = j["ideal"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("fine_cap")) c.fine_cap = j["fine_cap"].get<int>();
    if (j.contains("use_cache")) c.use_cache = j["use_cache"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["fine_exp"] = c.fine_exp;
  ordered_json sweep = ordered_json::array();
  for (const auto& cell : c.sweep) sweep.push_back({cell.coarse_exp, cell.m});
  j["sweep"] = sweep;
  j["eps"] = c.eps;
  j["arc_radius"] = c.arc_radius;
  j["arc_value"] = c.arc_value;
  j["cg_tol"] = c.cg_tol;
  j["constraint_tol"] = c.constraint_tol;
  j["out_dir"] = c.out_dir;
  j["export_vtk"] = c.export_vtk;
  j["export_pgm"] = c.export_pgm;
  j["export_decay_csv"] = c.export_decay_csv;
  j["threads"] = c.threads;
  j["ideal"] = c.ideal;
  j["seed"] = c.seed;
  j["fine_cap"] = c.fine_cap;
  j["use_cache"] = c.use_cache;
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace mspum::cli
