#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "diagnostics.hpp"
#include "experiment.hpp"

using namespace mspum::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> parse_csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ',')) row.push_back(std::stod(item));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sweep parsing") {
  const auto cells = parse_sweep("1:0,2:1,3:2");
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].coarse_exp == 1);
  CHECK(cells[0].m == 0);
  CHECK(cells[2].coarse_exp == 3);
  CHECK(cells[2].m == 2);
  CHECK(parse_sweep("").empty());
  CHECK_THROWS_AS(parse_sweep("1-0"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("a:b"), ConfigError);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  validate(c);  // defaults are valid

  c.sweep = {{8, 1}};
  c.fine_exp = 8;
  CHECK_THROWS_AS(validate(c), ConfigError);  // coarse must be finer than fine

  c = ExperimentConfig{};
  c.eps = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = ExperimentConfig{};
  c.fine_exp = 12;
  c.fine_cap = 1024;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("config json round trip is idempotent") {
  ExperimentConfig c;
  c.fine_exp = 6;
  c.sweep = {{2, 1}, {3, 2}};
  c.eps = 0.07;
  c.export_pgm = true;
  c.threads = 3;
  const auto j1 = config_to_json(c);
  const auto j2 = config_to_json(config_from_json(j1));
  CHECK(j1 == j2);
  CHECK(j1.dump() == j2.dump());

  nlohmann::ordered_json bad = j1;
  bad["no_such_key"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
}

TEST_CASE("smoke experiment matches the golden file") {
  ExperimentConfig c;
  c.fine_exp = 5;
  c.sweep = {{2, 0}};
  c.out_dir = (fs::temp_directory_path() / "mspum_smoke").string();
  c.threads = 1;
  c.use_cache = false;
  fs::remove_all(c.out_dir);
  std::ostringstream log;
  const ExperimentResult result = run_experiment(c, log);
  REQUIRE(result.cells.size() == 1);

  const auto got = parse_csv_rows(slurp(result.csv_path));
  const auto golden = parse_csv_rows(slurp(std::string(MSPUM_TEST_DIR) +
                                           "/golden/smoke.csv"));
  REQUIRE(got.size() == golden.size());
  for (size_t r = 0; r < got.size(); ++r) {
    REQUIRE(got[r].size() == golden[r].size());
    for (size_t kcol = 0; kcol < got[r].size(); ++kcol)
      CHECK(got[r][kcol] ==
            doctest::Approx(golden[r][kcol]).epsilon(1e-9));
  }

  // summary is written and echoes the config
  const auto summary = nlohmann::ordered_json::parse(slurp(result.summary_path));
  CHECK(summary["config"]["fine_exp"].get<int>() == 5);
  CHECK(summary["cells"].size() == 1);
  fs::remove_all(c.out_dir);
}

TEST_CASE("experiment runs are deterministic") {
  ExperimentConfig c;
  c.fine_exp = 5;
  c.sweep = {{2, 0}, {2, 1}};
  c.threads = 1;
  c.use_cache = false;
  std::ostringstream log;

  c.out_dir = (fs::temp_directory_path() / "mspum_det_a").string();
  fs::remove_all(c.out_dir);
  const auto a = run_experiment(c, log);
  c.out_dir = (fs::temp_directory_path() / "mspum_det_b").string();
  fs::remove_all(c.out_dir);
  const auto b = run_experiment(c, log);
  CHECK(slurp(a.csv_path) == slurp(b.csv_path));
  fs::remove_all(fs::temp_directory_path() / "mspum_det_a");
  fs::remove_all(fs::temp_directory_path() / "mspum_det_b");
}

TEST_CASE("empty sweep produces a header-only csv") {
  ExperimentConfig c;
  c.fine_exp = 4;
  c.sweep = {};
  c.out_dir = (fs::temp_directory_path() / "mspum_empty").string();
  c.use_cache = false;
  std::ostringstream log;
  const auto result = run_experiment(c, log);
  CHECK(result.cells.empty());
  CHECK(slurp(result.csv_path) == "H,m,rel_l2,rel_h1,rel_h1_semi,h\n");
  fs::remove_all(c.out_dir);
}

TEST_CASE("exports are written when enabled") {
  ExperimentConfig c;
  c.fine_exp = 4;
  c.sweep = {{1, 0}};
  c.out_dir = (fs::temp_directory_path() / "mspum_exports").string();
  c.export_vtk = true;
  c.export_pgm = true;
  c.use_cache = false;
  fs::remove_all(c.out_dir);
  std::ostringstream log;
  run_experiment(c, log);
  CHECK(fs::exists(fs::path(c.out_dir) / "coefficient.pgm"));
  CHECK(fs::exists(fs::path(c.out_dir) / "reference.vtk"));
  CHECK(fs::exists(fs::path(c.out_dir) / "u_ms_H1_m0.vtk"));

  const std::string pgm = slurp((fs::path(c.out_dir) / "coefficient.pgm").string());
  CHECK(pgm.substr(0, 2) == "P2");
  const std::string vtk = slurp((fs::path(c.out_dir) / "reference.vtk").string());
  CHECK(vtk.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(vtk.find("POINT_DATA") != std::string::npos);
  fs::remove_all(c.out_dir);
}

TEST_CASE("ideal mode runs the sweep with whole-domain correctors") {
  // with the experiment load the ideal method reproduces the fine solution
  ExperimentConfig c;
  c.fine_exp = 5;
  c.sweep = {{2, 0}};
  c.ideal = true;
  c.out_dir = (fs::temp_directory_path() / "mspum_ideal").string();
  c.use_cache = false;
  fs::remove_all(c.out_dir);
  std::ostringstream log;
  const auto result = run_experiment(c, log);
  REQUIRE(result.cells.size() == 1);
  CHECK(result.cells[0].report.rel_l2 <= 1e-8);
  CHECK(result.cells[0].pu_residual <= 1e-9);
  fs::remove_all(c.out_dir);
}

TEST_CASE("diagnostics report passes on the default small runs") {
  ExperimentConfig c;
  c.out_dir = (fs::temp_directory_path() / "mspum_diag").string();
  c.export_decay_csv = true;
  c.export_vtk = true;
  fs::remove_all(c.out_dir);
  std::ostringstream log;
  const auto report = run_diagnostics(c, log);
  for (const auto& chk : report["checks"]) {
    INFO(chk.dump());
    CHECK(chk["pass"].get<bool>());
  }
  CHECK(report["pass"].get<bool>());
  CHECK(fs::exists(fs::path(c.out_dir) / "diagnostics.json"));
  CHECK(fs::exists(fs::path(c.out_dir) / "decay_unit.csv"));
  CHECK(fs::exists(fs::path(c.out_dir) / "decay_checkerboard.csv"));
  CHECK(fs::exists(fs::path(c.out_dir) / "corrector_unit.vtk"));
  const std::string decay = slurp((fs::path(c.out_dir) / "decay_unit.csv").string());
  CHECK(decay.rfind("k,e_k\n", 0) == 0);
  fs::remove_all(c.out_dir);
}

}  // TEST_SUITE
