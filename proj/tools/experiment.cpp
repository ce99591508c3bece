#include "experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include <mspum/io.hpp>

namespace mspum::cli {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);

  const int nf = config.fine_n();
  const StructuredTriMesh fine = build_uniform_mesh(nf);
  const auto arc = ArcCoefficientParams::with_eps(config.eps, config.arc_radius,
                                                  config.arc_value);
  const PiecewiseConstantCoefficient coeff =
      discretize([&arc](Vec2 x) { return eval_a_eps(x, arc); }, fine);

  log << "mspum experiment: h = 2^-" << config.fine_exp << " (" << fine.vertex_count()
      << " dofs), coefficient contrast " << coeff.contrast() << "\n";
  log << "H1 errors are reported in the full H1 norm (semi-norm in the "
         "rel_h1_semi column)\n";

  if (config.export_pgm)
    write_pgm(coeff, fine, (out_dir / "coefficient.pgm").string());

  const SpMat K = assemble_stiffness(fine, coeff);
  const SpMat M = assemble_mass(fine);
  const SpMat K1 = assemble_stiffness(fine, constant_coefficient(fine, 1.0));
  const Vec b = assemble_load(fine, [](Vec2 x) { return x.x - 0.5; });

  ExperimentResult result;

  NeumannOptions nopts;
  nopts.tol = config.cg_tol;
  const auto t_ref = std::chrono::steady_clock::now();
  const std::string cache_dir =
      config.use_cache ? (out_dir / "cache").string() : std::string();
  const NeumannSolution ref =
      solve_reference_cached(K, M, b, nf, coefficient_hash(coeff), cache_dir, nopts);
  result.reference_seconds = seconds_since(t_ref);
  result.reference_residual = ref.residual_norm;
  result.reference_iterations = ref.iterations;
  log << "reference: " << ref.iterations << " CG iterations, residual "
      << ref.residual_norm << " [" << result.reference_seconds << "s]\n";

  if (config.export_vtk)
    write_vtk_point_data(fine, {{"u_h", &ref.u}},
                         (out_dir / "reference.vtk").string());

  const std::string csv_path = (out_dir / "errors.csv").string();
  std::ofstream csv(csv_path, std::ios::trunc);
  csv << error_csv_header();

  for (const SweepCell& cell : config.sweep) {
    const auto t_cell = std::chrono::steady_clock::now();
    const int nc = 1 << cell.coarse_exp;
    const MeshHierarchy hier =
        build_hierarchy(nc, config.fine_exp - cell.coarse_exp, config.fine_cap);
    const SpMat P = prolongation(hier);
    const ClementOperator clement = build_clement(hier, P, M);

    CorrectorOptions copts;
    copts.m = cell.m;
    copts.mode = config.ideal ? CorrectorMode::ideal : CorrectorMode::localized;
    copts.threads = config.resolved_threads();
    copts.constraint_tol = config.constraint_tol;
    const CorrectorSet correctors =
        compute_corrector_set(hier, coeff, K, clement, copts);
    const SpMat B = multiscale_basis(P, correctors.Q);

    CellResult cr;
    cr.cell = cell;
    cr.pu_residual =
        (B * Vec::Ones(B.cols()) - Vec::Ones(B.rows())).cwiseAbs().maxCoeff();

    const MultiscaleSolve solve = solve_multiscale(K, M, b, B);
    cr.solve_residual = solve.residual;
    cr.reduced_dim = solve.dim;
    cr.report = compare(solve.u_ms, ref.u, M, K1, std::ldexp(1.0, -cell.coarse_exp),
                        cell.m, std::ldexp(1.0, -config.fine_exp));
    cr.seconds = seconds_since(t_cell);
    result.cells.push_back(cr);

    csv << error_csv_row(cr.report);
    csv.flush();
    log << "H=2^-" << cell.coarse_exp << " m=" << cell.m
        << (config.ideal ? " (ideal)" : "") << ": rel_l2 = " << cr.report.rel_l2
        << ", rel_h1 = " << cr.report.rel_h1 << ", PU residual = " << cr.pu_residual
        << " [" << cr.seconds << "s]\n";

    if (config.export_vtk) {
      char name[64];
      std::snprintf(name, sizeof name, "u_ms_H%d_m%d.vtk", cell.coarse_exp, cell.m);
      write_vtk_point_data(fine, {{"u_ms", &solve.u_ms}}, (out_dir / name).string());
    }
  }
  csv.close();
  result.csv_path = csv_path;
  result.total_seconds = seconds_since(t_start);

  nlohmann::ordered_json summary;
  summary["config"] = config_to_json(config);
  summary["reference"] = {{"iterations", result.reference_iterations},
                          {"residual", result.reference_residual},
                          {"seconds", result.reference_seconds}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const CellResult& cr : result.cells) {
    rows.push_back({{"coarse_exp", cr.cell.coarse_exp},
                    {"m", cr.cell.m},
                    {"rel_l2", cr.report.rel_l2},
                    {"rel_h1", cr.report.rel_h1},
                    {"rel_h1_semi", cr.report.rel_h1_semi},
                    {"pu_residual", cr.pu_residual},
                    {"solve_residual", cr.solve_residual},
                    {"reduced_dim", cr.reduced_dim},
                    {"seconds", cr.seconds}});
  }
  summary["cells"] = rows;
  summary["total_seconds"] = result.total_seconds;
  const std::string summary_path = (out_dir / "summary.json").string();
  std::ofstream(summary_path, std::ios::trunc) << summary.dump(2) << "\n";
  result.summary_path = summary_path;

  log << "wrote " << csv_path << " and " << summary_path << " ["
      << result.total_seconds << "s total]\n";
  return result;
}

}  // namespace mspum::cli
