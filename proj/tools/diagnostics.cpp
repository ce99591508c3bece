#include "diagnostics.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include <mspum/io.hpp>
#include <mspum/msolver.hpp>

namespace mspum::cli {

using nlohmann::ordered_json;

namespace {

struct Check {
  ordered_json& report;
  bool& all_pass;

  void add(const std::string& name, bool pass, double value, double threshold,
           const std::string& note = "",
           const std::vector<double>& series = {}) {
    ordered_json entry;
    entry["name"] = name;
    entry["pass"] = pass;
    entry["value"] = value;
    entry["threshold"] = threshold;
    if (!note.empty()) entry["note"] = note;
    if (!series.empty()) entry["series"] = series;
    report.push_back(entry);
    if (!pass) all_pass = false;
  }
};

// random fine-scale vector: r minus a lifted preimage of its interpolation
Vec random_fine_scale(const ClementOperator& cl, const LiftingBasis& lb,
                      const SpMat& P, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec r(P.rows());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = dist(rng);
  return r - lift_to_preimage(cl, lb, P, apply_I(cl, r));
}

}  // namespace

ordered_json run_diagnostics(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  std::filesystem::create_directories(config.out_dir);
  std::mt19937_64 rng(config.seed);
  ordered_json checks = ordered_json::array();
  bool all_pass = true;
  Check check{checks, all_pass};

  // --- partition of unity and interpolation identities (nc=4, levels=3)
  {
    const MeshHierarchy hier = build_hierarchy(4, 3);
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(hier.fine);
    const ClementOperator cl = build_clement(hier, P, M);

    const Vec row_sums = P * Vec::Ones(P.cols());
    check.add("pu1_hat_row_sums", (row_sums.array() - 1.0).abs().maxCoeff() == 0.0,
              (row_sums.array() - 1.0).abs().maxCoeff(), 0.0,
              "coarse hats sum to one at every fine vertex");

    bool tiled = true;
    std::vector<int> count(hier.coarse.triangle_count(), 0);
    for (int c : hier.fine_to_coarse_element) ++count[c];
    for (int c : count)
      if (c != (1 << (2 * hier.levels))) tiled = false;
    check.add("pu2_element_partition", tiled, tiled ? 1.0 : 0.0, 1.0,
              "every coarse element owns exactly 4^levels fine elements");

    const Vec i_one = apply_I(cl, Vec::Ones(P.rows()));
    check.add("clement_reproduces_constants",
              (i_one.array() - 1.0).abs().maxCoeff() == 0.0,
              (i_one.array() - 1.0).abs().maxCoeff(), 0.0);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cl.R);
    const double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
    check.add("clement_restriction_condition", cond < 1e8, cond, 1e8);

    const LiftingBasis lb = build_lifting(hier);
    double lift_err = 0.0;
    bool support_ok = true;
    for (int z = 0; z < hier.coarse.vertex_count(); ++z) {
      Vec e = Vec::Zero(hier.coarse.vertex_count());
      e[z] = 1.0;
      const Vec w = apply_I(cl, Vec(lb.basis.col(z)));
      lift_err = std::max(lift_err, (w - e).cwiseAbs().maxCoeff());
      // support containment: b_z must vanish where phi_z does
      const Vec phi = P.col(z);
      const Vec bz = lb.basis.col(z);
      for (Eigen::Index i = 0; i < bz.size(); ++i)
        if (bz[i] != 0.0 && phi[i] == 0.0) support_ok = false;
    }
    check.add("lifting_identity", lift_err <= 1e-10, lift_err, 1e-10,
              "I(b_z) equals the coarse unit vector at z");
    check.add("lifting_support", support_ok, support_ok ? 1.0 : 0.0, 1.0);

    double lift_roundtrip = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      Vec vc(hier.coarse.vertex_count());
      for (Eigen::Index i = 0; i < vc.size(); ++i) vc[i] = dist(rng);
      const Vec v = lift_to_preimage(cl, lb, P, vc);
      lift_roundtrip = std::max(lift_roundtrip,
                                (apply_I(cl, v) - vc).cwiseAbs().maxCoeff());
    }
    check.add("lifting_roundtrip", lift_roundtrip <= 1e-10, lift_roundtrip, 1e-10);
  }

  // --- interpolation stability constants on a smooth field
  {
    const auto v_smooth = [](Vec2 p) {
      return std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
    };
    std::vector<double> c1s, c2s;
    for (int ce = 2; ce <= 4; ++ce) {
      const MeshHierarchy hier = build_hierarchy(1 << ce, 6 - ce);
      const SpMat P = prolongation(hier);
      const SpMat M = assemble_mass(hier.fine);
      const SpMat K1 = assemble_stiffness(hier.fine,
                                          constant_coefficient(hier.fine, 1.0));
      const ClementOperator cl = build_clement(hier, P, M);
      Vec v(hier.fine.vertex_count());
      for (int i = 0; i < hier.fine.vertex_count(); ++i)
        v[i] = v_smooth(hier.fine.vertices[i]);
      const Vec iv = apply_I_as_fine(cl, P, v);
      const Norms n_err = norms(M, K1, v - iv);
      const Norms n_v = norms(M, K1, v);
      const double H = std::ldexp(1.0, -ce);
      c1s.push_back(n_err.l2 / (H * n_v.h1_semi));
      c2s.push_back(norms(M, K1, iv).h1_semi / n_v.h1_semi);
    }
    const auto minmax1 = std::minmax_element(c1s.begin(), c1s.end());
    const auto minmax2 = std::minmax_element(c2s.begin(), c2s.end());
    check.add("interp_l2_constant_stable", *minmax1.second / *minmax1.first < 2.5,
              *minmax1.second / *minmax1.first, 2.5,
              "spread of C with ||v - I v|| <= C H |v|_1, per-mesh values for H = 2^-2..2^-4",
              c1s);
    check.add("interp_l2_constant_bounded", *minmax1.second < 0.5, *minmax1.second,
              0.5);
    check.add("interp_h1_stability_bounded", *minmax2.second < 2.0, *minmax2.second,
              2.0, "||grad I v|| / ||grad v||, per-mesh values", c2s);
  }

  // --- correctors vanish when coarse = fine
  {
    const MeshHierarchy hier = build_hierarchy(8, 0);
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(hier.fine);
    const SpMat K = assemble_stiffness(hier.fine,
                                       constant_coefficient(hier.fine, 1.0));
    const ClementOperator cl = build_clement(hier, P, M);
    CorrectorOptions copts;
    copts.m = 0;
    const CorrectorSet set = compute_corrector_set(hier, constant_coefficient(hier.fine, 1.0),
                                                   K, cl, copts);
    const double qnorm = set.Q.norm();
    check.add("correctors_zero_at_levels0", qnorm == 0.0, qnorm, 0.0);
  }

  // --- ideal corrector orthogonality + preserved partition of unity
  {
    const MeshHierarchy hier = build_hierarchy(4, 3);
    const StructuredTriMesh& fine = hier.fine;
    const auto arc = ArcCoefficientParams::with_eps(config.eps, config.arc_radius,
                                                    config.arc_value);
    const auto coeff = discretize([&arc](Vec2 x) { return eval_a_eps(x, arc); }, fine);
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(fine);
    const SpMat K = assemble_stiffness(fine, coeff);
    const ClementOperator cl = build_clement(hier, P, M);
    const LiftingBasis lb = build_lifting(hier);

    CorrectorOptions copts;
    copts.mode = CorrectorMode::ideal;
    copts.constraint_tol = config.constraint_tol;
    const CorrectorSet ideal = compute_corrector_set(hier, coeff, K, cl, copts);
    const SpMat B = multiscale_basis(P, ideal.Q);

    const double pu_resid =
        (B * Vec::Ones(B.cols()) - Vec::Ones(B.rows())).cwiseAbs().maxCoeff();
    check.add("pu_preserved_under_correction", pu_resid <= 1e-9, pu_resid, 1e-9);

    double max_resid = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Vec w = random_fine_scale(cl, lb, P, rng);
      const Vec Kw = K * w;
      const double wnorm = std::sqrt(w.dot(Kw));
      for (int z = 0; z < B.cols(); ++z) {
        const Vec bz = B.col(z);
        const double bnorm = std::sqrt(bz.dot(K * bz));
        max_resid = std::max(max_resid, std::abs(bz.dot(Kw)) / (bnorm * wnorm));
      }
    }
    check.add("a_orthogonality_residual", max_resid <= 1e-8, max_resid, 1e-8,
              "ideal corrected basis against 50 random fine-scale vectors");
  }

  // --- exponential decay of the ideal corrector
  {
    const MeshHierarchy hier = build_hierarchy(8, 3);
    const StructuredTriMesh& fine = hier.fine;
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(fine);
    const ClementOperator cl = build_clement(hier, P, M);
    const int anchor = 0;  // corner element: complement stays nonempty longest
    const int z = hier.coarse.triangles[anchor][0];

    for (const bool checker : {false, true}) {
      const auto coeff = checker
          ? discretize(checkerboard_field(16, 1.0, 100.0), fine)
          : constant_coefficient(fine, 1.0);
      const SpMat K = assemble_stiffness(fine, coeff);
      const Patch full = extend_patch(hier, anchor, saturation_layers(hier.coarse));
      const auto saddle = build_saddle_system(hier, K, cl, full);
      const Vec rhs = assemble_corrector_rhs(hier, coeff, anchor, z);
      const Vec q = solve_local_corrector(rhs, *saddle, config.constraint_tol);
      const auto energies = decay_profile(hier, q, anchor, 6);
      const DecayFit fit = fit_decay(energies, 1, 5);
      const std::string tag = checker ? "checkerboard" : "unit";
      check.add("decay_theta_" + tag, fit.theta > 0.0 && fit.theta < 1.0, fit.theta,
                1.0, "fitted per-layer amplitude ratio");
      check.add("decay_fit_r2_" + tag, fit.r2 >= 0.9, fit.r2, 0.9);
      if (config.export_decay_csv)
        write_decay_csv(energies, (std::filesystem::path(config.out_dir) /
                                   ("decay_" + tag + ".csv")).string());
      if (config.export_vtk)
        write_vtk_point_data(fine, {{"corrector", &q}},
                             (std::filesystem::path(config.out_dir) /
                              ("corrector_" + tag + ".vtk")).string());
    }
  }

  // --- localization gap: expected to shrink with m (soft, the bound is up
  // to constants)
  {
    const MeshHierarchy hier = build_hierarchy(8, 2);
    const auto coeff = constant_coefficient(hier.fine, 1.0);
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(hier.fine);
    const SpMat K = assemble_stiffness(hier.fine, coeff);
    const ClementOperator cl = build_clement(hier, P, M);
    CorrectorOptions ideal_opts;
    ideal_opts.mode = CorrectorMode::ideal;
    const CorrectorSet ideal = compute_corrector_set(hier, coeff, K, cl, ideal_opts);
    std::vector<double> gaps;
    for (int m : {0, 1, 2}) {
      CorrectorOptions opts;
      opts.m = m;
      gaps.push_back(localization_gap(
          ideal, compute_corrector_set(hier, coeff, K, cl, opts), K).total);
    }
    const bool monotone = gaps[1] <= gaps[0] && gaps[2] <= gaps[1];
    // reported as a warning only: always passes, the series carries the data
    check.add("localization_gap_monotone", true, monotone ? 1.0 : 0.0, 0.0,
              monotone ? "gaps shrink with m" : "warning: gaps not monotone in m",
              gaps);
  }

  // --- Galerkin orthogonality of a localized multiscale solve
  {
    const MeshHierarchy hier = build_hierarchy(4, 3);
    const StructuredTriMesh& fine = hier.fine;
    const auto arc = ArcCoefficientParams::with_eps(config.eps, config.arc_radius,
                                                    config.arc_value);
    const auto coeff = discretize([&arc](Vec2 x) { return eval_a_eps(x, arc); }, fine);
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(fine);
    const SpMat K = assemble_stiffness(fine, coeff);
    const ClementOperator cl = build_clement(hier, P, M);
    const Vec b = assemble_load(fine, [](Vec2 x) { return x.x - 0.5; });

    CorrectorOptions copts;
    copts.m = 1;
    copts.threads = config.resolved_threads();
    copts.constraint_tol = config.constraint_tol;
    const CorrectorSet set = compute_corrector_set(hier, coeff, K, cl, copts);
    const SpMat B = multiscale_basis(P, set.Q);
    const MultiscaleSolve solve = solve_multiscale(K, M, b, B);

    NeumannOptions nopts;
    nopts.tol = config.cg_tol;
    const NeumannSolution ref = solve_neumann_meanzero(K, M, b, nopts);

    const Vec err = ref.u - solve.u_ms;
    const Vec Kerr = K * err;
    const double enorm = std::sqrt(err.dot(Kerr));
    double ortho = 0.0;
    for (int zc = 0; zc < B.cols(); ++zc) {
      const Vec bz = B.col(zc);
      ortho = std::max(ortho, std::abs(bz.dot(Kerr)) /
                                  (std::sqrt(bz.dot(K * bz)) * enorm));
    }
    check.add("galerkin_orthogonality", ortho <= 1e-8, ortho, 1e-8,
              "fine-grid error against the corrected basis in the energy product");

    // determinism of the corrector pipeline
    const CorrectorSet again = compute_corrector_set(hier, coeff, K, cl, copts);
    const double diff = (SpMat(set.Q - again.Q)).norm();
    check.add("corrector_determinism", diff == 0.0, diff, 0.0);
  }

  ordered_json report;
  report["config"] = config_to_json(config);
  report["checks"] = checks;
  report["pass"] = all_pass;

  namespace fs = std::filesystem;
  const std::string path = (fs::path(config.out_dir) / "diagnostics.json").string();
  std::ofstream(path, std::ios::trunc) << report.dump(2) << "\n";
  log << "diagnostics: " << (all_pass ? "all checks passed" : "FAILURES") << ", report at "
      << path << "\n";
  for (const auto& c : checks)
    log << "  " << (c["pass"].get<bool>() ? "pass" : "FAIL") << "  "
        << c["name"].get<std::string>() << " = " << c["value"].dump() << "\n";
  return report;
}

}  // namespace mspum::cli
