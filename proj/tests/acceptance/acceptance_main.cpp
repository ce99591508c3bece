// Acceptance suite: runs every acceptance criterion end to end and prints one
// pass/fail line per criterion. Exit code 0 iff all criteria hold.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <mspum/io.hpp>
#include <mspum/msolver.hpp>

#include "config.hpp"
#include "experiment.hpp"

using namespace mspum;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = true;
  std::string detail;
};

std::vector<Criterion> results;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
  results.push_back({id, name, pass, detail});
  std::fprintf(stderr, "  ... criterion %d evaluated (%s)\n", id,
               pass ? "pass" : "FAIL");
}

struct ReferenceRow {
  int coarse_exp;
  int m;
  double l2;
  double h1;
};

// reference values from the published experiment; acceptance allows a
// multiplicative band of [0.5, 1.5] around each
const std::vector<ReferenceRow> kReferenceTable = {
    {1, 0, 0.867827, 0.93475}, {2, 0, 0.865630, 0.96525},
    {2, 1, 0.167501, 0.37387}, {3, 1, 0.257826, 0.61681},
    {3, 2, 0.037841, 0.16525}, {4, 2, 0.063645, 0.25613},
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScalarField experiment_field() {
  return [](Vec2 x) { return eval_a_eps(x, ArcCoefficientParams::with_eps(0.05)); };
}

void criteria_1_2_4(const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  mspum::cli::ExperimentConfig config;
  config.out_dir = out_dir;
  std::ostringstream log;
  const auto result = mspum::cli::run_experiment(config, std::cerr);
  const double minutes = seconds_since(t0) / 60.0;

  // 1: every reference-table cell within +-50% multiplicatively in both norms
  bool pass1 = true;
  std::string detail1;
  for (const auto& row : kReferenceTable) {
    const auto it = std::find_if(result.cells.begin(), result.cells.end(),
                                 [&](const auto& c) {
                                   return c.cell.coarse_exp == row.coarse_exp &&
                                          c.cell.m == row.m;
                                 });
    if (it == result.cells.end()) {
      pass1 = false;
      detail1 += " missing cell;";
      continue;
    }
    const bool l2_ok = it->report.rel_l2 >= 0.5 * row.l2 &&
                       it->report.rel_l2 <= 1.5 * row.l2;
    const bool h1_ok = it->report.rel_h1 >= 0.5 * row.h1 &&
                       it->report.rel_h1 <= 1.5 * row.h1;
    char buf[160];
    std::snprintf(buf, sizeof buf, " (2^-%d,%d): l2 %.4f/%.4f%s h1 %.4f/%.4f%s;",
                  row.coarse_exp, row.m, it->report.rel_l2, row.l2,
                  l2_ok ? "" : "!", it->report.rel_h1, row.h1, h1_ok ? "" : "!");
    detail1 += buf;
    pass1 = pass1 && l2_ok && h1_ok;
  }
  char rt[64];
  std::snprintf(rt, sizeof rt, " runtime %.1f min", minutes);
  record(1, "reference error table reproduced within +-50%", pass1 && minutes < 45.0,
         detail1 + rt);

  // 2: stagnation at m=0 and the >=3x drop along the parameter diagonal
  const auto cell = [&](int ce, int m) {
    return std::find_if(result.cells.begin(), result.cells.end(),
                        [&](const auto& c) {
                          return c.cell.coarse_exp == ce && c.cell.m == m;
                        });
  };
  const double e10 = cell(1, 0)->report.rel_l2;
  const double e20 = cell(2, 0)->report.rel_l2;
  const double stag = std::max(e10, e20) / std::min(e10, e20);
  const double drop = cell(2, 1)->report.rel_l2 / cell(3, 2)->report.rel_l2;
  char buf2[128];
  std::snprintf(buf2, sizeof buf2,
                " stagnation ratio %.3f (<= 1.15), diagonal drop %.2fx (>= 3)",
                stag, drop);
  record(2, "qualitative error table structure", stag <= 1.15 && drop >= 3.0, buf2);

  // 4: partition of unity preserved on every sweep cell
  double worst_pu = 0.0;
  for (const auto& c : result.cells) worst_pu = std::max(worst_pu, c.pu_residual);
  char buf4[96];
  std::snprintf(buf4, sizeof buf4, " max |sum basis - 1| = %.3e (<= 1e-9)", worst_pu);
  record(4, "partition of unity preserved under correction", worst_pu <= 1e-9, buf4);
}

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ratios;
  for (int ce : {1, 2, 3}) {
    // the H-linear envelope of the ideal error bound is attained by loads
    // oscillating at the coarse scale; a fixed load either superconverges
    // (smooth: its coarse data oscillation is higher order) or stagnates
    // (fine-scale rough: the fine response does not see H)
    const int cells = 1 << (ce + 1);  // mean-zero +-1 load at scale H/2
    const auto f = [cells](Vec2 x) {
      const int cx = std::min(static_cast<int>(x.x * cells), cells - 1);
      const int cy = std::min(static_cast<int>(x.y * cells), cells - 1);
      return ((cx + cy) % 2 == 0) ? 1.0 : -1.0;
    };
    const MeshHierarchy hier = build_hierarchy(1 << ce, 6 - ce);
    const auto coeff = discretize(checkerboard_field(32, 1.0, 100.0), hier.fine);
    const SpMat P = prolongation(hier);
    const SpMat M = assemble_mass(hier.fine);
    const SpMat K = assemble_stiffness(hier.fine, coeff);
    const ClementOperator cl = build_clement(hier, P, M);
    const Vec b = assemble_load(hier.fine, f);

    CorrectorOptions opts;
    opts.mode = CorrectorMode::ideal;
    const CorrectorSet set = compute_corrector_set(hier, coeff, K, cl, opts);
    const MultiscaleSolve ms = solve_multiscale(K, M, b, multiscale_basis(P, set.Q));
    const NeumannSolution ref = solve_neumann_meanzero(K, M, b);
    const Vec e = ref.u - ms.u_ms;
    ratios.push_back(std::sqrt(e.dot(K * e)) / std::ldexp(1.0, -ce));
  }
  const auto mm = std::minmax_element(ratios.begin(), ratios.end());
  const double band = *mm.second / *mm.first;
  const double minutes = seconds_since(t0) / 60.0;
  char buf[128];
  std::snprintf(buf, sizeof buf,
                " energy-error/H spread %.3f (<= 1.5) over H = 2^-1..2^-3, %.1f min",
                band, minutes);
  record(3, "ideal method converges linearly in H", band <= 1.5 && minutes < 5.0, buf);
}

void criterion_5() {
  const MeshHierarchy hier = build_hierarchy(4, 3);
  const auto coeff = discretize(experiment_field(), hier.fine);
  const SpMat P = prolongation(hier);
  const SpMat M = assemble_mass(hier.fine);
  const SpMat K = assemble_stiffness(hier.fine, coeff);
  const ClementOperator cl = build_clement(hier, P, M);
  const LiftingBasis lb = build_lifting(hier);

  CorrectorOptions opts;
  opts.mode = CorrectorMode::ideal;
  const CorrectorSet set = compute_corrector_set(hier, coeff, K, cl, opts);
  const SpMat B = multiscale_basis(P, set.Q);

  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Vec r(hier.fine.vertex_count());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = dist(rng);
    const Vec w = r - lift_to_preimage(cl, lb, P, apply_I(cl, r));
    const Vec Kw = K * w;
    const double wnorm = std::sqrt(w.dot(Kw));
    for (int z = 0; z < B.cols(); ++z) {
      const Vec bz = B.col(z);
      worst = std::max(worst,
                       std::abs(bz.dot(Kw)) / (std::sqrt(bz.dot(K * bz)) * wnorm));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, " max relative residual %.3e (<= 1e-8)", worst);
  record(5, "ideal corrected basis is a-orthogonal to the fine scales",
         worst <= 1e-8, buf);
}

void criterion_6() {
  // 6a: saturated localized correctors equal a dense monolithic saddle solve
  const MeshHierarchy hier = build_hierarchy(2, 2);
  const auto coeff = discretize(experiment_field(), hier.fine);
  const SpMat P = prolongation(hier);
  const SpMat M = assemble_mass(hier.fine);
  const SpMat K = assemble_stiffness(hier.fine, coeff);
  const ClementOperator cl = build_clement(hier, P, M);

  const int nv = hier.fine.vertex_count();
  const int nc = hier.coarse.vertex_count();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nv + nc, nv + nc);
  S.topLeftCorner(nv, nv) = Eigen::MatrixXd(K);
  const Eigen::MatrixXd Cd(cl.C);
  S.topRightCorner(nv, nc) = Cd.transpose();
  S.bottomLeftCorner(nc, nv) = Cd;
  const Eigen::FullPivLU<Eigen::MatrixXd> dense(S);

  const Patch full = extend_patch(hier, 0, saturation_layers(hier.coarse));
  const auto saddle = build_saddle_system(hier, K, cl, full);
  double worst = 0.0;
  for (int anchor = 0; anchor < hier.coarse.triangle_count(); ++anchor) {
    for (int z : hier.coarse.triangles[anchor]) {
      const Vec rhs = assemble_corrector_rhs(hier, coeff, anchor, z);
      const Vec q = solve_local_corrector(rhs, *saddle);
      Vec packed = Vec::Zero(nv + nc);
      packed.head(nv) = rhs;
      const Vec q_dense = dense.solve(packed).head(nv);
      worst = std::max(worst, (q - q_dense).cwiseAbs().maxCoeff());
    }
  }

  // 6b: with coarse = fine the multiscale solve reproduces the fine solve
  const MeshHierarchy flat = build_hierarchy(16, 0);
  const auto coeff_flat = discretize(experiment_field(), flat.fine);
  const SpMat Pf = prolongation(flat);
  const SpMat Mf = assemble_mass(flat.fine);
  const SpMat Kf = assemble_stiffness(flat.fine, coeff_flat);
  const SpMat K1f = assemble_stiffness(flat.fine, constant_coefficient(flat.fine, 1.0));
  const ClementOperator clf = build_clement(flat, Pf, Mf);
  const Vec bf = assemble_load(flat.fine, [](Vec2 x) { return x.x - 0.5; });
  CorrectorOptions opts;
  opts.m = 0;
  const CorrectorSet set = compute_corrector_set(flat, coeff_flat, Kf, clf, opts);
  const MultiscaleSolve ms = solve_multiscale(Kf, Mf, bf, multiscale_basis(Pf, set.Q));
  const NeumannSolution ref = solve_neumann_meanzero(Kf, Mf, bf);
  const double flat_err = relative_error(Mf, K1f, ref.u, ms.u_ms, NormKind::l2);

  char buf[128];
  std::snprintf(buf, sizeof buf,
                " saturated vs dense %.3e (<= 1e-9); levels=0 error %.3e (<= 1e-8)",
                worst, flat_err);
  record(6, "oracle equivalence of the corrector solves",
         worst <= 1e-9 && flat_err <= 1e-8, buf);
}

void criterion_7() {
  const MeshHierarchy hier = build_hierarchy(4, 1);
  const SpMat P = prolongation(hier);
  const SpMat M = assemble_mass(hier.fine);
  const ClementOperator cl = build_clement(hier, P, M);
  const LiftingBasis lb = build_lifting(hier);
  double worst = 0.0;
  bool support_ok = true;
  for (int z = 0; z < hier.coarse.vertex_count(); ++z) {
    Vec e = Vec::Zero(hier.coarse.vertex_count());
    e[z] = 1.0;
    worst = std::max(worst,
                     (apply_I(cl, Vec(lb.basis.col(z))) - e).cwiseAbs().maxCoeff());
    const Vec phi = P.col(z);
    const Vec bz = lb.basis.col(z);
    for (Eigen::Index i = 0; i < bz.size(); ++i)
      if (bz[i] != 0.0 && phi[i] == 0.0) support_ok = false;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, " max |I(b_z) - e_z| = %.3e (<= 1e-10), support %s",
                worst, support_ok ? "contained" : "VIOLATED");
  record(7, "lifting preimages of the coarse hats", worst <= 1e-10 && support_ok,
         buf);
}

void criterion_8() {
  const MeshHierarchy hier = build_hierarchy(8, 3);
  const SpMat P = prolongation(hier);
  const SpMat M = assemble_mass(hier.fine);
  const ClementOperator cl = build_clement(hier, P, M);
  const int anchor = 0;
  const int z = hier.coarse.triangles[anchor][0];

  bool pass = true;
  std::string detail;
  for (const bool checker : {false, true}) {
    const auto coeff = checker ? discretize(checkerboard_field(16, 1.0, 100.0),
                                            hier.fine)
                               : constant_coefficient(hier.fine, 1.0);
    const SpMat K = assemble_stiffness(hier.fine, coeff);
    const Patch full = extend_patch(hier, anchor, saturation_layers(hier.coarse));
    const auto saddle = build_saddle_system(hier, K, cl, full);
    const Vec rhs = assemble_corrector_rhs(hier, coeff, anchor, z);
    const Vec q = solve_local_corrector(rhs, *saddle);
    const auto energies = decay_profile(hier, q, anchor, 6);
    const DecayFit fit = fit_decay(energies, 1, 5);
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s: theta %.3f, R2 %.3f;",
                  checker ? "checkerboard" : "unit", fit.theta, fit.r2);
    detail += buf;
    pass = pass && fit.theta > 0.0 && fit.theta < 1.0 && fit.r2 >= 0.9;
  }
  record(8, "exponential decay of the ideal corrector", pass, detail);
}

void criterion_9() {
  const auto analytic = [](Vec2 p) {
    return p.x * p.x / 4.0 - p.x * p.x * p.x / 6.0 - 1.0 / 24.0;
  };
  std::vector<double> errors;
  for (int k : {4, 5, 6}) {
    const auto mesh = build_uniform_mesh(1 << k);
    const auto K = assemble_stiffness(mesh, constant_coefficient(mesh, 1.0));
    const auto M = assemble_mass(mesh);
    const Vec b = assemble_load(mesh, [](Vec2 x) { return x.x - 0.5; });
    const auto sol = solve_neumann_meanzero(K, M, b);
    Vec exact(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i)
      exact[i] = analytic(mesh.vertices[i]);
    errors.push_back(relative_error(M, K, exact, sol.u, NormKind::l2));
  }
  const double o1 = std::log2(errors[0] / errors[1]);
  const double o2 = std::log2(errors[1] / errors[2]);
  char buf[96];
  std::snprintf(buf, sizeof buf, " observed orders %.2f, %.2f (>= 1.9)", o1, o2);
  record(9, "fine FEM converges at second order to the closed form", o1 >= 1.9 && o2 >= 1.9,
         buf);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir =
      argc > 1 ? argv[1]
               : (std::filesystem::temp_directory_path() / "mspum_acceptance").string();

  criterion_9();
  criterion_7();
  criterion_6();
  criterion_5();
  criterion_8();
  criterion_3();
  criteria_1_2_4(out_dir);

  std::sort(results.begin(), results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int passed = 0;
  for (const auto& c : results) {
    std::printf("[%s] criterion %d: %s --%s\n", c.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.detail.c_str());
    passed += c.pass ? 1 : 0;
  }
  std::printf("acceptance: %d/%d criteria passed\n", passed,
              static_cast<int>(results.size()));
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
