#include "mspum/corrector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

namespace mspum {

namespace {

// local P1 stiffness action on element t: out += coeff * area * G G^T loc
void element_stiffness_apply(const StructuredTriMesh& mesh, int t, double coeff,
                             const double loc[3], double out[3]) {
  const auto& tri = mesh.triangles[t];
  const Vec2 p0 = mesh.vertices[tri[0]];
  const Vec2 p1 = mesh.vertices[tri[1]];
  const Vec2 p2 = mesh.vertices[tri[2]];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  const double bx[3] = {(p1.y - p2.y) / det, (p2.y - p0.y) / det, (p0.y - p1.y) / det};
  const double by[3] = {(p2.x - p1.x) / det, (p0.x - p2.x) / det, (p1.x - p0.x) / det};
  const double s = coeff * det / 2.0;
  const double gx = bx[0] * loc[0] + bx[1] * loc[1] + bx[2] * loc[2];
  const double gy = by[0] * loc[0] + by[1] * loc[1] + by[2] * loc[2];
  for (int a = 0; a < 3; ++a) out[a] += s * (bx[a] * gx + by[a] * gy);
}

}  // namespace

std::unique_ptr<SaddleSystem> build_saddle_system(const MeshHierarchy& hier,
                                                  const SpMat& K_fine,
                                                  const ClementOperator& clement,
                                                  const Patch& patch) {
  auto sys = std::make_unique<SaddleSystem>();
  sys->free_dofs = patch.free_fine_vertices;
  const int n_free = static_cast<int>(sys->free_dofs.size());
  sys->n_free = n_free;
  if (n_free == 0) return sys;

  std::vector<int> local(K_fine.rows(), -1);
  for (int a = 0; a < n_free; ++a) local[sys->free_dofs[a]] = a;

  // candidate constraint rows: nodes of coarse elements in the patch (hats
  // of all other nodes vanish on the patch)
  std::set<int> candidates;
  for (int ct : patch.coarse_elements)
    for (int v : hier.coarse.triangles[ct]) candidates.insert(v);

  std::vector<int> rows;
  std::vector<std::vector<std::pair<int, double>>> row_entries;  // (local, value)
  for (int j : candidates) {
    std::vector<std::pair<int, double>> entries;
    for (SpMatR::InnerIterator it(clement.C, j); it; ++it)
      if (local[it.col()] >= 0) entries.emplace_back(local[it.col()], it.value());
    if (!entries.empty()) {
      rows.push_back(j);
      row_entries.push_back(std::move(entries));
    }
  }

  // drop linearly dependent rows (degenerate only for very small patches):
  // rank-revealing QR of the constraint Gram matrix
  const int na = static_cast<int>(rows.size());
  if (na > 1) {
    SpMatR Cp(na, n_free);
    {
      std::vector<Eigen::Triplet<double>> trips;
      for (int a = 0; a < na; ++a)
        for (const auto& [c, v] : row_entries[a]) trips.emplace_back(a, c, v);
      Cp.setFromTriplets(trips.begin(), trips.end());
    }
    Eigen::MatrixXd G = Eigen::MatrixXd(SpMat(Cp * SpMatR(Cp.transpose())));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < na) {
      std::vector<int> keep(qr.colsPermutation().indices().data(),
                            qr.colsPermutation().indices().data() + rank);
      std::sort(keep.begin(), keep.end());
      std::vector<int> rows2;
      std::vector<std::vector<std::pair<int, double>>> entries2;
      for (int idx : keep) {
        rows2.push_back(rows[idx]);
        entries2.push_back(std::move(row_entries[idx]));
      }
      rows = std::move(rows2);
      row_entries = std::move(entries2);
    }
  }
  sys->constraint_rows = rows;
  const int nc = static_cast<int>(rows.size());
  sys->n_constraints = nc;

  {
    std::vector<Eigen::Triplet<double>> trips;
    for (int a = 0; a < nc; ++a)
      for (const auto& [c, v] : row_entries[a]) trips.emplace_back(a, c, v);
    sys->constraint_values.resize(nc, n_free);
    sys->constraint_values.setFromTriplets(trips.begin(), trips.end());
  }

  sys->Kp.resize(n_free, n_free);
  {
    std::vector<Eigen::Triplet<double>> trips;
    for (int a = 0; a < n_free; ++a) {
      const int j = sys->free_dofs[a];
      for (SpMat::InnerIterator it(K_fine, j); it; ++it)
        if (local[it.row()] >= 0) trips.emplace_back(local[it.row()], a, it.value());
    }
    sys->Kp.setFromTriplets(trips.begin(), trips.end());
  }
  const SpMat& Kp = sys->Kp;

  // only the whole-domain patch frees every vertex; its K_p is singular
  sys->schur = n_free < K_fine.rows();

  if (sys->schur) {
    sys->kp_ldlt.compute(Kp);
    if (sys->kp_ldlt.info() != Eigen::Success)
      throw SolveError("build_saddle_system: stiffness factorization failed, patch " +
                       std::to_string(patch.anchor));
    if (nc > 0) {
      Eigen::MatrixXd Ct = Eigen::MatrixXd(SpMatR(sys->constraint_values)).transpose();
      sys->kinv_ct = sys->kp_ldlt.solve(Ct);
      sys->schur_ldlt.compute(Eigen::MatrixXd(sys->constraint_values * sys->kinv_ct));
      if (sys->schur_ldlt.info() != Eigen::Success)
        throw SolveError("build_saddle_system: constraint Schur factorization failed, patch " +
                         std::to_string(patch.anchor));
    }
    return sys;
  }

  // saddle matrix with constraint rows rescaled to unit max-norm
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < Kp.outerSize(); ++k)
    for (SpMat::InnerIterator it(Kp, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  for (int a = 0; a < nc; ++a) {
    double mx = 0.0;
    for (const auto& [c, v] : row_entries[a]) mx = std::max(mx, std::abs(v));
    const double scale = 1.0 / mx;
    for (const auto& [c, v] : row_entries[a]) {
      trips.emplace_back(n_free + a, c, scale * v);
      trips.emplace_back(c, n_free + a, scale * v);
    }
  }
  SpMat S(n_free + nc, n_free + nc);
  S.setFromTriplets(trips.begin(), trips.end());
  sys->lu.compute(S);
  if (sys->lu.info() != Eigen::Success)
    throw SolveError("build_saddle_system: factorization failed for patch anchored at " +
                     std::to_string(patch.anchor));
  return sys;
}

Vec assemble_corrector_rhs(const MeshHierarchy& hier,
                           const PiecewiseConstantCoefficient& coeff,
                           int anchor, int z) {
  const auto& fine = hier.fine;
  Vec rhs = Vec::Zero(fine.vertex_count());
  const int n1c = hier.coarse.n + 1;
  const int zx = z % n1c, zy = z / n1c;
  const int s = fine.n / hier.coarse.n;
  const int n1f = fine.n + 1;
  double out[3], loc[3];
  for (int t : hier.coarse_to_fine_elements[anchor]) {
    const auto& tri = fine.triangles[t];
    for (int a = 0; a < 3; ++a) {
      const int fx = tri[a] % n1f, fy = tri[a] / n1f;
      loc[a] = coarse_hat_value(zx, zy, fx, fy, s);
    }
    out[0] = out[1] = out[2] = 0.0;
    element_stiffness_apply(fine, t, coeff.values[t], loc, out);
    for (int a = 0; a < 3; ++a) rhs[tri[a]] -= out[a];
  }
  return rhs;
}

Vec solve_local_corrector(const Vec& rhs_fine, const SaddleSystem& saddle,
                          double constraint_tol) {
  Vec q = Vec::Zero(rhs_fine.size());
  if (saddle.n_free == 0) return q;

  Vec rhs(saddle.n_free);
  for (int a = 0; a < saddle.n_free; ++a) rhs[a] = rhs_fine[saddle.free_dofs[a]];

  Vec q_free;
  if (saddle.schur) {
    // eliminate: q = K^-1 (rhs - C^T mu) with mu from the constraint Schur
    // complement, then one KKT refinement sweep
    const Vec y = saddle.kp_ldlt.solve(rhs);
    if (saddle.n_constraints > 0) {
      const auto& C = saddle.constraint_values;
      Vec mu = saddle.schur_ldlt.solve(C * y);
      q_free = y - saddle.kinv_ct * mu;
      const Vec r = rhs - saddle.Kp * q_free - C.transpose() * mu;
      const Vec s = C * q_free;
      const Vec dy = saddle.kp_ldlt.solve(r);
      const Vec dmu = saddle.schur_ldlt.solve(C * dy + s);
      q_free += dy - saddle.kinv_ct * dmu;
    } else {
      q_free = y;
    }
  } else {
    Vec packed = Vec::Zero(saddle.n_free + saddle.n_constraints);
    packed.head(saddle.n_free) = rhs;
    const Vec sol = saddle.lu.solve(packed);
    if (saddle.lu.info() != Eigen::Success)
      throw SolveError("solve_local_corrector: back substitution failed");
    q_free = sol.head(saddle.n_free);
  }

  const double qmax = q_free.size() ? q_free.cwiseAbs().maxCoeff() : 0.0;
  if (saddle.n_constraints > 0) {
    const double resid = (saddle.constraint_values * q_free).cwiseAbs().maxCoeff();
    if (resid > constraint_tol * std::max(1.0, qmax))
      throw SolveError("solve_local_corrector: fine-scale constraint residual " +
                       std::to_string(resid));
  }
  for (int a = 0; a < saddle.n_free; ++a) q[saddle.free_dofs[a]] = q_free[a];
  return q;
}

namespace {

LocalCorrectorRecord solve_element_correctors(const MeshHierarchy& hier,
                                              const PiecewiseConstantCoefficient& coeff,
                                              const SaddleSystem& saddle,
                                              int anchor, double constraint_tol) {
  LocalCorrectorRecord rec;
  rec.anchor = anchor;
  auto tri = hier.coarse.triangles[anchor];
  std::sort(tri.begin(), tri.end());
  rec.nodes = {tri[0], tri[1], tri[2]};
  rec.dofs = saddle.free_dofs;
  const int nf = static_cast<int>(rec.dofs.size());
  rec.q.resize(nf, 3);
  if (nf == 0) return rec;

  // solve the first two; the third follows from the local partition of unity
  // (the three right-hand sides sum to zero on the element), keeping the
  // aggregated corrector columns summing to zero exactly
  Vec q0, q1;
  for (int k = 0; k < 2; ++k) {
    const Vec rhs = assemble_corrector_rhs(hier, coeff, anchor, rec.nodes[k]);
    Vec q;
    try {
      q = solve_local_corrector(rhs, saddle, constraint_tol);
    } catch (const SolveError& e) {
      throw SolveError("corrector (" + std::to_string(anchor) + ", " +
                       std::to_string(rec.nodes[k]) + "): " + e.what());
    }
    (k == 0 ? q0 : q1) = std::move(q);
  }
  for (int a = 0; a < nf; ++a) {
    rec.q(a, 0) = q0[rec.dofs[a]];
    rec.q(a, 1) = q1[rec.dofs[a]];
    rec.q(a, 2) = -(rec.q(a, 0) + rec.q(a, 1));
  }
  return rec;
}

}  // namespace

CorrectorSet compute_corrector_set(const MeshHierarchy& hier,
                                   const PiecewiseConstantCoefficient& coeff,
                                   const SpMat& K_fine,
                                   const ClementOperator& clement,
                                   const CorrectorOptions& opts) {
  CorrectorSet set;
  set.m = opts.m;
  set.ideal = opts.mode == CorrectorMode::ideal;
  const int nt_c = hier.coarse.triangle_count();
  const int nv_f = hier.fine.vertex_count();
  const int nv_c = hier.coarse.vertex_count();

  if (hier.levels == 0) {
    // the coarse space already spans everything: ker(I) on the fine grid is
    // trivial and every corrector vanishes identically
    set.Q = SpMat(nv_f, nv_c);
    return set;
  }

  std::vector<LocalCorrectorRecord> records(nt_c);

  if (set.ideal) {
    const Patch full = extend_patch(hier, 0, saturation_layers(hier.coarse));
    const auto saddle = build_saddle_system(hier, K_fine, clement, full);
    for (int anchor = 0; anchor < nt_c; ++anchor)
      records[anchor] = solve_element_correctors(hier, coeff, *saddle, anchor,
                                                 opts.constraint_tol);
  } else {
    const int n_threads = std::max(1, opts.threads);
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(nt_c);
    auto worker = [&]() {
      for (int anchor = next.fetch_add(1); anchor < nt_c; anchor = next.fetch_add(1)) {
        try {
          const Patch patch = extend_patch(hier, anchor, opts.m);
          const auto saddle = build_saddle_system(hier, K_fine, clement, patch);
          records[anchor] = solve_element_correctors(hier, coeff, *saddle, anchor,
                                                     opts.constraint_tol);
        } catch (...) {
          errors[anchor] = std::current_exception();
        }
      }
    };
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(n_threads);
      for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (int anchor = 0; anchor < nt_c; ++anchor)
      if (errors[anchor]) std::rethrow_exception(errors[anchor]);
  }

  // ordered aggregation: deterministic independent of the thread schedule
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& rec : records)
    for (int k = 0; k < 3; ++k)
      for (size_t a = 0; a < rec.dofs.size(); ++a)
        trips.emplace_back(rec.dofs[a], rec.nodes[k], rec.q(a, k));
  set.Q = SpMat(nv_f, nv_c);
  set.Q.setFromTriplets(trips.begin(), trips.end());

  if (opts.keep_local) set.local = std::move(records);
  return set;
}

SpMat multiscale_basis(const SpMat& P, const SpMat& Q) { return P + Q; }

std::vector<double> decay_profile(const MeshHierarchy& hier, const Vec& q,
                                  int anchor, int kmax) {
  const auto& fine = hier.fine;
  std::vector<double> energy(fine.triangle_count());
  for (int t = 0; t < fine.triangle_count(); ++t) {
    const auto& tri = fine.triangles[t];
    const Vec2 p0 = fine.vertices[tri[0]];
    const Vec2 p1 = fine.vertices[tri[1]];
    const Vec2 p2 = fine.vertices[tri[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const double gx = ((p1.y - p2.y) * q[tri[0]] + (p2.y - p0.y) * q[tri[1]] +
                       (p0.y - p1.y) * q[tri[2]]) / det;
    const double gy = ((p2.x - p1.x) * q[tri[0]] + (p0.x - p2.x) * q[tri[1]] +
                       (p1.x - p0.x) * q[tri[2]]) / det;
    energy[t] = det / 2.0 * (gx * gx + gy * gy);
  }
  std::vector<double> out;
  out.reserve(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    const Patch patch = extend_patch(hier, anchor, k);
    std::vector<char> inside(fine.triangle_count(), 0);
    for (int t : patch.fine_elements) inside[t] = 1;
    double e = 0.0;
    for (int t = 0; t < fine.triangle_count(); ++t)
      if (!inside[t]) e += energy[t];
    out.push_back(e);
  }
  return out;
}

DecayFit fit_decay(const std::vector<double>& energies, int k_begin, int k_end) {
  DecayFit fit;
  std::vector<double> xs, ys;
  for (int k = k_begin; k <= k_end && k < static_cast<int>(energies.size()); ++k) {
    if (!(energies[k] > 0.0)) break;
    xs.push_back(k);
    ys.push_back(std::log(energies[k]));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) return fit;
  const int n = fit.points;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / n;
  for (int i = 0; i < n; ++i) {
    const double pred = intercept + slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  fit.theta = std::exp(slope / 2.0);  // energies behave like theta^(2k)
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace mspum
