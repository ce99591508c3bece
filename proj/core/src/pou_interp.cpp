#include "mspum/pou_interp.hpp"

#include <set>
#include <stdexcept>

namespace mspum {

ClementOperator build_clement(const MeshHierarchy& hier, const SpMat& P,
                              const SpMat& M_fine) {
  ClementOperator op;
  op.coarse_n = hier.coarse.n;
  op.fine_n = hier.fine.n;
  if (P.rows() != hier.fine.vertex_count() || P.cols() != hier.coarse.vertex_count())
    throw std::invalid_argument("build_clement: prolongation shape mismatch");

  op.W = (P.transpose() * M_fine).eval();
  op.denom.resize(op.W.rows());
  for (int j = 0; j < op.W.rows(); ++j) {
    double s = 0.0;
    for (SpMatR::InnerIterator it(op.W, j); it; ++it) s += it.value();
    op.denom[j] = s;
  }

  op.C = op.W;
  for (int j = 0; j < op.C.rows(); ++j)
    for (SpMatR::InnerIterator it(op.C, j); it; ++it)
      it.valueRef() /= op.denom[j];

  op.R = Eigen::MatrixXd(SpMat(op.C * P));
  op.R_lu.compute(op.R);
  // nested P1 spaces always give an invertible restriction; a degenerate
  // factorization here indicates a broken operator
  const double rcond = op.R_lu.rcond();
  if (!(rcond > 0.0))
    throw SolveError("build_clement: singular restriction R, rcond = " +
                     std::to_string(rcond));
  return op;
}

Vec apply_I(const ClementOperator& op, const Vec& v) {
  if (v.size() != op.W.cols())
    throw std::invalid_argument("apply_I: vector is not on the tagged fine mesh");
  Vec out(op.W.rows());
  for (int j = 0; j < op.W.rows(); ++j) {
    double s = 0.0;
    for (SpMatR::InnerIterator it(op.W, j); it; ++it) s += it.value() * v[it.col()];
    out[j] = s / op.denom[j];
  }
  return out;
}

Vec apply_I_as_fine(const ClementOperator& op, const SpMat& P, const Vec& v) {
  return P * apply_I(op, v);
}

LiftingBasis build_lifting(const MeshHierarchy& hier) {
  if (hier.levels < 1)
    throw std::invalid_argument(
        "build_lifting: needs at least one refinement between coarse and fine");

  const int nc = hier.coarse.n;
  const StructuredTriMesh red = build_uniform_mesh(2 * nc);

  // red-mesh edge neighbors of each coarse vertex = incident edge midpoints
  const int n1c = nc + 1, n1r = 2 * nc + 1;
  std::vector<Eigen::Triplet<double>> trips;
  for (int zy = 0; zy < n1c; ++zy) {
    for (int zx = 0; zx < n1c; ++zx) {
      const int col = zy * n1c + zx;
      const int zred = (2 * zy) * n1r + 2 * zx;
      trips.emplace_back(zred, col, 7.0);  // 2^(d+1) - 1 in two dimensions
      std::set<int> neighbors;
      for (int t : red.vertex_to_triangles[zred])
        for (int v : red.triangles[t])
          if (v != zred) neighbors.insert(v);
      for (int y : neighbors) trips.emplace_back(y, col, -0.5);
    }
  }
  SpMat b_red(red.vertex_count(), n1c * n1c);
  b_red.setFromTriplets(trips.begin(), trips.end());

  // express on the fine grid: red mesh is nested with levels-1 refinements left
  LiftingBasis lb;
  lb.coarse_n = nc;
  lb.fine_n = hier.fine.n;
  if (hier.levels == 1) {
    lb.basis = b_red;
  } else {
    const MeshHierarchy red_to_fine = build_hierarchy(2 * nc, hier.levels - 1,
                                                      hier.fine.n);
    lb.basis = prolongation(red_to_fine) * b_red;
  }
  return lb;
}

Vec lift_to_preimage(const ClementOperator& op, const LiftingBasis& lb,
                     const SpMat& P, const Vec& coarse_coeffs) {
  if (coarse_coeffs.size() != op.W.rows())
    throw std::invalid_argument("lift_to_preimage: coarse size mismatch");
  const Vec vc_fine = P * coarse_coeffs;
  const Vec defect = coarse_coeffs - apply_I(op, vc_fine);
  return vc_fine + lb.basis * defect;
}

}  // namespace mspum
