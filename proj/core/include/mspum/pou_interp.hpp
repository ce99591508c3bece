#pragma once

#include <Eigen/Dense>

#include "mspum/fem.hpp"

namespace mspum {

/// Weighted Clement quasi-interpolation from fine nodal vectors to coarse hat
/// coefficients: I(v)_j = (v, phi_j) / (1, phi_j). W holds the unnormalized
/// mass pairings (one row per coarse node), C the row-normalized form, and
/// R = C * P the restriction of I to the coarse space.
struct ClementOperator {
  SpMatR W;              // coarse x fine, row j = (M_f phi_j)^T
  Vec denom;             // (1, phi_j), the row sums of W
  SpMatR C;              // rows of W scaled by 1/denom
  Eigen::MatrixXd R;     // C * P, invertible
  Eigen::PartialPivLU<Eigen::MatrixXd> R_lu;
  int coarse_n = 0;      // mesh identity tags
  int fine_n = 0;

  int coarse_size() const { return static_cast<int>(W.rows()); }
  int fine_size() const { return static_cast<int>(W.cols()); }
};

ClementOperator build_clement(const MeshHierarchy& hier, const SpMat& P,
                              const SpMat& M_fine);

/// Coarse coefficient vector of I(v). Evaluated as ratio of identically
/// accumulated sums, so constants are reproduced exactly.
Vec apply_I(const ClementOperator& op, const Vec& v);

/// P * apply_I(v): the interpolant as a fine-grid function.
Vec apply_I_as_fine(const ClementOperator& op, const SpMat& P, const Vec& v);

/// Fine-grid preimage basis b_z with I(b_z) = phi_z and supp(b_z) inside
/// supp(phi_z): b_z = 7 phi_z^r - 1/2 sum of the red-refinement hats at the
/// midpoint neighbors of z.
struct LiftingBasis {
  SpMat basis;           // fine x coarse nodes, column z = b_z
  int coarse_n = 0;
  int fine_n = 0;
};

LiftingBasis build_lifting(const MeshHierarchy& hier);

/// v with I(v) = coarse_coeffs, supported within one coarse layer of the
/// given coefficients: v = P vc + B_lift (vc - R vc).
Vec lift_to_preimage(const ClementOperator& op, const LiftingBasis& lb,
                     const SpMat& P, const Vec& coarse_coeffs);

}  // namespace mspum
