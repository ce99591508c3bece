#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mspum/fem.hpp"
#include "mspum/pou_interp.hpp"

namespace mspum {

enum class CorrectorMode { localized, ideal };

struct CorrectorOptions {
  int m = 1;
  CorrectorMode mode = CorrectorMode::localized;
  int threads = 1;
  bool keep_local = false;       // retain per-(element, node) solutions
  double constraint_tol = 1e-9;  // post-solve fine-scale membership check
};

/// Factorized saddle system of one extension patch: the patch stiffness on
/// free dofs with the active quasi-interpolation rows as constraints,
/// [[K_p, C_p^T], [C_p, 0]]. Constraint rows are the rows of the normalized
/// Clement matrix that are not identically zero on the patch, reduced to a
/// linearly independent subset.
///
/// Proper patches leave K_p positive definite, so the system is eliminated
/// through a dense Schur complement on the few constraint rows (the rows span
/// whole hat supports and would fill a monolithic sparse factorization). The
/// whole-domain patch keeps the indefinite saddle factorization because its
/// stiffness block is singular.
struct SaddleSystem {
  std::vector<int> free_dofs;          // global fine vertex ids, sorted
  std::vector<int> constraint_rows;    // coarse node ids kept
  SpMatR constraint_values;            // normalized Clement rows on free dofs
  int n_free = 0;
  int n_constraints = 0;

  bool schur = false;
  SpMat Kp;                               // patch stiffness, kept for refinement
  Eigen::SimplicialLDLT<SpMat> kp_ldlt;   // schur path: factor of K_p
  Eigen::MatrixXd kinv_ct;                // K_p^-1 C_p^T
  Eigen::LDLT<Eigen::MatrixXd> schur_ldlt;  // C_p K_p^-1 C_p^T
  Eigen::SparseLU<SpMat> lu;              // saddle path
};

std::unique_ptr<SaddleSystem> build_saddle_system(const MeshHierarchy& hier,
                                                  const SpMat& K_fine,
                                                  const ClementOperator& clement,
                                                  const Patch& patch);

/// Right-hand side of the corrector problem for anchor element T and coarse
/// node z: w -> -(stiffness restricted to T) applied to the hat phi_z.
/// Zero when z is not a vertex of T.
Vec assemble_corrector_rhs(const MeshHierarchy& hier,
                           const PiecewiseConstantCoefficient& coeff,
                           int anchor, int z);

/// Solve for the patch corrector, extended by zero to the full fine grid.
/// Throws SolveError if the fine-scale constraint residual exceeds tol.
Vec solve_local_corrector(const Vec& rhs_fine, const SaddleSystem& saddle,
                          double constraint_tol = 1e-9);

struct LocalCorrectorRecord {
  int anchor = -1;
  std::array<int, 3> nodes{};                  // coarse vertex ids, ascending
  std::vector<int> dofs;                       // patch free dofs
  Eigen::Matrix<double, Eigen::Dynamic, 3> q;  // columns follow nodes[]
};

struct CorrectorSet {
  SpMat Q;   // fine x coarse nodes, column z = sum over elements of Q_T(phi_z)
  int m = 0;
  bool ideal = false;
  std::vector<LocalCorrectorRecord> local;  // filled when keep_local
};

/// Solve all (element, vertex) corrector problems and aggregate per coarse
/// node. Within each element the third corrector is the negated sum of the
/// other two, which both halves the solve count and preserves the partition
/// of unity exactly.
CorrectorSet compute_corrector_set(const MeshHierarchy& hier,
                                   const PiecewiseConstantCoefficient& coeff,
                                   const SpMat& K_fine,
                                   const ClementOperator& clement,
                                   const CorrectorOptions& opts);

/// B = P + Q. Column z is the corrected basis function phi_z + Q(phi_z);
/// row sums stay one because the corrector columns sum to zero.
SpMat multiscale_basis(const SpMat& P, const SpMat& Q);

/// Gradient energies ||grad q||^2 on the complement of the k-layer patches
/// around the anchor, k = 0..kmax. Nonincreasing by nestedness.
std::vector<double> decay_profile(const MeshHierarchy& hier, const Vec& q,
                                  int anchor, int kmax);

struct DecayFit {
  double theta = 0.0;  // fitted per-layer amplitude ratio
  double r2 = 0.0;     // quality of the log-linear fit
  int points = 0;
};

/// Log-linear least squares of e_k over k in [k_begin, k_end], truncated at
/// the first nonpositive entry. theta is the amplitude ratio, i.e. the
/// energies decay like theta^(2k).
DecayFit fit_decay(const std::vector<double>& energies, int k_begin, int k_end);

}  // namespace mspum
