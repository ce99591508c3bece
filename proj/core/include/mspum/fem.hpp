#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mspum/coefficient.hpp"
#include "mspum/geometry.hpp"

namespace mspum {

using SpMat = Eigen::SparseMatrix<double>;                     // column major
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stiffness with per-element constant coefficient. Symmetric positive
/// semidefinite; element row sums are zero by construction so constants are
/// in the kernel exactly.
SpMat assemble_stiffness(const StructuredTriMesh& mesh,
                         const PiecewiseConstantCoefficient& coeff);

/// Exact P1 mass matrix (element block area/12 * [[2,1,1],[1,2,1],[1,1,2]]).
SpMat assemble_mass(const StructuredTriMesh& mesh);

/// Load vector via the degree-2 edge-midpoint rule.
Vec assemble_load(const StructuredTriMesh& mesh, const ScalarField& f);

struct NeumannSolution {
  Vec u;
  double multiplier = 0.0;     // compatibility defect of the load
  double residual_norm = 0.0;  // ||K u - b|| / ||b||
  int iterations = 0;
};

struct NeumannOptions {
  double tol = 1e-10;          // relative residual target
  int max_iter = 200000;
  double compat_tol = 1e-8;    // reject loads with |1^T b| > compat_tol * ||b||
};

/// Pure-Neumann solve on V/R: diagonally preconditioned CG with the constant
/// mode deflated, then shifted to exact zero mean against the mass matrix.
/// Equivalent to the one-multiplier augmented system [[K, M1],[(M1)^T, 0]].
NeumannSolution solve_neumann_meanzero(const SpMat& K, const SpMat& M,
                                       const Vec& b,
                                       const NeumannOptions& opts = {});

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;
};

/// K1 is the stiffness assembled with unit coefficient.
Norms norms(const SpMat& M, const SpMat& K1, const Vec& v);

enum class NormKind { l2, h1_semi, h1 };

/// || v - reference || / || reference || in the requested norm.
double relative_error(const SpMat& M, const SpMat& K1, const Vec& reference,
                      const Vec& v, NormKind kind);

/// Value of the coarse hat at node (zx, zy) evaluated at fine lattice point
/// (fx, fy); s fine steps per coarse step. Exact for dyadic s.
double coarse_hat_value(int zx, int zy, int fx, int fy, int s);

/// Columns are the fine-grid nodal representations of the coarse hats.
/// Exact by nestedness; rows sum to one.
SpMat prolongation(const MeshHierarchy& hier);

}  // namespace mspum
