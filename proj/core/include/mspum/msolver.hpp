#pragma once

#include <cstdint>
#include <string>

#include "mspum/corrector.hpp"
#include "mspum/fem.hpp"

namespace mspum {

struct MultiscaleOptions {
  int dense_cutoff = 2048;    // reduced systems up to this size use dense LU
  double residual_tol = 1e-8;
};

struct MultiscaleSolve {
  Vec coarse;          // coefficients in the corrected basis
  Vec u_ms;            // fine-grid representation B * coarse
  double multiplier = 0.0;
  double residual = 0.0;
  int dim = 0;
};

/// Galerkin solve in the corrected space with the zero-mean constraint
/// appended as one symmetric multiplier row:
/// [[B^T K B, B^T M 1], [(B^T M 1)^T, 0]].
MultiscaleSolve solve_multiscale(const SpMat& K_fine, const SpMat& M_fine,
                                 const Vec& b, const SpMat& B,
                                 const MultiscaleOptions& opts = {});

struct ErrorReport {
  double H = 0.0;       // nominal coarse mesh size 2^-coarse_exp
  int m = 0;
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;  // full H1 norm
  double rel_h1_semi = 0.0;
  double h = 0.0;       // reference mesh size
};

ErrorReport compare(const Vec& u_ms, const Vec& u_ref, const SpMat& M,
                    const SpMat& K1, double H, int m, double h);

std::string error_csv_header();
std::string error_csv_row(const ErrorReport& row);

struct GapReport {
  Vec per_node;        // energy distance per coarse node column
  double max_gap = 0.0;
  double total = 0.0;  // l2 aggregate over columns
};

/// Energy distances ||grad(Q_ideal phi_z - Q_m phi_z)|| between two corrector
/// sets on the same hierarchy.
GapReport localization_gap(const CorrectorSet& ideal, const CorrectorSet& localized,
                           const SpMat& K1);

/// FNV-1a over the coefficient bytes; keys the on-disk reference cache.
std::uint64_t coefficient_hash(const PiecewiseConstantCoefficient& coeff);

/// Fine reference solve memoized on disk under cache_dir (empty = no caching),
/// keyed by (fine n, coefficient hash).
NeumannSolution solve_reference_cached(const SpMat& K, const SpMat& M, const Vec& b,
                                       int fine_n, std::uint64_t coeff_hash,
                                       const std::string& cache_dir,
                                       const NeumannOptions& opts = {});

}  // namespace mspum
