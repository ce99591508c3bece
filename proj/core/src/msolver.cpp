#include "mspum/msolver.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mspum {

MultiscaleSolve solve_multiscale(const SpMat& K_fine, const SpMat& M_fine,
                                 const Vec& b, const SpMat& B,
                                 const MultiscaleOptions& opts) {
  const int N = static_cast<int>(B.cols());
  if (B.rows() != K_fine.rows() || b.size() != K_fine.rows())
    throw std::invalid_argument("solve_multiscale: dimension mismatch");

  const SpMat KB = K_fine * B;
  const Vec g = B.transpose() * (M_fine * Vec::Ones(M_fine.rows()));
  const Vec rhs = B.transpose() * b;
  const double rhs_norm = rhs.norm();

  MultiscaleSolve out;
  out.dim = N;
  Vec x(N + 1);

  if (N <= opts.dense_cutoff) {
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(N + 1, N + 1);
    aug.topLeftCorner(N, N) = Eigen::MatrixXd(SpMat(B.transpose() * KB));
    aug.topRightCorner(N, 1) = g;
    aug.bottomLeftCorner(1, N) = g.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(aug);
    Vec full_rhs(N + 1);
    full_rhs << rhs, 0.0;
    x = lu.solve(full_rhs);
    const double resid = (aug * x - full_rhs).norm();
    out.residual = rhs_norm > 0.0 ? resid / rhs_norm : resid;
    if (out.residual > opts.residual_tol)
      throw SolveError("solve_multiscale: reduced dense system residual " +
                       std::to_string(out.residual) + ", rcond = " +
                       std::to_string(lu.rcond()));
  } else {
    const SpMat G = SpMat(B.transpose() * KB);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(G.nonZeros() + 2 * N);
    for (int k = 0; k < G.outerSize(); ++k)
      for (SpMat::InnerIterator it(G, k); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                           it.value());
    for (int i = 0; i < N; ++i) {
      trips.emplace_back(i, N, g[i]);
      trips.emplace_back(N, i, g[i]);
    }
    SpMat aug(N + 1, N + 1);
    aug.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<SpMat> lu(aug);
    if (lu.info() != Eigen::Success)
      throw SolveError("solve_multiscale: reduced sparse factorization failed");
    Vec full_rhs(N + 1);
    full_rhs << rhs, 0.0;
    x = lu.solve(full_rhs);
    const double resid = (aug * x - full_rhs).norm();
    out.residual = rhs_norm > 0.0 ? resid / rhs_norm : resid;
    if (out.residual > opts.residual_tol)
      throw SolveError("solve_multiscale: reduced sparse system residual " +
                       std::to_string(out.residual));
  }

  out.coarse = x.head(N);
  out.multiplier = x[N];
  out.u_ms = B * out.coarse;
  return out;
}

ErrorReport compare(const Vec& u_ms, const Vec& u_ref, const SpMat& M,
                    const SpMat& K1, double H, int m, double h) {
  if (u_ms.size() != u_ref.size())
    throw std::invalid_argument("compare: fields live on different meshes");
  ErrorReport rep;
  rep.H = H;
  rep.m = m;
  rep.h = h;
  rep.rel_l2 = relative_error(M, K1, u_ref, u_ms, NormKind::l2);
  rep.rel_h1 = relative_error(M, K1, u_ref, u_ms, NormKind::h1);
  rep.rel_h1_semi = relative_error(M, K1, u_ref, u_ms, NormKind::h1_semi);
  return rep;
}

std::string error_csv_header() { return "H,m,rel_l2,rel_h1,rel_h1_semi,h\n"; }

std::string error_csv_row(const ErrorReport& row) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%.10g,%d,%.9e,%.9e,%.9e,%.10g\n", row.H, row.m,
                row.rel_l2, row.rel_h1, row.rel_h1_semi, row.h);
  return buf;
}

GapReport localization_gap(const CorrectorSet& ideal, const CorrectorSet& localized,
                           const SpMat& K1) {
  if (ideal.Q.rows() != localized.Q.rows() || ideal.Q.cols() != localized.Q.cols())
    throw std::invalid_argument("localization_gap: corrector sets do not match");
  GapReport rep;
  const int nc = static_cast<int>(ideal.Q.cols());
  rep.per_node.resize(nc);
  double total_sq = 0.0;
  for (int z = 0; z < nc; ++z) {
    const Vec d = Vec(ideal.Q.col(z)) - Vec(localized.Q.col(z));
    const double gap_sq = std::max(0.0, d.dot(K1 * d));
    rep.per_node[z] = std::sqrt(gap_sq);
    rep.max_gap = std::max(rep.max_gap, rep.per_node[z]);
    total_sq += gap_sq;
  }
  rep.total = std::sqrt(total_sq);
  return rep;
}

std::uint64_t coefficient_hash(const PiecewiseConstantCoefficient& coeff) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const unsigned char* data, size_t len) {
    for (size_t i = 0; i < len; ++i) {
      h ^= data[i];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t n = coeff.mesh_n;
  mix(reinterpret_cast<const unsigned char*>(&n), sizeof n);
  mix(reinterpret_cast<const unsigned char*>(coeff.values.data()),
      coeff.values.size() * sizeof(double));
  return h;
}

namespace {

constexpr std::uint64_t kCacheMagic = 0x4d53505546524631ull;  // "MSPUFRF1"

}  // namespace

NeumannSolution solve_reference_cached(const SpMat& K, const SpMat& M, const Vec& b,
                                       int fine_n, std::uint64_t coeff_hash,
                                       const std::string& cache_dir,
                                       const NeumannOptions& opts) {
  namespace fs = std::filesystem;
  fs::path file;
  if (!cache_dir.empty()) {
    char name[80];
    std::snprintf(name, sizeof name, "ref_n%d_%016llx.bin", fine_n,
                  static_cast<unsigned long long>(coeff_hash));
    file = fs::path(cache_dir) / name;
    std::ifstream in(file, std::ios::binary);
    if (in) {
      std::uint64_t magic = 0, hash = 0;
      std::int64_t size = 0;
      std::int32_t n = 0;
      in.read(reinterpret_cast<char*>(&magic), sizeof magic);
      in.read(reinterpret_cast<char*>(&n), sizeof n);
      in.read(reinterpret_cast<char*>(&hash), sizeof hash);
      in.read(reinterpret_cast<char*>(&size), sizeof size);
      if (in && magic == kCacheMagic && n == fine_n && hash == coeff_hash &&
          size == b.size()) {
        NeumannSolution sol;
        sol.u.resize(size);
        in.read(reinterpret_cast<char*>(sol.u.data()), size * sizeof(double));
        in.read(reinterpret_cast<char*>(&sol.multiplier), sizeof sol.multiplier);
        in.read(reinterpret_cast<char*>(&sol.residual_norm), sizeof sol.residual_norm);
        in.read(reinterpret_cast<char*>(&sol.iterations), sizeof sol.iterations);
        if (in) return sol;
      }
    }
  }

  NeumannSolution sol = solve_neumann_meanzero(K, M, b, opts);

  if (!cache_dir.empty()) {
    std::error_code ec;
    fs::create_directories(fs::path(cache_dir), ec);
    const fs::path tmp = file.string() + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) {
      const std::uint64_t magic = kCacheMagic;
      const std::int32_t n = fine_n;
      const std::int64_t size = sol.u.size();
      out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
      out.write(reinterpret_cast<const char*>(&n), sizeof n);
      out.write(reinterpret_cast<const char*>(&coeff_hash), sizeof coeff_hash);
      out.write(reinterpret_cast<const char*>(&size), sizeof size);
      out.write(reinterpret_cast<const char*>(sol.u.data()), size * sizeof(double));
      out.write(reinterpret_cast<const char*>(&sol.multiplier), sizeof sol.multiplier);
      out.write(reinterpret_cast<const char*>(&sol.residual_norm),
                sizeof sol.residual_norm);
      out.write(reinterpret_cast<const char*>(&sol.iterations), sizeof sol.iterations);
      out.close();
      fs::rename(tmp, file, ec);
      if (ec) fs::remove(tmp, ec);
    }
  }
  return sol;
}

}  // namespace mspum
