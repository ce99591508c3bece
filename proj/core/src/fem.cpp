#include "mspum/fem.hpp"

#include <cmath>
#include <vector>

namespace mspum {

namespace {

// P1 gradients: grad(lambda_k) = perp(opposite edge) / (2 area)
struct ElementGradients {
  double bx[3], by[3];  // grad(lambda_k) = (bx[k], by[k])
  double area;
};

ElementGradients gradients(const StructuredTriMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2 p0 = mesh.vertices[tri[0]];
  const Vec2 p1 = mesh.vertices[tri[1]];
  const Vec2 p2 = mesh.vertices[tri[2]];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  ElementGradients g;
  g.area = det / 2.0;
  g.bx[0] = (p1.y - p2.y) / det;
  g.by[0] = (p2.x - p1.x) / det;
  g.bx[1] = (p2.y - p0.y) / det;
  g.by[1] = (p0.x - p2.x) / det;
  g.bx[2] = (p0.y - p1.y) / det;
  g.by[2] = (p1.x - p0.x) / det;
  return g;
}

}  // namespace

SpMat assemble_stiffness(const StructuredTriMesh& mesh,
                         const PiecewiseConstantCoefficient& coeff) {
  if (coeff.mesh_n != mesh.n ||
      static_cast<int>(coeff.values.size()) != mesh.triangle_count())
    throw std::invalid_argument("assemble_stiffness: coefficient/mesh mismatch");

  const int nv = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto g = gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    const double s = coeff.values[t] * g.area;
    // off-diagonals from the gradients, diagonals as negated row sums so that
    // K * constant = 0 holds exactly
    double k01 = s * (g.bx[0] * g.bx[1] + g.by[0] * g.by[1]);
    double k02 = s * (g.bx[0] * g.bx[2] + g.by[0] * g.by[2]);
    double k12 = s * (g.bx[1] * g.bx[2] + g.by[1] * g.by[2]);
    const double k00 = -(k01 + k02);
    const double k11 = -(k01 + k12);
    const double k22 = -(k02 + k12);
    trips.emplace_back(tri[0], tri[0], k00);
    trips.emplace_back(tri[1], tri[1], k11);
    trips.emplace_back(tri[2], tri[2], k22);
    trips.emplace_back(tri[0], tri[1], k01);
    trips.emplace_back(tri[1], tri[0], k01);
    trips.emplace_back(tri[0], tri[2], k02);
    trips.emplace_back(tri[2], tri[0], k02);
    trips.emplace_back(tri[1], tri[2], k12);
    trips.emplace_back(tri[2], tri[1], k12);
  }
  SpMat K(nv, nv);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

SpMat assemble_mass(const StructuredTriMesh& mesh) {
  const int nv = mesh.vertex_count();
  const double area = mesh.triangle_area();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
  }
  SpMat M(nv, nv);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Vec assemble_load(const StructuredTriMesh& mesh, const ScalarField& f) {
  Vec b = Vec::Zero(mesh.vertex_count());
  const double w = mesh.triangle_area() / 3.0;
  constexpr int edges[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (const auto& e : edges) {
      const Vec2 pa = mesh.vertices[tri[e[0]]];
      const Vec2 pb = mesh.vertices[tri[e[1]]];
      const double fm = f({(pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0});
      // each midpoint carries weight 1/2 for the two adjacent nodal functions
      b[tri[e[0]]] += w * fm * 0.5;
      b[tri[e[1]]] += w * fm * 0.5;
    }
  }
  return b;
}

NeumannSolution solve_neumann_meanzero(const SpMat& K, const SpMat& M,
                                       const Vec& b, const NeumannOptions& opts) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n || b.size() != n)
    throw std::invalid_argument("solve_neumann_meanzero: dimension mismatch");

  const double bsum = b.sum();
  const double bnorm = b.norm();
  if (bnorm > 0.0 && std::abs(bsum) > opts.compat_tol * bnorm)
    throw SolveError("solve_neumann_meanzero: incompatible load, |1^T b| = " +
                     std::to_string(std::abs(bsum)));

  NeumannSolution sol;
  sol.multiplier = bsum;  // lambda of the augmented system equals 1^T b
  sol.u = Vec::Zero(n);
  if (bnorm == 0.0) return sol;

  Vec diag_inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = K.coeff(i, i);
    diag_inv[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  const auto deflate = [n](Vec& v) { v.array() -= v.sum() / static_cast<double>(n); };

  const double target = opts.tol * bnorm;
  int it = 0;
  // restart on the true residual: the recurrence residual can stop slightly
  // early, and the solution contract is ||K u - b|| <= tol ||b||
  for (int sweep = 0; sweep < 4 && it < opts.max_iter; ++sweep) {
    Vec r = b - K * sol.u;
    deflate(r);
    if (r.norm() <= target) break;
    Vec z = diag_inv.asDiagonal() * r;
    deflate(z);
    Vec p = z;
    Vec Kp(n);
    double rz = r.dot(z);
    for (; it < opts.max_iter; ++it) {
      if (r.norm() <= 0.5 * target) break;
      Kp.noalias() = K * p;
      const double pKp = p.dot(Kp);
      if (!(pKp > 0.0))
        throw SolveError("solve_neumann_meanzero: CG breakdown, p^T K p = " +
                         std::to_string(pKp));
      const double alpha = rz / pKp;
      sol.u += alpha * p;
      r -= alpha * Kp;
      if ((it & 63) == 63) {  // counter accumulated drift out of range(K)
        r = b - K * sol.u;
        deflate(r);
      }
      z = diag_inv.asDiagonal() * r;
      deflate(z);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
  }
  sol.iterations = it;
  sol.residual_norm = (b - K * sol.u).norm() / bnorm;
  if (sol.residual_norm > opts.tol)
    throw SolveError("solve_neumann_meanzero: CG did not converge in " +
                     std::to_string(it) + " iterations, relative residual " +
                     std::to_string(sol.residual_norm));

  // shift to exact zero mean in the L2 sense
  const Vec m1 = M * Vec::Ones(n);
  sol.u.array() -= m1.dot(sol.u) / m1.sum();
  return sol;
}

Norms norms(const SpMat& M, const SpMat& K1, const Vec& v) {
  Norms out;
  const double l2sq = v.dot(M * v);
  const double h1sq = v.dot(K1 * v);
  out.l2 = std::sqrt(std::max(0.0, l2sq));
  out.h1_semi = std::sqrt(std::max(0.0, h1sq));
  out.h1 = std::sqrt(std::max(0.0, l2sq + h1sq));
  return out;
}

double relative_error(const SpMat& M, const SpMat& K1, const Vec& reference,
                      const Vec& v, NormKind kind) {
  const Norms nref = norms(M, K1, reference);
  const Norms nerr = norms(M, K1, v - reference);
  const auto pick = [kind](const Norms& n) {
    switch (kind) {
      case NormKind::l2: return n.l2;
      case NormKind::h1_semi: return n.h1_semi;
      default: return n.h1;
    }
  };
  const double denom = pick(nref);
  if (denom == 0.0)
    throw std::invalid_argument("relative_error: reference has zero norm");
  return pick(nerr) / denom;
}

double coarse_hat_value(int zx, int zy, int fx, int fy, int s) {
  const double xi = static_cast<double>(fx - zx * s) / s;
  const double eta = static_cast<double>(fy - zy * s) / s;
  const double m = std::max({std::abs(xi), std::abs(eta), std::abs(xi - eta)});
  return std::max(0.0, 1.0 - m);
}

SpMat prolongation(const MeshHierarchy& hier) {
  const int nc = hier.coarse.n;
  const int nf = hier.fine.n;
  const int s = nf / nc;
  const int n1c = nc + 1, n1f = nf + 1;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(3) * n1f * n1f);
  for (int zy = 0; zy < n1c; ++zy) {
    for (int zx = 0; zx < n1c; ++zx) {
      const int col = zy * n1c + zx;
      const int fy0 = std::max(0, zy * s - s), fy1 = std::min(nf, zy * s + s);
      const int fx0 = std::max(0, zx * s - s), fx1 = std::min(nf, zx * s + s);
      for (int fy = fy0; fy <= fy1; ++fy) {
        for (int fx = fx0; fx <= fx1; ++fx) {
          const double v = coarse_hat_value(zx, zy, fx, fy, s);
          if (v > 0.0) trips.emplace_back(fy * n1f + fx, col, v);
        }
      }
    }
  }
  SpMat P(n1f * n1f, n1c * n1c);
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

}  // namespace mspum
