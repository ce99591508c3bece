#include "mspum/coefficient.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mspum {

double eval_c_eps(Vec2 x, double eps) {
  double sum = 0.0;
  for (int j = 0; j <= 4; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double arg = std::floor(i * x.y - x.x / (1.0 + i)) +
                         std::floor(i * x.x / eps) +
                         std::floor(x.y / eps);
      sum += (2.0 / (j + 1)) * std::cos(arg);
    }
  }
  return 1.0 + sum / 10.0;
}

double eval_h(double t) {
  if (t > 0.5 && t < 1.0) return t * t * t * t;
  if (t > 1.0 && t < 1.5) return t * std::sqrt(t);
  return t;
}

double eval_a_eps(Vec2 x, const ArcCoefficientParams& p) {
  const double dx = x.x - p.center.x;
  const double dy = x.y - p.center.y;
  const double dist = std::sqrt(dx * dx + dy * dy);
  if (std::abs(dist - p.radius) < p.eps / 2.0 && x.y > p.eps && x.x < 1.0 - p.eps)
    return p.arc_value;
  return eval_h(eval_c_eps(x, p.eps));
}

PiecewiseConstantCoefficient discretize(const ScalarField& field,
                                        const StructuredTriMesh& mesh) {
  PiecewiseConstantCoefficient coeff;
  coeff.mesh_n = mesh.n;
  coeff.values.resize(mesh.triangle_count());
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double v = field(mesh.centroid(t));
    if (!(v > 0.0))
      throw std::invalid_argument("discretize: non-positive sample " +
                                  std::to_string(v) + " at element " +
                                  std::to_string(t));
    coeff.values[t] = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  coeff.alpha = lo;
  coeff.beta = hi;
  return coeff;
}

PiecewiseConstantCoefficient constant_coefficient(const StructuredTriMesh& mesh,
                                                  double value) {
  return discretize([value](Vec2) { return value; }, mesh);
}

ScalarField checkerboard_field(int cells, double lo, double hi) {
  return [cells, lo, hi](Vec2 x) {
    const int cx = std::min(static_cast<int>(x.x * cells), cells - 1);
    const int cy = std::min(static_cast<int>(x.y * cells), cells - 1);
    return ((cx + cy) % 2 == 0) ? hi : lo;
  };
}

}  // namespace mspum
