#pragma once

#include <functional>
#include <vector>

#include "mspum/geometry.hpp"

namespace mspum {

/// Parameters of the isolating arc band carved into the diffusion field.
struct ArcCoefficientParams {
  double eps = 0.05;
  double radius = 0.9;
  Vec2 center{1.0 - 0.05, 0.05};
  double arc_value = 1e-3;

  static ArcCoefficientParams with_eps(double eps, double radius = 0.9,
                                       double arc_value = 1e-3) {
    return {eps, radius, {1.0 - eps, eps}, arc_value};
  }
};

/// Highly oscillatory background distribution: a double cosine sum with
/// integer floor arguments. Takes values in [0, 2].
double eval_c_eps(Vec2 x, double eps);

/// Piecewise power rescaling: t^4 on (1/2,1), t^(3/2) on (1,3/2), t elsewhere.
double eval_h(double t);

/// The full diffusion coefficient: arc_value inside the arc band (all three
/// conditions strict), h(c_eps(x)) everywhere else.
double eval_a_eps(Vec2 x, const ArcCoefficientParams& params);

/// One positive value per mesh element; alpha/beta are the spectral bounds.
struct PiecewiseConstantCoefficient {
  std::vector<double> values;
  double alpha = 0.0;
  double beta = 0.0;
  int mesh_n = 0;

  double contrast() const { return beta / alpha; }
};

using ScalarField = std::function<double(Vec2)>;

/// One-point (centroid) sampling per element. Throws if any sample is <= 0.
PiecewiseConstantCoefficient discretize(const ScalarField& field,
                                        const StructuredTriMesh& mesh);

PiecewiseConstantCoefficient constant_coefficient(const StructuredTriMesh& mesh,
                                                  double value);

/// cells x cells checkerboard taking hi on even-parity cells and lo otherwise.
ScalarField checkerboard_field(int cells, double lo, double hi);

}  // namespace mspum
