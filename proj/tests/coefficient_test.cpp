#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include <mspum/coefficient.hpp>

using namespace mspum;

namespace {

// independent re-evaluation of the oscillatory sum, different loop structure
double c_eps_reference(Vec2 x, double eps) {
  double total = 1.0;
  for (int i = 0; i <= 4; ++i) {
    for (int j = i; j <= 4; ++j) {
      const double arg = std::floor(i * x.y - x.x / (1.0 + i)) +
                         std::floor(i * x.x / eps) + std::floor(x.y / eps);
      total += 0.1 * (2.0 / (j + 1)) * std::cos(arg);
    }
  }
  return total;
}

}  // namespace

TEST_SUITE("coefficient") {

TEST_CASE("oscillatory distribution at the origin and bounds") {
  CHECK(eval_c_eps({0.0, 0.0}, 0.05) == doctest::Approx(2.0).epsilon(1e-15));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x{dist(rng), dist(rng)};
    const double v = eval_c_eps(x, 0.05);
    CHECK(v >= 0.0);
    CHECK(v <= 2.0 + 1e-12);
    CHECK(v == doctest::Approx(c_eps_reference(x, 0.05)).epsilon(1e-13));
  }
}

TEST_CASE("piecewise power rescaling") {
  CHECK(eval_h(0.75) == doctest::Approx(0.31640625).epsilon(1e-15));
  CHECK(eval_h(2.0) == 2.0);
  CHECK(eval_h(1.25) == doctest::Approx(std::pow(1.25, 1.5)).epsilon(1e-15));
  CHECK(eval_h(0.3) == 0.3);   // identity branch below 1/2
  CHECK(eval_h(1.0) == 1.0);   // continuous at the breakpoints
  CHECK(eval_h(0.5) == 0.5);
  CHECK(eval_h(1.5) == 1.5);
}

TEST_CASE("arc band membership") {
  const auto params = ArcCoefficientParams::with_eps(0.05);
  // point at exact distance r from the center, both side conditions strict
  const Vec2 on_arc{0.95 - 0.9 / std::sqrt(2.0), 0.05 + 0.9 / std::sqrt(2.0)};
  CHECK(eval_a_eps(on_arc, params) == 1e-3);

  // origin: band misses and the side condition x2 > eps fails
  CHECK(eval_a_eps({0.0, 0.0}, params) == doctest::Approx(2.0).epsilon(1e-14));

  // x1 < 1 - eps fails at equality: falls through to the background field
  const Vec2 corner{0.95, 0.95};
  const double v = eval_a_eps(corner, params);
  CHECK(v != 1e-3);
  CHECK(v == doctest::Approx(eval_h(eval_c_eps(corner, 0.05))).epsilon(1e-15));
}

TEST_CASE("discretize constants and checkerboards") {
  const auto mesh = build_uniform_mesh(8);
  const auto c = constant_coefficient(mesh, 3.5);
  CHECK(c.alpha == 3.5);
  CHECK(c.beta == 3.5);
  for (double v : c.values) CHECK(v == 3.5);

  const auto cb = discretize(checkerboard_field(4, 1.0, 100.0), mesh);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 cen = mesh.centroid(t);
    const int cx = static_cast<int>(cen.x * 4);
    const int cy = static_cast<int>(cen.y * 4);
    CHECK(cb.values[t] == (((cx + cy) % 2 == 0) ? 100.0 : 1.0));
  }

  CHECK_THROWS_AS(discretize([](Vec2 x) { return x.x - 0.5; }, mesh),
                  std::invalid_argument);
}

TEST_CASE("experiment coefficient statistics on the reference grid") {
  const auto mesh = build_uniform_mesh(256);
  const auto params = ArcCoefficientParams::with_eps(0.05);
  const auto coeff =
      discretize([&params](Vec2 x) { return eval_a_eps(x, params); }, mesh);

  CHECK(coeff.alpha == 1e-3);
  CHECK(coeff.beta == doctest::Approx(1.9739085641121306).epsilon(1e-12));
  CHECK(coeff.contrast() > 1e3);
  CHECK(coeff.contrast() < 5e3);

  int arc_elements = 0;
  double nonarc_min = 2.0;
  for (double v : coeff.values) {
    if (v == 1e-3) ++arc_elements;
    else nonarc_min = std::min(nonarc_min, v);
  }
  CHECK(arc_elements == 9250);
  // background values stay within the documented [0.01, 2] range
  CHECK(nonarc_min == doctest::Approx(0.034378103262716619).epsilon(1e-9));
  CHECK(nonarc_min > 0.01);
}

TEST_CASE("evaluation is pure and deterministic") {
  const auto mesh = build_uniform_mesh(32);
  const auto params = ArcCoefficientParams::with_eps(0.05);
  const auto a = discretize([&params](Vec2 x) { return eval_a_eps(x, params); }, mesh);
  const auto b = discretize([&params](Vec2 x) { return eval_a_eps(x, params); }, mesh);
  CHECK(a.values == b.values);
}

}  // TEST_SUITE
