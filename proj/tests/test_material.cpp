#include <doctest.h>

#include <cmath>
#include <random>

#include "test_helpers.hpp"
#include "tofsi/material.hpp"

using namespace tofsi;

TEST_SUITE_BEGIN("material");

TEST_CASE("interpolation endpoints and derived values") {
  InterpolationParams ip;  // benchmark defaults
  CHECK(brinkman_alpha(1.0, ip).first == doctest::Approx(ip.alpha_max));
  CHECK(brinkman_alpha(0.0, ip).first == doctest::Approx(ip.alpha_min));
  CHECK(simp_modulus(1.0, ip).first == doctest::Approx(1e4));
  CHECK(simp_modulus(0.0, ip).first == doctest::Approx(1e-6));
  CHECK(force_filter(1.0, ip).first == doctest::Approx(1.0));
  CHECK(force_filter(0.0, ip).first == doctest::Approx(0.0));

  InterpolationParams unit;
  unit.alpha_max = 1.0;
  unit.alpha_min = 0.0;
  unit.p_alpha = 1.0;
  CHECK(brinkman_alpha(0.5, unit).first ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  InterpolationParams simp;
  simp.p_e = 1.5;
  CHECK(simp_modulus(0.5, simp).first ==
        doctest::Approx(3535.5339).epsilon(1e-7));

  InterpolationParams ups;
  ups.p_upsilon = 2.0;
  CHECK(force_filter(0.5, ups).first == doctest::Approx(0.25));
}

TEST_CASE("projection endpoints, symmetry, sharp value") {
  auto [p0, d0] = project(0.0, 4.0, 0.5);
  auto [p1, d1] = project(1.0, 4.0, 0.5);
  CHECK(p0 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(project(0.5, 17.0, 0.5).first == doctest::Approx(0.5));
  CHECK(project(0.45, 64.0, 0.5).first ==
        doctest::Approx(0.00166).epsilon(2e-3));
}

TEST_CASE("interpolation derivatives match central differences") {
  InterpolationParams ip;
  ip.p_e = 2.3;
  ip.p_upsilon = 1.7;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const double r = dist(rng);
    auto fd = [&](auto f) {
      return (f(r + h).first - f(r - h).first) / (2 * h);
    };
    CHECK(brinkman_alpha(r, ip).second ==
          doctest::Approx(fd([&](double x) { return brinkman_alpha(x, ip); }))
              .epsilon(1e-6));
    CHECK(simp_modulus(r, ip).second ==
          doctest::Approx(fd([&](double x) { return simp_modulus(x, ip); }))
              .epsilon(1e-6));
    CHECK(force_filter(r, ip).second ==
          doctest::Approx(fd([&](double x) { return force_filter(x, ip); }))
              .epsilon(1e-6));
    CHECK(project(r, 8.0, 0.5).second ==
          doctest::Approx(fd([&](double x) { return project(x, 8.0, 0.5); }))
              .epsilon(1e-6));
  }
}

TEST_CASE("monotonicity of the interpolants") {
  InterpolationParams ip;
  double prev = -1.0;
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    const double a = brinkman_alpha(r, ip).first;
    CHECK(a >= prev);
    prev = a;
  }
  prev = -1.0;
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    const double p = project(r, 16.0, 0.5).first;
    CHECK(p > prev);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("density filter: stencil weight, normalization, linearity, adjoint") {
  // column edges aligned to the pitch, so every element edge is exactly 0.02
  GeometryConfig geom = testing::benchmark_geometry();
  geom.column = {0.98, 0, 0.04, 0.5};
  const StructuredGrid g = build_grid(geom);
  for (std::size_t i = 1; i < g.x_lines.size(); ++i)
    REQUIRE(g.x_lines[i] - g.x_lines[i - 1] == doctest::Approx(0.02));
  const DensityFilter filter(g, 1.5);
  const int n = filter.n();
  REQUIRE(n == static_cast<int>(g.design_elements.size()));

  // uniform field unchanged
  std::vector<double> ones(n, 1.0);
  const auto filtered = filter.apply<double>(ones);
  for (double v : filtered) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

  // interior element on the uniform part of the grid: hat-weight stencil
  int pick = -1;
  for (int k = 0; k < n; ++k) {
    const int e = g.design_elements[k];
    if (std::abs(g.centroid_x[e] - 0.51) < 1e-9 &&
        std::abs(g.centroid_y[e] - 0.41) < 1e-9)
      pick = k;
  }
  REQUIRE(pick >= 0);
  const double expected = 1.5 / (1.5 + 4 * 0.5 + 4 * (1.5 - std::sqrt(2.0)));
  CHECK(filter.weight(pick, pick) == doctest::Approx(expected).epsilon(1e-6));

  // linearity and the transpose identity <Wx, y> = <x, W^T y>
  const auto x1 = testing::random_design(n, 1);
  const auto x2 = testing::random_design(n, 2);
  const auto y = testing::random_design(n, 3);
  std::vector<double> combo(n);
  for (int i = 0; i < n; ++i) combo[i] = 0.7 * x1[i] - 0.3 * x2[i];
  const auto f1 = filter.apply<double>(x1);
  const auto f2 = filter.apply<double>(x2);
  const auto fc = filter.apply<double>(combo);
  for (int i = 0; i < n; ++i)
    CHECK(fc[i] == doctest::Approx(0.7 * f1[i] - 0.3 * f2[i]).epsilon(1e-12));

  const auto wty = filter.apply_transpose<double>(y);
  double lhs = 0, rhs = 0;
  for (int i = 0; i < n; ++i) {
    lhs += f1[i] * y[i];
    rhs += x1[i] * wty[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("robust triplet ordering and composition") {
  const StructuredGrid g = build_grid(testing::miniature_geometry());
  const DensityFilter filter(g, 1.5);
  ProjectionParams pp;
  pp.beta = 4.0;
  const auto rho = testing::random_design(filter.n(), 11, 0.0, 1.0);
  const RobustTriplet<double> trip = robust_triplet<double>(rho, filter, pp);
  for (int i = 0; i < filter.n(); ++i) {
    CHECK(trip.dilated.rho_bar[i] >= trip.nominal.rho_bar[i] - 1e-14);
    CHECK(trip.nominal.rho_bar[i] >= trip.eroded.rho_bar[i] - 1e-14);
    // composition oracle
    const auto tilde = filter.apply<double>(rho);
    CHECK(trip.nominal.rho_bar[i] ==
          doctest::Approx(project(tilde[i], pp.beta, pp.eta_n).first)
              .epsilon(1e-13));
  }

  const std::vector<double> zeros(filter.n(), 0.0);
  const RobustTriplet<double> z = robust_triplet<double>(zeros, filter, pp);
  for (int i = 0; i < filter.n(); ++i) {
    CHECK(z.dilated.rho_bar[i] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(z.eroded.rho_bar[i] == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("discreteness measure") {
  std::vector<double> gray(10, 0.5);
  CHECK(discreteness_measure(gray) == doctest::Approx(100.0));
  std::vector<double> binary = {0, 1, 1, 0, 1};
  CHECK(discreteness_measure(binary) == doctest::Approx(0.0));
  std::vector<double> one = {0.25};
  CHECK(discreteness_measure(one) == doctest::Approx(75.0));
}

TEST_CASE("parameter validation") {
  InterpolationParams ip;
  ip.e_min = 0.0;
  CHECK_THROWS_AS(ip.validate(), ConfigError);
  ProjectionParams pp;
  pp.eta_d = 0.6;
  CHECK_THROWS_AS(pp.validate(), ConfigError);
}

TEST_SUITE_END();
