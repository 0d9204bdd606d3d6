#pragma once

#include <random>

#include "tofsi/coupler.hpp"
#include "tofsi/material.hpp"

namespace tofsi::testing {

// Small channel with a design box and an embedded column, a few hundred
// unknowns; the workhorse for coupled tests.
inline GeometryConfig miniature_geometry() {
  GeometryConfig g;
  g.channel = {0, 0, 0.8, 0.4};
  g.design_box = {0.2, 0, 0.4, 0.3};
  g.column = {0.3, 0, 0.1, 0.2};
  g.resolution = 0.1;
  return g;
}

inline GeometryConfig benchmark_geometry(double resolution = 0.02) {
  GeometryConfig g;
  g.resolution = resolution;
  return g;
}

inline std::vector<double> random_design(std::size_t n, unsigned seed,
                                         double lo = 0.2, double hi = 0.8) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// Nominal-realization density field for a uniform raw design.
inline std::vector<double> uniform_nominal_field(const Model& m,
                                                 const DensityFilter& filter,
                                                 const ProjectionParams& pp,
                                                 double value) {
  std::vector<double> rho(m.grid.design_elements.size(), value);
  const RobustTriplet<double> trip = robust_triplet<double>(rho, filter, pp);
  return element_density_field<double>(m.grid, trip.nominal.rho_bar);
}

}  // namespace tofsi::testing
