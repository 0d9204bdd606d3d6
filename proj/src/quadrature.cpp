#include "tofsi/quadrature.hpp"

#include <cmath>

namespace tofsi {

namespace {

// 1D quadratic Lagrange basis on nodes {-1, 0, +1}.
inline double l1d(int i, double s) {
  switch (i) {
    case 0: return 0.5 * s * (s - 1.0);
    case 1: return 1.0 - s * s;
    default: return 0.5 * s * (s + 1.0);
  }
}
inline double dl1d(int i, double s) {
  switch (i) {
    case 0: return s - 0.5;
    case 1: return -2.0 * s;
    default: return s + 0.5;
  }
}
inline double d2l1d(int i) {
  switch (i) {
    case 0: return 1.0;
    case 1: return -2.0;
    default: return 1.0;
  }
}

// Q2 local node -> (1D index along xi, 1D index along eta).
constexpr int q2_ix[9] = {0, 2, 2, 0, 1, 2, 1, 0, 1};
constexpr int q2_iy[9] = {0, 0, 2, 2, 0, 1, 2, 1, 1};
// Q1 corner signs.
constexpr double q1_sx[4] = {-1.0, 1.0, 1.0, -1.0};
constexpr double q1_sy[4] = {-1.0, -1.0, 1.0, 1.0};

QuadratureTables make_tables() {
  QuadratureTables t{};
  const double g = std::sqrt(0.6);
  const double gp[3] = {-g, 0.0, g};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      const int q = i + 3 * j;
      const double xi = gp[i], eta = gp[j];
      t.point[q] = {xi, eta};
      t.weight[q] = gw[i] * gw[j];
      for (int a = 0; a < 9; ++a) {
        const int ax = q2_ix[a], ay = q2_iy[a];
        t.q2_n[q][a] = l1d(ax, xi) * l1d(ay, eta);
        t.q2_dn[q][a][0] = dl1d(ax, xi) * l1d(ay, eta);
        t.q2_dn[q][a][1] = l1d(ax, xi) * dl1d(ay, eta);
        t.q2_d2n[q][a][0] = d2l1d(ax) * l1d(ay, eta);
        t.q2_d2n[q][a][1] = l1d(ax, xi) * d2l1d(ay);
        t.q2_d2n[q][a][2] = dl1d(ax, xi) * dl1d(ay, eta);
      }
      for (int a = 0; a < 4; ++a) {
        t.q1_n[q][a] = 0.25 * (1.0 + q1_sx[a] * xi) * (1.0 + q1_sy[a] * eta);
        t.q1_dn[q][a][0] = 0.25 * q1_sx[a] * (1.0 + q1_sy[a] * eta);
        t.q1_dn[q][a][1] = 0.25 * q1_sy[a] * (1.0 + q1_sx[a] * xi);
      }
    }
  }
  return t;
}

}  // namespace

const QuadratureTables& quad_tables() {
  static const QuadratureTables tables = make_tables();
  return tables;
}

std::array<double, 9> q2_shape_values(double xi, double eta) {
  std::array<double, 9> n{};
  for (int a = 0; a < 9; ++a)
    n[a] = l1d(q2_ix[a], xi) * l1d(q2_iy[a], eta);
  return n;
}

std::array<double, 4> q1_shape_values(double xi, double eta) {
  std::array<double, 4> n{};
  for (int a = 0; a < 4; ++a)
    n[a] = 0.25 * (1.0 + q1_sx[a] * xi) * (1.0 + q1_sy[a] * eta);
  return n;
}

}  // namespace tofsi
