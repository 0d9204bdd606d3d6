#pragma once

#include <array>
#include <span>

#include "tofsi/errors.hpp"
#include "tofsi/scalar.hpp"

namespace tofsi {

// Biquadratic (Q2, 9-node) and bilinear (Q1, 4-node) Lagrangian shape
// machinery on the reference square [-1,1]^2, tabulated at the 3x3 Gauss
// points used for every integral in the project.
//
// Q2 local node ordering (fixed): corners 0..3 CCW from (-1,-1), then edge
// midsides 4..7 (bottom, right, top, left), then center 8. Q1 uses the four
// corners in the same order.
struct QuadratureTables {
  static constexpr int nq = 9;

  std::array<std::array<double, 2>, nq> point;  // (xi, eta)
  std::array<double, nq> weight;

  std::array<std::array<double, 9>, nq> q2_n;
  std::array<std::array<std::array<double, 2>, 9>, nq> q2_dn;   // d/dxi, d/deta
  std::array<std::array<std::array<double, 3>, 9>, nq> q2_d2n;  // xixi, etaeta, xieta
  std::array<std::array<double, 4>, nq> q1_n;
  std::array<std::array<std::array<double, 2>, 4>, nq> q1_dn;
};

const QuadratureTables& quad_tables();

// Evaluate Q2 / Q1 shape values at an arbitrary reference point (used by the
// VTK pressure interpolation and a few tests).
std::array<double, 9> q2_shape_values(double xi, double eta);
std::array<double, 4> q1_shape_values(double xi, double eta);

// Shape data mapped through the isoparametric Q2 geometry given by the nine
// nodal coordinates of one element. Coordinates may be complex (perturbed
// configurations in complex-step runs).
template <class S>
struct MappedPoint {
  S jxw;                                  // quadrature weight * det(J)
  S det_j;
  std::array<std::array<S, 2>, 9> dq2;    // physical gradients of Q2 shapes
  std::array<std::array<S, 2>, 4> dq1;    // physical gradients of Q1 shapes
  std::array<std::array<S, 3>, 9> d2q2;   // physical second derivatives (xx, yy, xy)
};

// Maps all nq quadrature points. Second derivatives are only computed when
// `need_second` is set (they cost a 3x3 solve per point). Throws
// GeometryError when det(J) <= 0 at any point; `element_id` labels the error.
template <class S>
void map_element(std::span<const S> x, std::span<const S> y, bool need_second,
                 std::array<MappedPoint<S>, QuadratureTables::nq>& out,
                 int element_id = -1) {
  const QuadratureTables& t = quad_tables();
  for (int q = 0; q < QuadratureTables::nq; ++q) {
    MappedPoint<S>& m = out[q];
    S j00 = S(0), j01 = S(0), j10 = S(0), j11 = S(0);
    for (int a = 0; a < 9; ++a) {
      const double dxi = t.q2_dn[q][a][0], deta = t.q2_dn[q][a][1];
      j00 += x[a] * dxi;   // dx/dxi
      j01 += x[a] * deta;  // dx/deta
      j10 += y[a] * dxi;   // dy/dxi
      j11 += y[a] * deta;  // dy/deta
    }
    const S det = j00 * j11 - j01 * j10;
    if (real_part(det) <= 0.0)
      throw GeometryError("non-positive jacobian determinant in element " +
                              std::to_string(element_id),
                          {element_id});
    m.det_j = det;
    m.jxw = det * t.weight[q];
    const S inv = S(1) / det;
    // inverse jacobian: d(xi)/dx = [j11, -j01; -j10, j00] / det
    const S ixx = j11 * inv, ixy = -j01 * inv, iyx = -j10 * inv, iyy = j00 * inv;
    for (int a = 0; a < 9; ++a) {
      const double dxi = t.q2_dn[q][a][0], deta = t.q2_dn[q][a][1];
      m.dq2[a][0] = dxi * ixx + deta * iyx;  // d/dx
      m.dq2[a][1] = dxi * ixy + deta * iyy;  // d/dy
    }
    for (int a = 0; a < 4; ++a) {
      const double dxi = t.q1_dn[q][a][0], deta = t.q1_dn[q][a][1];
      m.dq1[a][0] = dxi * ixx + deta * iyx;
      m.dq1[a][1] = dxi * ixy + deta * iyy;
    }
    if (!need_second) continue;

    // Second derivatives of the geometry mapping.
    S xxx = S(0), xee = S(0), xxe = S(0), yxx = S(0), yee = S(0), yxe = S(0);
    for (int a = 0; a < 9; ++a) {
      const double d2xi = t.q2_d2n[q][a][0], d2eta = t.q2_d2n[q][a][1],
                   d2m = t.q2_d2n[q][a][2];
      xxx += x[a] * d2xi;
      xee += x[a] * d2eta;
      xxe += x[a] * d2m;
      yxx += y[a] * d2xi;
      yee += y[a] * d2eta;
      yxe += y[a] * d2m;
    }
    // [N_xixi; N_etaeta; N_xieta] = M * [N_xx; N_yy; N_xy] + T * [N_x; N_y]
    const S m00 = j00 * j00, m01 = j10 * j10, m02 = S(2) * j00 * j10;
    const S m10 = j01 * j01, m11 = j11 * j11, m12 = S(2) * j01 * j11;
    const S m20 = j00 * j01, m21 = j10 * j11, m22 = j00 * j11 + j01 * j10;
    const S detm = m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
                   m02 * (m10 * m21 - m11 * m20);
    const S dinv = S(1) / detm;
    const S i00 = (m11 * m22 - m12 * m21) * dinv;
    const S i01 = (m02 * m21 - m01 * m22) * dinv;
    const S i02 = (m01 * m12 - m02 * m11) * dinv;
    const S i10 = (m12 * m20 - m10 * m22) * dinv;
    const S i11 = (m00 * m22 - m02 * m20) * dinv;
    const S i12 = (m02 * m10 - m00 * m12) * dinv;
    const S i20 = (m10 * m21 - m11 * m20) * dinv;
    const S i21 = (m01 * m20 - m00 * m21) * dinv;
    const S i22 = (m00 * m11 - m01 * m10) * dinv;
    for (int a = 0; a < 9; ++a) {
      const S b0 = S(t.q2_d2n[q][a][0]) - (xxx * m.dq2[a][0] + yxx * m.dq2[a][1]);
      const S b1 = S(t.q2_d2n[q][a][1]) - (xee * m.dq2[a][0] + yee * m.dq2[a][1]);
      const S b2 = S(t.q2_d2n[q][a][2]) - (xxe * m.dq2[a][0] + yxe * m.dq2[a][1]);
      m.d2q2[a][0] = i00 * b0 + i01 * b1 + i02 * b2;
      m.d2q2[a][1] = i10 * b0 + i11 * b1 + i12 * b2;
      m.d2q2[a][2] = i20 * b0 + i21 * b1 + i22 * b2;
    }
  }
}

}  // namespace tofsi
