#pragma once

#include <array>
#include <string>
#include <vector>

#include "tofsi/errors.hpp"
#include "tofsi/quadrature.hpp"
#include "tofsi/scalar.hpp"

namespace tofsi {

enum class DomainTag : unsigned char { design, solid_nondesign, fluid_nondesign };

struct Rect {
  double x0 = 0.0, y0 = 0.0, w = 0.0, h = 0.0;
  double x1() const { return x0 + w; }
  double y1() const { return y0 + h; }
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1() && y >= y0 && y <= y1();
  }
};

// The column-in-a-channel benchmark geometry: a rectangular channel holding a
// design box with an embedded non-design elastic column. All edges must land
// on grid lines; `resolution` is the target uniform spacing, with extra lines
// inserted for off-pitch feature edges.
struct GeometryConfig {
  Rect channel{0.0, 0.0, 2.0, 1.0};
  Rect design_box{0.3, 0.0, 1.4, 0.8};
  Rect column{0.975, 0.0, 0.05, 0.5};
  double resolution = 0.02;

  void validate() const;
};

struct Element {
  std::array<int, 9> q2;  // global Q2 node ids (corners, midsides, center)
  std::array<int, 4> q1;  // global Q1 (corner lattice) node ids
  DomainTag tag = DomainTag::fluid_nondesign;
};

// Per-node coordinate arrays; complex in perturbed-configuration runs.
template <class S>
struct Coords {
  std::vector<S> x, y;
};

template <class To, class From>
Coords<To> coords_cast(const Coords<From>& c) {
  return Coords<To>{scalar_cast<To>(c.x), scalar_cast<To>(c.y)};
}

struct StructuredGrid {
  std::vector<double> x_lines, y_lines;
  std::vector<Element> elements;

  int nx() const { return static_cast<int>(x_lines.size()) - 1; }
  int ny() const { return static_cast<int>(y_lines.size()) - 1; }
  int n_q2_nodes() const { return (2 * nx() + 1) * (2 * ny() + 1); }
  int n_q1_nodes() const { return (nx() + 1) * (ny() + 1); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int element_at(int i, int j) const { return i + nx() * j; }

  // Reference coordinates per Q2 / Q1 node.
  std::vector<double> q2_x, q2_y;
  std::vector<double> q1_x, q1_y;

  // Boundary node sets (Q2 node ids).
  std::vector<int> inlet, outlet, walls, mesh_fixed, wet_interface;
  std::vector<int> struct_fixed;  // grounded bottom of the solid region

  // Solid computational domain (design + solid non-design) node machinery.
  std::vector<int> solid_nodes;        // Q2 ids, ascending
  std::vector<int> node_to_solid;      // Q2 id -> dense solid index or -1
  std::vector<char> is_outer_boundary; // per Q2 node
  std::vector<char> is_solid_node;     // per Q2 node
  std::vector<char> is_wet_node;       // per Q2 node

  std::vector<int> design_elements;    // element ids with tag == design
  std::vector<double> centroid_x, centroid_y, element_area;  // per element

  bool is_solid_element(int e) const {
    return elements[e].tag != DomainTag::fluid_nondesign;
  }

  Coords<double> reference_coords() const;

  // Total area integrated with the 3x3 rule (conservation check).
  double quadrature_area() const;
};

StructuredGrid build_grid(const GeometryConfig& geom);

// Positions each node at reference + u (solid computational domain, including
// the wet interface) or reference + d (remaining fluid-mesh nodes), then
// verifies element admissibility. u is indexed densely over solid nodes (see
// node_to_solid); d is indexed by Q2 node, 2 entries per node.
// Throws GeometryError listing every element with a non-positive jacobian.
template <class S>
Coords<S> deformed_coordinates(const StructuredGrid& g, std::span<const S> u,
                               std::span<const S> d) {
  const int n = g.n_q2_nodes();
  Coords<S> c;
  c.x.resize(n);
  c.y.resize(n);
  for (int i = 0; i < n; ++i) {
    if (g.is_solid_node[i]) {
      const int s = g.node_to_solid[i];
      c.x[i] = S(g.q2_x[i]) + u[2 * s];
      c.y[i] = S(g.q2_y[i]) + u[2 * s + 1];
    } else {
      c.x[i] = S(g.q2_x[i]) + d[2 * i];
      c.y[i] = S(g.q2_y[i]) + d[2 * i + 1];
    }
  }
  std::vector<int> bad;
  std::array<MappedPoint<S>, QuadratureTables::nq> mp;
  std::array<S, 9> ex, ey;
  for (int e = 0; e < g.n_elements(); ++e) {
    for (int a = 0; a < 9; ++a) {
      ex[a] = c.x[g.elements[e].q2[a]];
      ey[a] = c.y[g.elements[e].q2[a]];
    }
    try {
      map_element<S>(ex, ey, false, mp, e);
    } catch (const GeometryError&) {
      bad.push_back(e);
    }
  }
  if (!bad.empty())
    throw GeometryError("deformed configuration inverts " +
                            std::to_string(bad.size()) + " element(s)",
                        bad);
  return c;
}

// Gathers one element's nodal coordinates.
template <class S>
void gather_element_coords(const StructuredGrid& g, const Coords<S>& c, int e,
                           std::array<S, 9>& x, std::array<S, 9>& y) {
  for (int a = 0; a < 9; ++a) {
    x[a] = c.x[g.elements[e].q2[a]];
    y[a] = c.y[g.elements[e].q2[a]];
  }
}

}  // namespace tofsi
