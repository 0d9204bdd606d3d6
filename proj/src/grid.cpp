#include "tofsi/grid.hpp"

#include <algorithm>
#include <cmath>

namespace tofsi {

namespace {

constexpr double kSnapTol = 1e-9;

bool rect_inside(const Rect& inner, const Rect& outer) {
  return inner.x0 >= outer.x0 - kSnapTol && inner.x1() <= outer.x1() + kSnapTol &&
         inner.y0 >= outer.y0 - kSnapTol && inner.y1() <= outer.y1() + kSnapTol;
}

// Uniform lines over [a, a+w] at the target pitch, with feature edges
// inserted; uniform lines crowding an inserted edge are dropped so cell
// aspect ratios stay reasonable.
std::vector<double> build_lines(double a, double w, double resolution,
                                const std::vector<double>& edges) {
  const int n = std::max<int>(1, static_cast<int>(std::lround(w / resolution)));
  const double pitch = w / n;
  std::vector<double> lines(n + 1);
  for (int k = 0; k <= n; ++k) lines[k] = a + pitch * k;
  lines.back() = a + w;

  for (double m : edges) {
    if (m < a - kSnapTol || m > a + w + kSnapTol)
      throw ConfigError("geometry edge outside the channel");
    bool present = false;
    for (double l : lines)
      if (std::abs(l - m) < kSnapTol) present = true;
    if (present) continue;
    std::erase_if(lines, [&](double l) {
      return std::abs(l - m) < 0.4 * pitch && std::abs(l - a) > kSnapTol &&
             std::abs(l - (a + w)) > kSnapTol;
    });
    lines.push_back(m);
  }
  std::sort(lines.begin(), lines.end());
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (lines[i] - lines[i - 1] < kSnapTol)
      throw ConfigError("coincident grid lines (degenerate geometry feature)");
  return lines;
}

}  // namespace

void GeometryConfig::validate() const {
  if (channel.w <= 0 || channel.h <= 0)
    throw ConfigError("channel must have positive size");
  if (design_box.w <= 0 || design_box.h <= 0)
    throw ConfigError("design box must have positive size (zero-width feature)");
  if (column.w <= 0 || column.h <= 0)
    throw ConfigError("column must have positive size (zero-width feature)");
  if (!rect_inside(design_box, channel))
    throw ConfigError("design box must lie inside the channel");
  if (!rect_inside(column, design_box))
    throw ConfigError("column must lie inside the design box");
  if (resolution <= 0) throw ConfigError("resolution must be positive");
}

StructuredGrid build_grid(const GeometryConfig& geom) {
  geom.validate();
  StructuredGrid g;
  g.x_lines = build_lines(geom.channel.x0, geom.channel.w, geom.resolution,
                          {geom.design_box.x0, geom.design_box.x1(),
                           geom.column.x0, geom.column.x1()});
  g.y_lines = build_lines(geom.channel.y0, geom.channel.h, geom.resolution,
                          {geom.design_box.y0, geom.design_box.y1(),
                           geom.column.y0, geom.column.y1()});

  const int nx = g.nx(), ny = g.ny();
  const int fnx = 2 * nx + 1, fny = 2 * ny + 1;

  // Fine (Q2) lattice coordinates: even indices on grid lines, odd on
  // midpoints.
  g.q2_x.resize(fnx * fny);
  g.q2_y.resize(fnx * fny);
  auto fine_coord = [](const std::vector<double>& lines, int f) {
    return (f % 2 == 0) ? lines[f / 2] : 0.5 * (lines[f / 2] + lines[f / 2 + 1]);
  };
  for (int j = 0; j < fny; ++j)
    for (int i = 0; i < fnx; ++i) {
      g.q2_x[i + fnx * j] = fine_coord(g.x_lines, i);
      g.q2_y[i + fnx * j] = fine_coord(g.y_lines, j);
    }
  g.q1_x.resize((nx + 1) * (ny + 1));
  g.q1_y.resize((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      g.q1_x[i + (nx + 1) * j] = g.x_lines[i];
      g.q1_y[i + (nx + 1) * j] = g.y_lines[j];
    }

  auto fid = [fnx](int i, int j) { return i + fnx * j; };
  g.elements.resize(nx * ny);
  g.centroid_x.resize(nx * ny);
  g.centroid_y.resize(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Element& e = g.elements[g.element_at(i, j)];
      const int bx = 2 * i, by = 2 * j;
      e.q2 = {fid(bx, by),         fid(bx + 2, by),     fid(bx + 2, by + 2),
              fid(bx, by + 2),     fid(bx + 1, by),     fid(bx + 2, by + 1),
              fid(bx + 1, by + 2), fid(bx, by + 1),     fid(bx + 1, by + 1)};
      e.q1 = {i + (nx + 1) * j, i + 1 + (nx + 1) * j, i + 1 + (nx + 1) * (j + 1),
              i + (nx + 1) * (j + 1)};
      const double cx = 0.5 * (g.x_lines[i] + g.x_lines[i + 1]);
      const double cy = 0.5 * (g.y_lines[j] + g.y_lines[j + 1]);
      g.centroid_x[g.element_at(i, j)] = cx;
      g.centroid_y[g.element_at(i, j)] = cy;
      if (geom.column.contains(cx, cy))
        e.tag = DomainTag::solid_nondesign;
      else if (geom.design_box.contains(cx, cy))
        e.tag = DomainTag::design;
      else
        e.tag = DomainTag::fluid_nondesign;
    }
  }

  const int nn = g.n_q2_nodes();
  g.is_outer_boundary.assign(nn, 0);
  g.is_solid_node.assign(nn, 0);
  g.is_wet_node.assign(nn, 0);
  std::vector<char> touches_fluid(nn, 0);
  for (const Element& e : g.elements) {
    const bool solid = e.tag != DomainTag::fluid_nondesign;
    for (int a = 0; a < 9; ++a)
      (solid ? g.is_solid_node : touches_fluid)[e.q2[a]] = 1;
  }
  for (int j = 0; j < fny; ++j)
    for (int i = 0; i < fnx; ++i) {
      const int id = fid(i, j);
      const bool left = (i == 0), right = (i == fnx - 1);
      const bool bottom = (j == 0), top = (j == fny - 1);
      if (left) g.inlet.push_back(id);
      if (right) g.outlet.push_back(id);
      if (bottom || top) g.walls.push_back(id);
      if (left || right || bottom || top) {
        g.mesh_fixed.push_back(id);
        g.is_outer_boundary[id] = 1;
      }
    }
  for (int id = 0; id < nn; ++id) {
    if (g.is_solid_node[id] && touches_fluid[id]) {
      g.is_wet_node[id] = 1;
      g.wet_interface.push_back(id);
    }
  }

  for (int id = 0; id < nn; ++id)
    if (g.is_solid_node[id] &&
        std::abs(g.q2_y[id] - geom.design_box.y0) < kSnapTol)
      g.struct_fixed.push_back(id);

  g.node_to_solid.assign(nn, -1);
  for (int id = 0; id < nn; ++id)
    if (g.is_solid_node[id]) {
      g.node_to_solid[id] = static_cast<int>(g.solid_nodes.size());
      g.solid_nodes.push_back(id);
    }
  for (int e = 0; e < g.n_elements(); ++e)
    if (g.elements[e].tag == DomainTag::design) g.design_elements.push_back(e);

  g.element_area.resize(g.n_elements());
  std::array<MappedPoint<double>, QuadratureTables::nq> mp;
  std::array<double, 9> ex, ey;
  const Coords<double> ref = g.reference_coords();
  for (int e = 0; e < g.n_elements(); ++e) {
    gather_element_coords(g, ref, e, ex, ey);
    map_element<double>(ex, ey, false, mp, e);
    double area = 0.0;
    for (const auto& m : mp) area += m.jxw;
    g.element_area[e] = area;
  }
  return g;
}

Coords<double> StructuredGrid::reference_coords() const {
  return Coords<double>{q2_x, q2_y};
}

double StructuredGrid::quadrature_area() const {
  double a = 0.0;
  for (double v : element_area) a += v;
  return a;
}

}  // namespace tofsi
