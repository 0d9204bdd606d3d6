#include "tofsi/vtk.hpp"

#include <cstdio>

namespace tofsi {

namespace {

// Each Q2 cell splits into four quads through the midside and center nodes.
constexpr int kSubQuads[4][4] = {
    {0, 4, 8, 7}, {4, 1, 5, 8}, {8, 5, 2, 6}, {7, 8, 6, 3}};

struct File {
  explicit File(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
    if (!f) throw IoError("cannot open '" + path + "' for writing");
  }
  ~File() {
    if (f) std::fclose(f);
  }
  std::FILE* f;
};

}  // namespace

void write_vtk(const std::string& path, const StructuredGrid& grid,
               const Coords<double>& coords, const VtkFields& fields,
               const std::string& title) {
  File out(path);
  std::FILE* f = out.f;
  const int np = grid.n_q2_nodes();
  const int nc = 4 * grid.n_elements();

  std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\n", title.c_str());
  std::fprintf(f, "DATASET UNSTRUCTURED_GRID\nPOINTS %d double\n", np);
  for (int i = 0; i < np; ++i)
    std::fprintf(f, "%.17g %.17g 0\n", coords.x[i], coords.y[i]);

  std::fprintf(f, "CELLS %d %d\n", nc, 5 * nc);
  for (const Element& e : grid.elements)
    for (const auto& quad : kSubQuads)
      std::fprintf(f, "4 %d %d %d %d\n", e.q2[quad[0]], e.q2[quad[1]],
                   e.q2[quad[2]], e.q2[quad[3]]);
  std::fprintf(f, "CELL_TYPES %d\n", nc);
  for (int i = 0; i < nc; ++i) std::fprintf(f, "9\n");

  if (!fields.cell_scalars.empty()) {
    std::fprintf(f, "CELL_DATA %d\n", nc);
    for (const auto& [name, values] : fields.cell_scalars) {
      if (static_cast<int>(values.size()) != grid.n_elements())
        throw IoError("cell field '" + name + "' has wrong length");
      std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n",
                   name.c_str());
      for (double v : values)
        for (int s = 0; s < 4; ++s) std::fprintf(f, "%.17g\n", v);
    }
  }
  if (!fields.point_scalars.empty() || !fields.point_vectors.empty()) {
    std::fprintf(f, "POINT_DATA %d\n", np);
    for (const auto& [name, values] : fields.point_scalars) {
      if (static_cast<int>(values.size()) != np)
        throw IoError("point field '" + name + "' has wrong length");
      std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n",
                   name.c_str());
      for (double v : values) std::fprintf(f, "%.17g\n", v);
    }
    for (const auto& [name, values] : fields.point_vectors) {
      if (static_cast<int>(values.size()) != 2 * np)
        throw IoError("vector field '" + name + "' has wrong length");
      std::fprintf(f, "VECTORS %s double\n", name.c_str());
      for (int i = 0; i < np; ++i)
        std::fprintf(f, "%.17g %.17g 0\n", values[2 * i], values[2 * i + 1]);
    }
  }
}

std::vector<double> pressure_to_q2_nodes(const StructuredGrid& grid,
                                         const FluidDofMap& fmap,
                                         const std::vector<double>& w) {
  std::vector<double> p(grid.n_q2_nodes(), 0.0);
  for (const Element& e : grid.elements) {
    const double pc[4] = {w[fmap.pres(e.q1[0])], w[fmap.pres(e.q1[1])],
                          w[fmap.pres(e.q1[2])], w[fmap.pres(e.q1[3])]};
    // corners, edge midpoints, center of the bilinear field
    p[e.q2[0]] = pc[0];
    p[e.q2[1]] = pc[1];
    p[e.q2[2]] = pc[2];
    p[e.q2[3]] = pc[3];
    p[e.q2[4]] = 0.5 * (pc[0] + pc[1]);
    p[e.q2[5]] = 0.5 * (pc[1] + pc[2]);
    p[e.q2[6]] = 0.5 * (pc[2] + pc[3]);
    p[e.q2[7]] = 0.5 * (pc[3] + pc[0]);
    p[e.q2[8]] = 0.25 * (pc[0] + pc[1] + pc[2] + pc[3]);
  }
  return p;
}

}  // namespace tofsi
