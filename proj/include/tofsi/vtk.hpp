#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tofsi/fluid.hpp"
#include "tofsi/grid.hpp"

namespace tofsi {

// Field bundle for export. Cell scalars are per element (each Q2 cell is
// emitted as four linear quads, so values are replicated); point data lives
// on the Q2 nodes, vectors as (x, y) pairs.
struct VtkFields {
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
  std::vector<std::pair<std::string, std::vector<double>>> point_scalars;
  std::vector<std::pair<std::string, std::vector<double>>> point_vectors;
};

void write_vtk(const std::string& path, const StructuredGrid& grid,
               const Coords<double>& coords, const VtkFields& fields,
               const std::string& title = "tofsi fields");

// Bilinear interpolation of the Q1 pressure onto all Q2 nodes for export.
std::vector<double> pressure_to_q2_nodes(const StructuredGrid& grid,
                                         const FluidDofMap& fmap,
                                         const std::vector<double>& w);

}  // namespace tofsi
