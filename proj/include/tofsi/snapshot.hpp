#pragma once

#include <string>
#include <vector>

#include "tofsi/coupler.hpp"

namespace tofsi {

// Flat text containers for designs and full states, with explicit grid lines
// so a file can only be applied to the mesh it was written for. Ordering:
// design values follow grid.design_elements; state vectors follow the dof
// maps.

void save_design(const std::string& path, const StructuredGrid& grid,
                 std::span<const double> rho_raw);
std::vector<double> load_design(const std::string& path,
                                const StructuredGrid& grid);

struct SavedState {
  std::vector<double> rho_raw;
  CoupledState<double> state;
  bool mesh_deformation = true;
};

void save_state(const std::string& path, const StructuredGrid& grid,
                std::span<const double> rho_raw,
                const CoupledState<double>& state, bool mesh_deformation);
SavedState load_state(const std::string& path, const StructuredGrid& grid);

}  // namespace tofsi
