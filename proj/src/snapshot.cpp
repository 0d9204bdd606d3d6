#include "tofsi/snapshot.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tofsi {

namespace {

void write_vector(std::FILE* f, const char* name,
                  std::span<const double> values) {
  std::fprintf(f, "%s %zu", name, values.size());
  for (double v : values) std::fprintf(f, " %.17g", v);
  std::fprintf(f, "\n");
}

std::vector<double> read_vector(std::istream& in, const std::string& expect) {
  std::string name;
  std::size_t count = 0;
  if (!(in >> name >> count) || name != expect)
    throw IoError("snapshot: expected section '" + expect + "', got '" + name +
                  "'");
  std::vector<double> v(count);
  for (double& x : v)
    if (!(in >> x)) throw IoError("snapshot: truncated section '" + expect + "'");
  return v;
}

void check_grid(const StructuredGrid& grid, const std::vector<double>& xl,
                const std::vector<double>& yl) {
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
  };
  if (!same(xl, grid.x_lines) || !same(yl, grid.y_lines))
    throw IoError("snapshot was written for a different grid");
}

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

void save_design(const std::string& path, const StructuredGrid& grid,
                 std::span<const double> rho_raw) {
  File out(path);
  std::fprintf(out.f, "tofsi-design 1\n");
  write_vector(out.f, "x_lines", grid.x_lines);
  write_vector(out.f, "y_lines", grid.y_lines);
  write_vector(out.f, "design_rho", rho_raw);
}

std::vector<double> load_design(const std::string& path,
                                const StructuredGrid& grid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open design file '" + path + "'");
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "tofsi-design" || version != 1)
    throw IoError("'" + path + "' is not a design snapshot");
  const auto xl = read_vector(in, "x_lines");
  const auto yl = read_vector(in, "y_lines");
  check_grid(grid, xl, yl);
  auto rho = read_vector(in, "design_rho");
  if (rho.size() != grid.design_elements.size())
    throw IoError("design snapshot has wrong variable count");
  return rho;
}

void save_state(const std::string& path, const StructuredGrid& grid,
                std::span<const double> rho_raw,
                const CoupledState<double>& state, bool mesh_deformation) {
  File out(path);
  std::fprintf(out.f, "tofsi-state 1\n");
  write_vector(out.f, "x_lines", grid.x_lines);
  write_vector(out.f, "y_lines", grid.y_lines);
  write_vector(out.f, "design_rho", rho_raw);
  std::fprintf(out.f, "mesh_deformation %d\n", mesh_deformation ? 1 : 0);
  write_vector(out.f, "w", state.w);
  write_vector(out.f, "u", state.u);
  write_vector(out.f, "d", state.d);
}

SavedState load_state(const std::string& path, const StructuredGrid& grid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open state file '" + path + "'");
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "tofsi-state" || version != 1)
    throw IoError("'" + path + "' is not a state snapshot");
  const auto xl = read_vector(in, "x_lines");
  const auto yl = read_vector(in, "y_lines");
  check_grid(grid, xl, yl);
  SavedState s;
  s.rho_raw = read_vector(in, "design_rho");
  std::string key;
  int flag = 0;
  in >> key >> flag;
  if (key != "mesh_deformation") throw IoError("snapshot: missing mode flag");
  s.mesh_deformation = flag != 0;
  s.state.w = read_vector(in, "w");
  s.state.u = read_vector(in, "u");
  s.state.d = read_vector(in, "d");
  return s;
}

}  // namespace tofsi
