#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_helpers.hpp"
#include "tofsi/config.hpp"
#include "tofsi/optimizer.hpp"
#include "tofsi/snapshot.hpp"
#include "tofsi/vtk.hpp"

using namespace tofsi;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("io");

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("empty config yields the benchmark defaults") {
  const RunConfig cfg = parse_config_text("");
  CHECK(cfg.fluid.v_max == 1.0);
  CHECK(cfg.fluid.rho_f == 1.0);
  CHECK(cfg.fluid.mu == 1.0);
  CHECK(cfg.interpolation.e_max == 1e4);
  CHECK(cfg.interpolation.e_min == 1e-6);
  CHECK(cfg.solid.nu == 0.3);
  CHECK(cfg.volume_fraction == 0.1);
  CHECK(cfg.iterations == 100);
  CHECK(cfg.projection.eta_n == 0.5);
  CHECK(cfg.projection.eta_d == 0.49);
  CHECK(cfg.projection.eta_e == 0.51);
  CHECK(cfg.projection.radius == 1.5);
  CHECK(cfg.coupler.tol == 1e-8);
  CHECK(cfg.mesh_deformation);
}

TEST_CASE("config parsing: exact values, rejects, comments") {
  const RunConfig cfg = parse_config_text(
      "interpolation.p_alpha = 18e-7\n"
      "# a comment line\n"
      "geometry.resolution = 0.05  # trailing comment\n"
      "mesh_deformation = off\n");
  CHECK(cfg.interpolation.p_alpha == 18e-7);
  CHECK(cfg.geometry.resolution == 0.05);
  CHECK(!cfg.mesh_deformation);

  CHECK_THROWS_AS(parse_config_text("physics.nu = 0.7\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("no.such.key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("physics.mu = fast\n"), ConfigError);
  try {
    parse_config_text("who.knows = 1\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("who.knows") != std::string::npos);
  }
}

TEST_CASE("config echo round-trips") {
  RunConfig cfg;
  cfg.geometry.resolution = 0.037;
  cfg.interpolation.p_alpha = 9.5e-7;
  cfg.coupler.tol = 1e-9;
  cfg.mesh_deformation = false;
  const RunConfig back = parse_config_text(echo_config(cfg));
  CHECK(back.geometry.resolution == cfg.geometry.resolution);
  CHECK(back.interpolation.p_alpha == cfg.interpolation.p_alpha);
  CHECK(back.coupler.tol == cfg.coupler.tol);
  CHECK(back.mesh_deformation == cfg.mesh_deformation);
  CHECK(echo_config(back) == echo_config(cfg));
}

TEST_CASE("vtk writer: header, subdivision counts") {
  GeometryConfig geom;
  geom.channel = {0, 0, 1, 1};
  geom.design_box = {0, 0, 1, 1};
  geom.column = {0, 0, 1, 1};
  geom.resolution = 1.0;
  const StructuredGrid g = build_grid(geom);
  VtkFields fields;
  fields.cell_scalars.emplace_back("rho", std::vector<double>{0.5});
  std::vector<double> uy(2 * g.n_q2_nodes(), 0.25);
  fields.point_vectors.emplace_back("displacement", uy);

  const fs::path path = temp_file("tofsi_vtk_test.vtk");
  write_vtk(path.string(), g, g.reference_coords(), fields);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  int points = 0, cells = 0, cell_entries = 0, cell_data = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "POINTS") ss >> points;
    if (tag == "CELLS") ss >> cells >> cell_entries;
    if (tag == "CELL_DATA") ss >> cell_data;
  }
  CHECK(points == 9);
  CHECK(cells == 4);
  CHECK(cell_entries == 20);
  CHECK(cell_data == 4 * g.n_elements());
  fs::remove(path);

  // point count on a larger grid
  const StructuredGrid big = build_grid(testing::miniature_geometry());
  CHECK(big.n_q2_nodes() == (2 * big.nx() + 1) * (2 * big.ny() + 1));
}

TEST_CASE("design and state snapshots round-trip and check the grid") {
  const StructuredGrid g = build_grid(testing::miniature_geometry());
  const auto rho = testing::random_design(g.design_elements.size(), 77);
  const fs::path dpath = temp_file("tofsi_design_test.tofsi");
  save_design(dpath.string(), g, rho);
  const auto back = load_design(dpath.string(), g);
  REQUIRE(back.size() == rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) CHECK(back[i] == rho[i]);

  GeometryConfig other = testing::miniature_geometry();
  other.resolution = 0.05;
  const StructuredGrid g2 = build_grid(other);
  CHECK_THROWS_AS(load_design(dpath.string(), g2), IoError);
  fs::remove(dpath);

  Model m = Model::build(testing::miniature_geometry(), FluidProperties{},
                         SolidProperties{}, true);
  CoupledState<double> st = zero_state<double>(m);
  st.u[3] = 0.125;
  st.w[10] = -2.5;
  const fs::path spath = temp_file("tofsi_state_test.tofsi");
  save_state(spath.string(), g, rho, st, true);
  const SavedState s = load_state(spath.string(), g);
  CHECK(s.mesh_deformation);
  CHECK(s.state.u[3] == 0.125);
  CHECK(s.state.w[10] == -2.5);
  CHECK(s.rho_raw[0] == rho[0]);
  fs::remove(spath);
}

TEST_CASE("optimization is deterministic apart from wall time") {
  RunConfig cfg;
  cfg.geometry = testing::miniature_geometry();
  cfg.iterations = 3;
  cfg.snapshot_every = 0;

  auto run = [&]() {
    std::vector<IterationLog> rows;
    run_optimization(cfg, [&](const IterationLog& log,
                              const std::vector<double>&) {
      rows.push_back(log);
    });
    return rows;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].f_dilated == b[i].f_dilated);
    CHECK(a[i].f_nominal == b[i].f_nominal);
    CHECK(a[i].f_eroded == b[i].f_eroded);
    CHECK(a[i].dm_percent == b[i].dm_percent);
    CHECK(a[i].volume_nominal == b[i].volume_nominal);
    CHECK(a[i].dilated_target == b[i].dilated_target);
    CHECK(a[i].max_change == b[i].max_change);
    CHECK(a[i].staggered_iterations == b[i].staggered_iterations);
  }
}

TEST_SUITE_END();
