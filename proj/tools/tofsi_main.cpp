#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tofsi/optimizer.hpp"
#include "tofsi/snapshot.hpp"
#include "tofsi/vtk.hpp"

namespace fs = std::filesystem;
using namespace tofsi;

namespace {

RunConfig load_config(const std::string& path, const std::string& mesh_flag) {
  RunConfig cfg = path.empty() ? RunConfig{} : parse_config(path);
  if (mesh_flag == "on") cfg.mesh_deformation = true;
  if (mesh_flag == "off") cfg.mesh_deformation = false;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
}

// Expands the dense solid displacement vector onto the full Q2 grid.
std::vector<double> expand_solid(const Model& m, const std::vector<double>& u) {
  std::vector<double> full(2 * m.grid.n_q2_nodes(), 0.0);
  for (int node : m.grid.solid_nodes) {
    full[2 * node] = u[m.smap.dof(node, 0)];
    full[2 * node + 1] = u[m.smap.dof(node, 1)];
  }
  return full;
}

void export_state_vtk(const fs::path& dir, const RunConfig& cfg,
                      const Model& m, std::span<const double> rho_raw,
                      const CoupledState<double>& st) {
  DensityFilter filter(m.grid, cfg.projection.radius);
  ProjectionParams pp = cfg.projection;
  InterpolationParams ip = cfg.interpolation;
  const ContinuationState cs =
      continuation_state(cfg.iterations, ip.delta_e_upsilon);
  pp.beta = cs.beta;
  const RobustTriplet<double> trip = robust_triplet<double>(rho_raw, filter, pp);

  VtkFields fields;
  fields.cell_scalars.emplace_back(
      "rho", element_density_field<double>(m.grid, rho_raw));
  fields.cell_scalars.emplace_back(
      "rho_bar", element_density_field<double>(m.grid, trip.nominal.rho_bar));
  std::vector<double> vel(2 * m.grid.n_q2_nodes());
  for (int n = 0; n < m.grid.n_q2_nodes(); ++n) {
    vel[2 * n] = st.w[m.fmap.vel(n, 0)];
    vel[2 * n + 1] = st.w[m.fmap.vel(n, 1)];
  }
  fields.point_vectors.emplace_back("velocity", vel);
  fields.point_scalars.emplace_back("pressure",
                                    pressure_to_q2_nodes(m.grid, m.fmap, st.w));
  fields.point_vectors.emplace_back("displacement", expand_solid(m, st.u));
  fields.point_vectors.emplace_back("mesh_displacement", st.d);

  write_vtk((dir / "fields_reference.vtk").string(), m.grid,
            m.grid.reference_coords(), fields, "reference configuration");
  const Coords<double> def = cfg.mesh_deformation
                                 ? deformed_coordinates<double>(
                                       m.grid, st.u, st.d)
                                 : m.grid.reference_coords();
  write_vtk((dir / "fields_deformed.vtk").string(), m.grid, def, fields,
            "deformed configuration");
}

std::vector<int> default_verify_elements(const Model& m, const RunConfig& cfg) {
  // eight sample points on a 2x4 lattice over the design box
  std::vector<int> ids;
  const Rect& box = cfg.geometry.design_box;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 4; ++i) {
      const double x = box.x0 + (i + 0.5) / 4.0 * box.w;
      const double y = box.y0 + (j + 0.5) / 2.0 * box.h;
      int best = -1;
      double dist = 1e300;
      for (int e : m.grid.design_elements) {
        const double dx = m.grid.centroid_x[e] - x;
        const double dy = m.grid.centroid_y[e] - y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < dist) {
          dist = d2;
          best = e;
        }
      }
      ids.push_back(best);
    }
  }
  return ids;
}

int cmd_analyze(const RunConfig& cfg, const fs::path& out,
                const std::string& design_path,
                const std::string& crosscheck_path) {
  const Model model = build_model(cfg);
  std::vector<double> rho =
      design_path.empty()
          ? initial_design(model, cfg.volume_fraction)
          : load_design(design_path, model.grid);

  if (!crosscheck_path.empty()) {
    // evaluate the stored design under both analysis modes
    const std::vector<double> xrho = load_design(crosscheck_path, model.grid);
    RunConfig moving = cfg, fixed = cfg;
    moving.mesh_deformation = true;
    fixed.mesh_deformation = false;
    const Model m_moving = build_model(moving);
    const Model m_fixed = build_model(fixed);
    const AnalysisResult a = analyze_design(moving, m_moving, xrho);
    const AnalysisResult b = analyze_design(fixed, m_fixed, xrho);
    std::printf("design: %s\n", crosscheck_path.c_str());
    std::printf("%-28s %-14s %-14s\n", "", "moving mesh", "fixed mesh");
    std::printf("%-28s %-14.6f %-14.6f\n", "objective analyzed for",
                a.compliance_nominal, b.compliance_nominal);
    return exit_ok;
  }

  const AnalysisResult res = analyze_design(cfg, model, rho);
  fs::create_directories(out);
  write_text(out / "config.echo", echo_config(cfg));
  save_state((out / "state.tofsi").string(), model.grid, rho, res.state,
             cfg.mesh_deformation);
  export_state_vtk(out, cfg, model, rho, res.state);
  std::printf("coupling trace (outer, fluid, structure, mesh, newton):\n");
  for (const OuterRecord& t : res.trace)
    std::printf("  %3d  %.3e  %.3e  %.3e  %d\n", t.outer, t.r_fluid,
                t.r_struct, t.r_mesh, t.newton_iters);
  std::printf("nominal compliance = %.9e\n", res.compliance_nominal);
  return exit_ok;
}

int cmd_optimize(const RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  write_text(out / "config.echo", echo_config(cfg));
  const Model model = build_model(cfg);

  std::ofstream csv(out / "history.csv");
  if (!csv) throw IoError("cannot write history.csv");
  csv << "iteration,f_dilated,f_nominal,f_eroded,dm_percent,volume_nominal,"
         "dilated_target,beta,p_e,p_upsilon,max_change,staggered_iterations,"
         "wall_seconds\n";
  auto log_row = [&](const IterationLog& row, const std::vector<double>& rho) {
    char line[512];
    std::snprintf(line, sizeof line,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%d,%.3f\n",
                  row.iteration, row.f_dilated, row.f_nominal, row.f_eroded,
                  row.dm_percent, row.volume_nominal, row.dilated_target,
                  row.beta, row.p_e, row.p_upsilon, row.max_change,
                  row.staggered_iterations, row.wall_seconds);
    csv << line;
    csv.flush();
    std::printf(
        "it %3d  f=(%.5f %.5f %.5f)  DM=%.3f%%  vol=%.4f  beta=%g  dmax=%.3f "
        " (%.1fs)\n",
        row.iteration, row.f_dilated, row.f_nominal, row.f_eroded,
        row.dm_percent, row.volume_nominal, row.beta, row.max_change,
        row.wall_seconds);
    std::fflush(stdout);
    if (cfg.snapshot_every > 0 && row.iteration % cfg.snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "design_iter_%03d.tofsi", row.iteration);
      save_design((out / name).string(), model.grid, rho);
    }
  };

  const OptimizationResult res = run_optimization(cfg, log_row);
  save_design((out / (res.completed ? "design_final.tofsi"
                                    : "design_abort.tofsi"))
                  .string(),
              model.grid, res.design.rho);
  if (!res.completed) {
    std::fprintf(stderr, "optimization aborted: %s\n",
                 res.abort_reason.c_str());
    return exit_convergence_error;
  }
  const IterationLog& last = res.history.rows.back();
  std::printf("final: f_nominal=%.6f DM=%.4f%% volume=%.4f\n", last.f_nominal,
              last.dm_percent, last.volume_nominal);
  return exit_ok;
}

int cmd_verify(const RunConfig& cfg, const fs::path& out,
               std::vector<int> elements, double step) {
  const Model model = build_model(cfg);
  if (elements.empty()) elements = default_verify_elements(model, cfg);
  const std::vector<double> rho = initial_design(model, cfg.volume_fraction);

  // verification runs at the start-of-continuation parameters
  InterpolationParams ip = cfg.interpolation;
  ProjectionParams pp = cfg.projection;
  const ContinuationState cs = continuation_state(1, ip.delta_e_upsilon);
  ip.p_e = cs.p_e;
  ip.p_upsilon = cs.p_upsilon;
  pp.beta = cs.beta;

  const VerificationReport report =
      verify_complex_step(model, rho, pp, ip, cfg.coupler, elements, step);

  fs::create_directories(out);
  std::ofstream csv(out / "verification.csv");
  csv << "element,imaginary_step,objective_imaginary_part,"
         "analytical_sensitivity,normalized_error\n";
  std::printf("%8s %12s %22s %22s %15s\n", "element", "step", "Im(f)",
              "analytic", "norm. error");
  bool all_converged = true;
  for (const VerificationRow& r : report.rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%d,%.3e,%.12e,%.12e,%.6e\n", r.element,
                  r.step, r.imag_part, r.analytic, r.normalized_error);
    csv << line;
    std::printf("%8d %12.3e %22.12e %22.12e %15.4e%s\n", r.element, r.step,
                r.imag_part, r.analytic, r.normalized_error,
                r.converged ? "" : "  [not converged]");
    all_converged = all_converged && r.converged;
  }
  return all_converged ? exit_ok : exit_convergence_error;
}

int cmd_export(const RunConfig& cfg, const fs::path& out,
               const std::string& state_path) {
  const Model model = build_model(cfg);
  const SavedState s = load_state(state_path, model.grid);
  RunConfig mode_cfg = cfg;
  mode_cfg.mesh_deformation = s.mesh_deformation;
  fs::create_directories(out);
  export_state_vtk(out, mode_cfg, model, s.rho_raw, s.state);
  std::printf("wrote %s and %s\n",
              (out / "fields_reference.vtk").string().c_str(),
              (out / "fields_deformed.vtk").string().c_str());
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density-based topology optimization of coupled "
               "fluid-structure interaction"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mesh_flag, design_path,
              crosscheck_path, state_path, elements_arg;
  double step = 1e-10;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--mesh-deformation", mesh_flag,
                    "override the analysis mode (on|off)")
        ->check(CLI::IsMember({"on", "off"}));
  };

  CLI::App* analyze = app.add_subcommand(
      "analyze", "one coupled solve with field export");
  add_common(analyze);
  analyze->add_option("--design", design_path, "design snapshot to analyze");
  analyze->add_option("--cross-check", crosscheck_path,
                      "evaluate a design under both analysis modes");

  CLI::App* optimize =
      app.add_subcommand("optimize", "run the optimization loop");
  add_common(optimize);

  CLI::App* verify = app.add_subcommand(
      "verify", "complex-step verification of the adjoint sensitivities");
  add_common(verify);
  verify->add_option("--elements", elements_arg,
                     "comma-separated global element ids");
  verify->add_option("--step", step, "imaginary step size");

  CLI::App* exp = app.add_subcommand("export", "write VTK files from a state");
  add_common(exp);
  exp->add_option("--state", state_path, "state snapshot")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = load_config(config_path, mesh_flag);
    if (app.got_subcommand(analyze))
      return cmd_analyze(cfg, out_dir, design_path, crosscheck_path);
    if (app.got_subcommand(optimize)) return cmd_optimize(cfg, out_dir);
    if (app.got_subcommand(verify)) {
      std::vector<int> ids;
      std::stringstream ss(elements_arg);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) ids.push_back(std::stoi(tok));
      return cmd_verify(cfg, out_dir, ids, step);
    }
    if (app.got_subcommand(exp)) return cmd_export(cfg, out_dir, state_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return exit_config_error;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return exit_config_error;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "geometry error: %s\n", e.what());
    return exit_geometry_error;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    return exit_convergence_error;
  } catch (const SolveError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return exit_convergence_error;
  }
  return exit_ok;
}
