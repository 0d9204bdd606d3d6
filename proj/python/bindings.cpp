#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tofsi/optimizer.hpp"
#include "tofsi/vtk.hpp"

namespace py = pybind11;
using namespace tofsi;

namespace {

RunConfig config_from_overrides(const py::dict& overrides) {
  std::string text;
  for (const auto& item : overrides) {
    text += py::cast<std::string>(py::str(item.first));
    text += " = ";
    text += py::cast<std::string>(py::str(item.second));
    text += "\n";
  }
  return parse_config_text(text);
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict analyze_py(const py::dict& overrides) {
  const RunConfig cfg = config_from_overrides(overrides);
  const Model model = build_model(cfg);
  const std::vector<double> rho = initial_design(model, cfg.volume_fraction);
  const AnalysisResult res = analyze_design(cfg, model, rho);

  const int nn = model.grid.n_q2_nodes();
  std::vector<double> vx(nn), vy(nn);
  for (int n = 0; n < nn; ++n) {
    vx[n] = res.state.w[model.fmap.vel(n, 0)];
    vy[n] = res.state.w[model.fmap.vel(n, 1)];
  }
  std::vector<double> p(model.fmap.n_q1);
  for (int n = 0; n < model.fmap.n_q1; ++n)
    p[n] = res.state.w[model.fmap.pres(n)];

  py::dict out;
  out["compliance"] = res.compliance_nominal;
  out["velocity_x"] = to_array(vx);
  out["velocity_y"] = to_array(vy);
  out["pressure"] = to_array(p);
  out["node_x"] = to_array(model.grid.q2_x);
  out["node_y"] = to_array(model.grid.q2_y);
  out["pressure_node_x"] = to_array(model.grid.q1_x);
  out["pressure_node_y"] = to_array(model.grid.q1_y);
  out["displacement"] = to_array(res.state.u);
  out["outer_iterations"] = static_cast<int>(res.trace.size()) - 1;
  return out;
}

py::dict optimize_py(const py::dict& overrides) {
  const RunConfig cfg = config_from_overrides(overrides);
  const OptimizationResult res = run_optimization(cfg);
  if (!res.completed)
    throw std::runtime_error("optimization aborted: " + res.abort_reason);
  py::dict out;
  out["design"] = to_array(res.design.rho);
  out["nominal"] = to_array(res.design.nominal);
  std::vector<double> f_n, dm, vol;
  for (const IterationLog& row : res.history.rows) {
    f_n.push_back(row.f_nominal);
    dm.push_back(row.dm_percent);
    vol.push_back(row.volume_nominal);
  }
  out["f_nominal"] = to_array(f_n);
  out["dm_percent"] = to_array(dm);
  out["volume_nominal"] = to_array(vol);
  return out;
}

py::list verify_py(const py::dict& overrides, const std::vector<int>& elements,
                   double step) {
  const RunConfig cfg = config_from_overrides(overrides);
  const Model model = build_model(cfg);
  const std::vector<double> rho = initial_design(model, cfg.volume_fraction);
  InterpolationParams ip = cfg.interpolation;
  ProjectionParams pp = cfg.projection;
  const ContinuationState cs = continuation_state(1, ip.delta_e_upsilon);
  ip.p_e = cs.p_e;
  ip.p_upsilon = cs.p_upsilon;
  pp.beta = cs.beta;
  const VerificationReport rep =
      verify_complex_step(model, rho, pp, ip, cfg.coupler, elements, step);
  py::list rows;
  for (const VerificationRow& r : rep.rows) {
    py::dict d;
    d["element"] = r.element;
    d["step"] = r.step;
    d["imag_part"] = r.imag_part;
    d["approx"] = r.approx;
    d["analytic"] = r.analytic;
    d["normalized_error"] = r.normalized_error;
    d["converged"] = r.converged;
    rows.append(d);
  }
  return rows;
}

py::dict grid_summary_py(const py::dict& overrides) {
  const RunConfig cfg = config_from_overrides(overrides);
  const StructuredGrid g = build_grid(cfg.geometry);
  py::dict out;
  out["nx"] = g.nx();
  out["ny"] = g.ny();
  out["elements"] = g.n_elements();
  out["q2_nodes"] = g.n_q2_nodes();
  out["q1_nodes"] = g.n_q1_nodes();
  out["design_elements"] = static_cast<int>(g.design_elements.size());
  out["area"] = g.quadrature_area();
  return out;
}

}  // namespace

PYBIND11_MODULE(_tofsi, m) {
  m.doc() = "density-based topology optimization of coupled "
            "fluid-structure interaction";

  m.def("grid_summary", &grid_summary_py, py::arg("overrides") = py::dict());
  m.def("analyze", &analyze_py, py::arg("overrides") = py::dict(),
        "one coupled solve of the current design; returns fields");
  m.def("optimize", &optimize_py, py::arg("overrides") = py::dict(),
        "run the optimization loop; returns the design and history");
  m.def("verify", &verify_py, py::arg("overrides") = py::dict(),
        py::arg("elements"), py::arg("step") = 1e-10,
        "complex-step verification of the adjoint sensitivities");

  m.def("brinkman_alpha", [](double rho, double alpha_max, double alpha_min,
                             double p_alpha) {
    InterpolationParams ip;
    ip.alpha_max = alpha_max;
    ip.alpha_min = alpha_min;
    ip.p_alpha = p_alpha;
    auto [v, d] = brinkman_alpha(rho, ip);
    return py::make_tuple(v, d);
  });
  m.def("simp_modulus", [](double rho, double e_max, double e_min, double p_e) {
    InterpolationParams ip;
    ip.e_max = e_max;
    ip.e_min = e_min;
    ip.p_e = p_e;
    auto [v, d] = simp_modulus(rho, ip);
    return py::make_tuple(v, d);
  });
  m.def("force_filter", [](double rho, double p_upsilon) {
    InterpolationParams ip;
    ip.p_upsilon = p_upsilon;
    auto [v, d] = force_filter(rho, ip);
    return py::make_tuple(v, d);
  });
  m.def("project", [](double rho_tilde, double beta, double eta) {
    auto [v, d] = project(rho_tilde, beta, eta);
    return py::make_tuple(v, d);
  });
  m.def("discreteness_measure", [](const std::vector<double>& rho) {
    return discreteness_measure(rho);
  });
}
