#pragma once

#include <complex>
#include <vector>

#include "tofsi/coupler.hpp"

namespace tofsi {

// Monolithic unknown layout of the coupled three-field system: structural
// displacements, the full mesh-displacement field (solid nodes tied to u by
// explicit equations), then the fluid unknowns. The fluid never sees u
// directly and the mesh equations never see w, so two blocks are
// structurally absent.
struct CoupledLayout {
  int n_u = 0, n_d = 0, n_w = 0;
  int off_u() const { return 0; }
  int off_d() const { return n_u; }
  int off_w() const { return n_u + n_d; }
  int n_total() const { return n_u + n_d + n_w; }
};

inline CoupledLayout coupled_layout(const Model& m) {
  return {m.smap.n_dofs(), 2 * m.grid.n_q2_nodes(), m.fmap.n_dofs()};
}

struct CoupledJacobian {
  CoupledLayout layout;
  SparseMat<double> matrix;
  std::vector<char> dirichlet;  // true-Dirichlet monolithic rows
};

namespace detail {

// Classification of mesh-displacement rows.
enum class MeshRow : unsigned char { equilibrium, tie, clamped };

inline std::vector<MeshRow> classify_mesh_rows(const Model& m) {
  const StructuredGrid& g = m.grid;
  std::vector<MeshRow> rows(2 * g.n_q2_nodes(), MeshRow::equilibrium);
  for (int node = 0; node < g.n_q2_nodes(); ++node) {
    MeshRow r = MeshRow::equilibrium;
    if (g.is_outer_boundary[node] || !m.mesh_deformation)
      r = MeshRow::clamped;
    else if (g.is_solid_node[node])
      r = MeshRow::tie;
    rows[2 * node] = rows[2 * node + 1] = r;
  }
  return rows;
}

// Imaginary step for differentiating element kernels w.r.t. nodal
// coordinates; pure element evaluations are holomorphic, so the step only
// needs to stay clear of underflow.
constexpr double kShapeStep = 1e-40;

}  // namespace detail

// The residual system the coupled jacobian differentiates. d_full is the
// complete mesh field; the deformed configuration is ref + d_full at every
// node. Used directly by the finite-difference oracles.
namespace detail {

// The configuration the residual system is posed on: reference plus the full
// mesh field when the mesh moves, plain reference otherwise.
template <class S>
Coords<S> system_coords(const Model& m, const std::vector<S>& d_full) {
  Coords<S> crd;
  const int nn = m.grid.n_q2_nodes();
  crd.x.resize(nn);
  crd.y.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const S dx = m.mesh_deformation ? d_full[2 * n] : S(0);
    const S dy = m.mesh_deformation ? d_full[2 * n + 1] : S(0);
    crd.x[n] = S(m.grid.q2_x[n]) + dx;
    crd.y[n] = S(m.grid.q2_y[n]) + dy;
  }
  return crd;
}

}  // namespace detail

template <class S>
std::vector<S> coupled_residual(PhysicsContext<S>& ctx,
                                const std::vector<S>& u,
                                const std::vector<S>& d_full,
                                const std::vector<S>& w,
                                std::span<const S> rho_bar,
                                const InterpolationParams& ip) {
  const Model& m = *ctx.model;
  const CoupledLayout lay = coupled_layout(m);
  std::vector<S> r(lay.n_total(), S(0));

  const Coords<S> crd = detail::system_coords(m, d_full);

  // structure rows
  StructureOperator<S> K(m.grid, m.smap, *m.unit_k, rho_bar, ip);
  const std::vector<S> fs = couple_fluid_force<S>(
      m.grid, crd, w, rho_bar, m.fluid, ip, m.fmap, m.smap);
  std::vector<S> rs = detail::structure_residual(K, u, fs);
  for (int i = 0; i < lay.n_u; ++i) r[lay.off_u() + i] = rs[i];

  // mesh rows
  const auto rows = detail::classify_mesh_rows(m);
  const std::vector<S> req = ctx.mesh_op.equilibrium_residual_full(d_full);
  const auto& fidx = ctx.mesh_op.free_index();
  for (int i = 0; i < lay.n_d; ++i) {
    switch (rows[i]) {
      case detail::MeshRow::clamped:
        r[lay.off_d() + i] = d_full[i];
        break;
      case detail::MeshRow::tie:
        r[lay.off_d() + i] =
            d_full[i] - u[m.smap.dof(m.grid.solid_nodes
                                         [m.grid.node_to_solid[i / 2]],
                                     i % 2)];
        break;
      case detail::MeshRow::equilibrium:
        r[lay.off_d() + i] = fidx[i] >= 0 ? req[fidx[i]] : S(0);
        break;
    }
  }

  // fluid rows
  std::vector<S> rf;
  assemble_fluid<S>(m.grid, crd, rho_bar, m.fluid, ip, w, m.fmap, m.bc, rf);
  for (int i = 0; i < lay.n_w; ++i) r[lay.off_w() + i] = rf[i];
  return r;
}

// Assembles all seven nonzero blocks of the coupled jacobian at a converged
// state. The fluid block is the converged Newton matrix; the two shape
// blocks are generated per element by complex-stepping the nodal coordinates
// through the production kernels.
inline CoupledJacobian assemble_coupled_jacobian(PhysicsContext<double>& ctx,
                                                 const CoupledState<double>& st,
                                                 std::span<const double> rho_bar,
                                                 const InterpolationParams& ip) {
  using C = std::complex<double>;
  const Model& m = *ctx.model;
  const StructuredGrid& g = m.grid;
  CoupledJacobian jac;
  jac.layout = coupled_layout(m);
  const CoupledLayout& lay = jac.layout;
  jac.dirichlet.assign(lay.n_total(), 0);

  const std::vector<double> d_full = full_mesh_field(m, st);
  const Coords<double> crd = detail::system_coords(m, d_full);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.n_elements()) * 1200);

  // --- structure block: K(rho) with grounded rows ---
  std::vector<char> fixed_u(lay.n_u, 0);
  for (int node : g.struct_fixed)
    for (int c = 0; c < 2; ++c) fixed_u[m.smap.dof(node, c)] = 1;
  for (int i = 0; i < lay.n_u; ++i)
    if (fixed_u[i]) {
      jac.dirichlet[lay.off_u() + i] = 1;
      trip.emplace_back(lay.off_u() + i, lay.off_u() + i, 1.0);
    }
  {
    std::array<int, 18> dofs;
    for (int e = 0; e < g.n_elements(); ++e) {
      if (!g.is_solid_element(e)) continue;
      const double mod = simp_modulus(rho_bar[e], ip).first;
      const auto& ke = (*m.unit_k)[e];
      for (int a = 0; a < 9; ++a)
        for (int c = 0; c < 2; ++c)
          dofs[2 * a + c] = m.smap.dof(g.elements[e].q2[a], c);
      for (int i = 0; i < 18; ++i) {
        if (fixed_u[dofs[i]]) continue;
        for (int j = 0; j < 18; ++j)
          if (!fixed_u[dofs[j]])
            trip.emplace_back(lay.off_u() + dofs[i], lay.off_u() + dofs[j],
                              mod * ke[i][j]);
      }
    }
  }

  // --- mesh rows ---
  const auto mesh_rows = detail::classify_mesh_rows(m);
  std::vector<char> clamped_d(lay.n_d, 0);
  for (int i = 0; i < lay.n_d; ++i) {
    if (mesh_rows[i] == detail::MeshRow::clamped) {
      clamped_d[i] = 1;
      jac.dirichlet[lay.off_d() + i] = 1;
      trip.emplace_back(lay.off_d() + i, lay.off_d() + i, 1.0);
    } else if (mesh_rows[i] == detail::MeshRow::tie) {
      trip.emplace_back(lay.off_d() + i, lay.off_d() + i, 1.0);
      const int node = i / 2;
      trip.emplace_back(lay.off_d() + i,
                        lay.off_u() + m.smap.dof(node, i % 2), -1.0);
    }
  }
  if (m.mesh_deformation) {
    // equilibrium rows: K_ff on free columns, K_fb mapped to wet-node d
    // columns (boundary columns are clamped and dropped)
    const auto& fidx = ctx.mesh_op.free_index();
    std::vector<int> free_to_dof(ctx.mesh_op.n_free(), -1);
    for (int i = 0; i < lay.n_d; ++i)
      if (fidx[i] >= 0) free_to_dof[fidx[i]] = i;
    const SparseMat<double>& kff = ctx.mesh_op.k_ff();
    for (int col = 0; col < kff.outerSize(); ++col)
      for (SparseMat<double>::InnerIterator it(kff, col); it; ++it)
        trip.emplace_back(lay.off_d() + free_to_dof[it.row()],
                          lay.off_d() + free_to_dof[col], it.value());
    const SparseMat<double>& kfb = ctx.mesh_op.k_fb();
    for (int col = 0; col < kfb.outerSize(); ++col) {
      const int node = g.solid_nodes[col / 2];
      const int dcol = 2 * node + col % 2;
      if (clamped_d[dcol]) continue;
      for (SparseMat<double>::InnerIterator it(kfb, col); it; ++it)
        trip.emplace_back(lay.off_d() + free_to_dof[it.row()],
                          lay.off_d() + dcol, it.value());
    }
  }

  // --- fluid block: converged Newton jacobian ---
  {
    std::vector<double> rf;
    SparseSystem<double> sys;
    assemble_fluid<double>(g, crd, rho_bar, m.fluid, ip, st.w, m.fmap, m.bc,
                           rf, &sys);
    for (const auto& t : sys.triplets)
      trip.emplace_back(lay.off_w() + t.row(), lay.off_w() + t.col(),
                        t.value());
    for (int i = 0; i < lay.n_w; ++i)
      if (m.bc.is_dirichlet[i]) jac.dirichlet[lay.off_w() + i] = 1;
  }

  // --- coupling blocks ---
  const double h = detail::kShapeStep;
  const std::vector<C> wc = scalar_cast<C>(st.w);
  detail::FluidElementInput<C> inc;
  std::array<C, detail::kFluidLocal> rc;
  std::array<int, detail::kFluidLocal> fdofs;
  std::array<std::array<double, 22>, 18> dfdw;
  Coords<C> crdc = coords_cast<C>(crd);

  for (int e = 0; e < g.n_elements(); ++e) {
    const Element& el = g.elements[e];
    for (int a = 0; a < 9; ++a) {
      fdofs[2 * a] = m.fmap.vel(el.q2[a], 0);
      fdofs[2 * a + 1] = m.fmap.vel(el.q2[a], 1);
    }
    for (int b = 0; b < 4; ++b) fdofs[18 + b] = m.fmap.pres(el.q1[b]);

    // dF/dd: complex step on each nodal coordinate of the element
    if (m.mesh_deformation) {
      const C alpha = C(brinkman_alpha(rho_bar[e], ip).first);
      detail::gather_fluid_element<C>(g, e, crdc, wc, m.fmap, alpha, inc);
      for (int a = 0; a < 9; ++a) {
        for (int comp = 0; comp < 2; ++comp) {
          const int dcol = 2 * el.q2[a] + comp;
          if (clamped_d[dcol]) continue;
          auto& coord = comp == 0 ? inc.x[a] : inc.y[a];
          const C saved = coord;
          coord = saved + C(0.0, h);
          detail::fluid_element_residual<C>(inc, m.fluid, rc, e);
          coord = saved;
          for (int i = 0; i < detail::kFluidLocal; ++i) {
            if (m.bc.is_dirichlet[fdofs[i]]) continue;
            const double v = rc[i].imag() / h;
            if (v != 0.0)
              trip.emplace_back(lay.off_w() + fdofs[i], lay.off_d() + dcol, v);
          }
        }
      }
    }

    if (!g.is_solid_element(e)) continue;
    const double upsilon = force_filter(rho_bar[e], ip).first;
    std::array<int, 18> udofs;
    for (int a = 0; a < 9; ++a)
      for (int c = 0; c < 2; ++c)
        udofs[2 * a + c] = m.smap.dof(el.q2[a], c);

    // dS/dw = -Upsilon * d(force)/dw (analytic; the force is linear in w)
    if (upsilon != 0.0) {
      fluid_force_element_jacobian_w(g, e, crd, m.fluid, dfdw);
      for (int i = 0; i < 18; ++i) {
        if (fixed_u[udofs[i]]) continue;
        for (int j = 0; j < detail::kFluidLocal; ++j) {
          if (m.bc.is_dirichlet[fdofs[j]]) continue;
          const double v = -upsilon * dfdw[i][j];
          if (v != 0.0)
            trip.emplace_back(lay.off_u() + udofs[i], lay.off_w() + fdofs[j],
                              v);
        }
      }
    }

    // dS/dd = -Upsilon * d(force)/d(coords), complex step
    if (m.mesh_deformation && upsilon != 0.0) {
      std::array<C, 9> xc, yc;
      gather_element_coords<C>(g, crdc, e, xc, yc);
      std::array<C, 18> vc;
      std::array<C, 4> pc;
      for (int a = 0; a < 9; ++a) {
        vc[2 * a] = wc[m.fmap.vel(el.q2[a], 0)];
        vc[2 * a + 1] = wc[m.fmap.vel(el.q2[a], 1)];
      }
      for (int b = 0; b < 4; ++b) pc[b] = wc[m.fmap.pres(el.q1[b])];
      detail::FluidElementInput<C> fin{xc, yc, vc, pc, C(0)};
      std::array<std::array<C, 2>, QuadratureTables::nq> ds;
      std::array<MappedPoint<C>, QuadratureTables::nq> mpc;
      const QuadratureTables& t = quad_tables();
      for (int a = 0; a < 9; ++a) {
        for (int comp = 0; comp < 2; ++comp) {
          const int dcol = 2 * el.q2[a] + comp;
          if (clamped_d[dcol]) continue;
          auto& coord = comp == 0 ? fin.x[a] : fin.y[a];
          const C saved = coord;
          coord = saved + C(0.0, h);
          detail::stress_divergence_qp<C>(fin, m.fluid, ds, mpc, e);
          coord = saved;
          for (int i = 0; i < 18; ++i) {
            if (fixed_u[udofs[i]]) continue;
            C fi(0.0);
            const int an = i / 2, ic = i % 2;
            for (int q = 0; q < QuadratureTables::nq; ++q)
              fi += C(t.q2_n[q][an]) * mpc[q].jxw * ds[q][ic];
            const double v = -upsilon * fi.imag() / h;
            if (v != 0.0)
              trip.emplace_back(lay.off_u() + udofs[i], lay.off_d() + dcol, v);
          }
        }
      }
    }
  }

  jac.matrix.resize(lay.n_total(), lay.n_total());
  jac.matrix.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

// Adjoint unknowns, one block per residual field.
struct AdjointVector {
  std::vector<double> lam_u, lam_d, lam_w;
  double residual_rel = 0.0;
};

inline AdjointVector solve_adjoint(const CoupledJacobian& jac,
                                   const std::vector<double>& df_du) {
  const CoupledLayout& lay = jac.layout;
  std::vector<double> rhs(lay.n_total(), 0.0);
  for (int i = 0; i < lay.n_u; ++i)
    if (!jac.dirichlet[lay.off_u() + i]) rhs[lay.off_u() + i] = df_du[i];

  SparseMat<double> jt = jac.matrix.transpose();
  DirectSolver<double> solver;
  solver.factorize(jt);
  const std::vector<double> lam = solver.solve(rhs);

  DenseVec<double> lv = Eigen::Map<const DenseVec<double>>(lam.data(), lam.size());
  DenseVec<double> rv = Eigen::Map<const DenseVec<double>>(rhs.data(), rhs.size());
  const double rnorm = (jt * lv - rv).norm();
  AdjointVector out;
  out.residual_rel = rv.norm() > 0 ? rnorm / rv.norm() : rnorm;
  if (out.residual_rel > 1e-10)
    throw SolveError("adjoint solve residual " + std::to_string(out.residual_rel));
  out.lam_u.assign(lam.begin(), lam.begin() + lay.n_u);
  out.lam_d.assign(lam.begin() + lay.off_d(), lam.begin() + lay.off_d() + lay.n_d);
  out.lam_w.assign(lam.begin() + lay.off_w(), lam.end());
  return out;
}

// df/d(rho_bar) per design element for the compliance of one realization:
// explicit stiffness term minus the adjoint contraction with the residual's
// density derivatives (SIMP stiffness, force filter, Brinkman term).
inline std::vector<double> sensitivity_wrt_projected(
    PhysicsContext<double>& ctx, const CoupledState<double>& st,
    const AdjointVector& lam, std::span<const double> rho_bar,
    const InterpolationParams& ip) {
  const Model& m = *ctx.model;
  const StructuredGrid& g = m.grid;

  std::vector<char> fixed_u(m.smap.n_dofs(), 0);
  for (int node : g.struct_fixed)
    for (int c = 0; c < 2; ++c) fixed_u[m.smap.dof(node, c)] = 1;

  const std::vector<double> d_full = full_mesh_field(m, st);
  const Coords<double> crd = detail::system_coords(m, d_full);
  const QuadratureTables& t = quad_tables();

  std::vector<double> out(g.design_elements.size(), 0.0);
  for (std::size_t k = 0; k < g.design_elements.size(); ++k) {
    const int e = g.design_elements[k];
    const Element& el = g.elements[e];
    const double de = simp_modulus(rho_bar[e], ip).second;
    const double dups = force_filter(rho_bar[e], ip).second;
    const double dalpha = brinkman_alpha(rho_bar[e], ip).second;

    // stiffness terms: explicit compliance derivative and -lam_S . dK u
    const auto& ke = (*m.unit_k)[e];
    std::array<double, 18> ue, lse;
    for (int a = 0; a < 9; ++a)
      for (int c = 0; c < 2; ++c) {
        const int dof = m.smap.dof(el.q2[a], c);
        ue[2 * a + c] = st.u[dof];
        lse[2 * a + c] = fixed_u[dof] ? 0.0 : lam.lam_u[dof];
      }
    double uku = 0.0, lku = 0.0;
    for (int i = 0; i < 18; ++i) {
      double row = 0.0;
      for (int j = 0; j < 18; ++j) row += ke[i][j] * ue[j];
      uku += ue[i] * row;
      lku += lse[i] * row;
    }
    double value = de * uku - de * lku;

    // force-filter term: +lam_S . dUpsilon * unfiltered force
    const std::array<double, 18> fe =
        fluid_force_element<double>(g, e, crd, st.w, m.fmap, m.fluid);
    double lf = 0.0;
    for (int i = 0; i < 18; ++i) lf += lse[i] * fe[i];
    value += dups * lf;

    // Brinkman term: -lam_F . dalpha * int(v N)
    double lb = 0.0;
    {
      std::array<double, 9> x, y;
      gather_element_coords(g, crd, e, x, y);
      std::array<MappedPoint<double>, QuadratureTables::nq> mp;
      map_element<double>(x, y, false, mp, e);
      for (int q = 0; q < QuadratureTables::nq; ++q) {
        double v[2] = {0.0, 0.0};
        for (int c = 0; c < 9; ++c) {
          v[0] += st.w[m.fmap.vel(el.q2[c], 0)] * t.q2_n[q][c];
          v[1] += st.w[m.fmap.vel(el.q2[c], 1)] * t.q2_n[q][c];
        }
        for (int a = 0; a < 9; ++a) {
          for (int c = 0; c < 2; ++c) {
            const int dof = m.fmap.vel(el.q2[a], c);
            if (m.bc.is_dirichlet[dof]) continue;
            lb += lam.lam_w[dof] * t.q2_n[q][a] * mp[q].jxw * v[c];
          }
        }
      }
    }
    value -= dalpha * lb;
    out[k] = value;
  }
  return out;
}

// Pulls a d/d(rho_bar) field back through the projection and the filter
// transpose to the raw design variables.
inline std::vector<double> chain_to_raw(const std::vector<double>& d_rho_bar,
                                        const std::vector<double>& dproject,
                                        const DensityFilter& filter) {
  std::vector<double> d_tilde(d_rho_bar.size());
  for (std::size_t i = 0; i < d_rho_bar.size(); ++i)
    d_tilde[i] = d_rho_bar[i] * dproject[i];
  return filter.apply_transpose<double>(d_tilde);
}

// Compliance value and raw-design gradient for one projected realization at
// its converged state.
struct RealizationSensitivity {
  double compliance_value = 0.0;
  std::vector<double> d_raw;       // df/d(rho) over design elements
  std::vector<double> d_rho_bar;   // df/d(rho_bar), before the chain
};

inline RealizationSensitivity realization_sensitivity(
    PhysicsContext<double>& ctx, const CoupledState<double>& st,
    const RobustRealization<double>& realization, const DensityFilter& filter,
    const InterpolationParams& ip) {
  const Model& m = *ctx.model;
  const std::vector<double> field =
      element_density_field<double>(m.grid, realization.rho_bar);
  RealizationSensitivity out;
  out.compliance_value =
      compliance<double>(m.grid, m.smap, *m.unit_k, field, ip, st.u);
  const CoupledJacobian jac = assemble_coupled_jacobian(ctx, st, field, ip);
  const std::vector<double> dfdu = compliance_gradient_u(
      m.grid, m.smap, *m.unit_k, field, ip, st.u);
  const AdjointVector lam = solve_adjoint(jac, dfdu);
  out.d_rho_bar = sensitivity_wrt_projected(ctx, st, lam, field, ip);
  out.d_raw = chain_to_raw(out.d_rho_bar, realization.dproject, filter);
  return out;
}

// ---------------------------------------------------------------------------
// Complex-step verification oracle
// ---------------------------------------------------------------------------

struct VerificationRow {
  int element = 0;          // global element id
  double step = 0.0;        // signed imaginary step
  double imag_part = 0.0;   // Im f(rho + ih)
  double approx = 0.0;      // Im f / h
  double analytic = 0.0;    // adjoint value
  double normalized_error = 0.0;
  bool converged = true;
};

struct VerificationReport {
  std::vector<VerificationRow> rows;
  double compliance_value = 0.0;
};

// Runs the production pipeline over the complex scalar with a single design
// variable perturbed by ih, element by element, and compares Im f / h against
// the adjoint sensitivity of the nominal design's compliance.
inline VerificationReport verify_complex_step(
    const Model& model, std::span<const double> rho_raw,
    const ProjectionParams& pp, const InterpolationParams& ip,
    const CouplerConfig& coupler_cfg, std::span<const int> element_ids,
    double h) {
  using C = std::complex<double>;
  if (h == 0.0) throw ConfigError("complex step must be nonzero");
  const StructuredGrid& g = model.grid;
  DensityFilter filter(g, pp.radius);

  std::vector<int> design_index(g.n_elements(), -1);
  for (std::size_t k = 0; k < g.design_elements.size(); ++k)
    design_index[g.design_elements[k]] = static_cast<int>(k);

  // real baseline: nominal realization, converged state, adjoint gradient
  PhysicsContext<double> ctx(model);
  const RobustTriplet<double> trip = robust_triplet<double>(rho_raw, filter, pp);
  const std::vector<double> field =
      element_density_field<double>(g, trip.nominal.rho_bar);
  const StaggeredResult<double> base =
      staggered_solve<double>(ctx, field, ip, coupler_cfg);
  const RealizationSensitivity sens =
      realization_sensitivity(ctx, base.state, trip.nominal, filter, ip);

  VerificationReport report;
  report.compliance_value = sens.compliance_value;

  PhysicsContext<C> cctx(model);
  CoupledState<C> warm;
  warm.w = scalar_cast<C>(base.state.w);
  warm.u = scalar_cast<C>(base.state.u);
  warm.d = scalar_cast<C>(base.state.d);

  for (int eid : element_ids) {
    if (eid < 0 || eid >= g.n_elements() || design_index[eid] < 0)
      throw ConfigError("element " + std::to_string(eid) +
                        " is not a design element");
    VerificationRow row;
    row.element = eid;
    row.step = h;
    row.analytic = sens.d_raw[design_index[eid]];
    std::vector<C> rho_c = scalar_cast<C>(std::vector<double>(
        rho_raw.begin(), rho_raw.end()));
    rho_c[design_index[eid]] += C(0.0, h);
    try {
      const RobustTriplet<C> ctrip = robust_triplet<C>(rho_c, filter, pp);
      const std::vector<C> cfield =
          element_density_field<C>(g, ctrip.nominal.rho_bar);
      const StaggeredResult<C> sol =
          staggered_solve<C>(cctx, cfield, ip, coupler_cfg, &warm);
      const C f = compliance<C>(g, model.smap, *model.unit_k, cfield, ip,
                                sol.state.u);
      row.imag_part = f.imag();
      row.approx = f.imag() / h;
      row.normalized_error =
          row.analytic != 0.0 ? (row.approx - row.analytic) / row.analytic
                              : row.approx;
    } catch (const std::exception&) {
      row.converged = false;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace tofsi
