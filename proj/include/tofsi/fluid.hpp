#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tofsi/grid.hpp"
#include "tofsi/material.hpp"
#include "tofsi/sparse.hpp"

namespace tofsi {

struct FluidProperties {
  double rho_f = 1.0;  // kg/m^3
  double mu = 1.0;     // Pa s
  double v_max = 1.0;  // m/s, peak of the parabolic inlet profile

  void validate() const {
    if (rho_f <= 0 || mu <= 0 || v_max < 0)
      throw ConfigError("fluid properties must be positive");
  }
};

// Unknown layout for the mixed Q2Q1 system: two velocity components per Q2
// node, then one pressure per Q1 node.
struct FluidDofMap {
  int n_q2 = 0, n_q1 = 0;
  explicit FluidDofMap(const StructuredGrid& g)
      : n_q2(g.n_q2_nodes()), n_q1(g.n_q1_nodes()) {}
  FluidDofMap() = default;
  int vel(int node, int comp) const { return 2 * node + comp; }
  int pres(int q1_node) const { return 2 * n_q2 + q1_node; }
  int n_dofs() const { return 2 * n_q2 + n_q1; }
};

// Strong (node-wise) boundary conditions: parabolic inlet, no-slip walls,
// zero outlet pressure. Nodes shared by the inlet and a wall take the
// no-slip value.
struct FluidBC {
  std::vector<char> is_dirichlet;  // per fluid dof
  std::vector<double> value;       // prescribed value per fluid dof
  double scale = 0.0;              // l2 norm of prescribed values

  template <class S>
  void apply(std::vector<S>& w) const {
    for (std::size_t i = 0; i < is_dirichlet.size(); ++i)
      if (is_dirichlet[i]) w[i] = S(value[i]);
  }
};

inline FluidBC build_fluid_bc(const StructuredGrid& g, const FluidDofMap& map,
                              const FluidProperties& props) {
  FluidBC bc;
  bc.is_dirichlet.assign(map.n_dofs(), 0);
  bc.value.assign(map.n_dofs(), 0.0);
  const double y0 = g.y_lines.front(), y1 = g.y_lines.back();
  const double h = y1 - y0;
  for (int node : g.inlet) {
    const double y = g.q2_y[node];
    const double vx = props.v_max * 4.0 * (y - y0) * (y1 - y) / (h * h);
    bc.is_dirichlet[map.vel(node, 0)] = 1;
    bc.value[map.vel(node, 0)] = vx;
    bc.is_dirichlet[map.vel(node, 1)] = 1;
  }
  for (int node : g.walls) {
    bc.is_dirichlet[map.vel(node, 0)] = 1;
    bc.value[map.vel(node, 0)] = 0.0;
    bc.is_dirichlet[map.vel(node, 1)] = 1;
    bc.value[map.vel(node, 1)] = 0.0;
  }
  // Outlet pressure nodes live on the last Q1 column.
  const int nx = g.nx(), ny = g.ny();
  for (int j = 0; j <= ny; ++j)
    bc.is_dirichlet[map.pres(nx + (nx + 1) * j)] = 1;
  double s = 0.0;
  for (std::size_t i = 0; i < bc.value.size(); ++i)
    if (bc.is_dirichlet[i]) s += bc.value[i] * bc.value[i];
  bc.scale = std::sqrt(s);
  return bc;
}

namespace detail {

// Local dof order inside one element: 18 velocities (x,y per Q2 node) then 4
// pressures.
constexpr int kFluidLocal = 22;

template <class S>
struct FluidElementInput {
  std::array<S, 9> x, y;
  std::array<S, 18> v;
  std::array<S, 4> p;
  S alpha;
};

template <class S>
void gather_fluid_element(const StructuredGrid& g, int e, const Coords<S>& c,
                          std::span<const S> w, const FluidDofMap& map,
                          S alpha, FluidElementInput<S>& in) {
  const Element& el = g.elements[e];
  for (int a = 0; a < 9; ++a) {
    in.x[a] = c.x[el.q2[a]];
    in.y[a] = c.y[el.q2[a]];
    in.v[2 * a] = w[map.vel(el.q2[a], 0)];
    in.v[2 * a + 1] = w[map.vel(el.q2[a], 1)];
  }
  for (int b = 0; b < 4; ++b) in.p[b] = w[map.pres(el.q1[b])];
  in.alpha = alpha;
}

// Galerkin residual of the Brinkman-penalized steady Navier-Stokes momentum
// (convective viscous form, so a fully developed outflow satisfies the
// natural boundary condition) plus the continuity equation.
template <class S>
void fluid_element_residual(const FluidElementInput<S>& in,
                            const FluidProperties& props,
                            std::array<S, kFluidLocal>& r, int element_id = -1) {
  const QuadratureTables& t = quad_tables();
  std::array<MappedPoint<S>, QuadratureTables::nq> mp;
  map_element<S>(in.x, in.y, false, mp, element_id);
  r.fill(S(0));
  for (int q = 0; q < QuadratureTables::nq; ++q) {
    const MappedPoint<S>& m = mp[q];
    S v[2] = {S(0), S(0)};
    S gv[2][2] = {{S(0), S(0)}, {S(0), S(0)}};
    for (int c = 0; c < 9; ++c) {
      const double n = t.q2_n[q][c];
      for (int i = 0; i < 2; ++i) {
        v[i] += in.v[2 * c + i] * n;
        gv[i][0] += in.v[2 * c + i] * m.dq2[c][0];
        gv[i][1] += in.v[2 * c + i] * m.dq2[c][1];
      }
    }
    S p = S(0);
    for (int b = 0; b < 4; ++b) p += in.p[b] * S(t.q1_n[q][b]);
    const S divv = gv[0][0] + gv[1][1];
    const S conv[2] = {S(props.rho_f) * (v[0] * gv[0][0] + v[1] * gv[0][1]),
                       S(props.rho_f) * (v[0] * gv[1][0] + v[1] * gv[1][1])};
    for (int a = 0; a < 9; ++a) {
      const double n = t.q2_n[q][a];
      for (int i = 0; i < 2; ++i) {
        S term = conv[i] * S(n) - p * m.dq2[a][i] + in.alpha * v[i] * S(n);
        term += S(props.mu) * (gv[i][0] * m.dq2[a][0] + gv[i][1] * m.dq2[a][1]);
        r[2 * a + i] += m.jxw * term;
      }
    }
    for (int b = 0; b < 4; ++b) r[18 + b] += m.jxw * S(t.q1_n[q][b]) * divv;
  }
}

// Residual plus its exact linearization w.r.t. the element unknowns.
template <class S>
void fluid_element_system(const FluidElementInput<S>& in,
                          const FluidProperties& props,
                          std::array<S, kFluidLocal>& r,
                          std::array<std::array<S, kFluidLocal>, kFluidLocal>& k,
                          int element_id = -1) {
  const QuadratureTables& t = quad_tables();
  std::array<MappedPoint<S>, QuadratureTables::nq> mp;
  map_element<S>(in.x, in.y, false, mp, element_id);
  r.fill(S(0));
  for (auto& row : k) row.fill(S(0));
  for (int q = 0; q < QuadratureTables::nq; ++q) {
    const MappedPoint<S>& m = mp[q];
    S v[2] = {S(0), S(0)};
    S gv[2][2] = {{S(0), S(0)}, {S(0), S(0)}};
    for (int c = 0; c < 9; ++c) {
      const double n = t.q2_n[q][c];
      for (int i = 0; i < 2; ++i) {
        v[i] += in.v[2 * c + i] * n;
        gv[i][0] += in.v[2 * c + i] * m.dq2[c][0];
        gv[i][1] += in.v[2 * c + i] * m.dq2[c][1];
      }
    }
    S p = S(0);
    for (int b = 0; b < 4; ++b) p += in.p[b] * S(t.q1_n[q][b]);
    const S divv = gv[0][0] + gv[1][1];
    const S conv[2] = {S(props.rho_f) * (v[0] * gv[0][0] + v[1] * gv[0][1]),
                       S(props.rho_f) * (v[0] * gv[1][0] + v[1] * gv[1][1])};
    std::array<S, 9> vdotgrad;  // (v . grad) N_c
    for (int c = 0; c < 9; ++c)
      vdotgrad[c] = v[0] * m.dq2[c][0] + v[1] * m.dq2[c][1];

    for (int a = 0; a < 9; ++a) {
      const S na = S(t.q2_n[q][a]) * m.jxw;
      for (int i = 0; i < 2; ++i) {
        S term = conv[i] * S(t.q2_n[q][a]) - p * m.dq2[a][i] +
                 in.alpha * v[i] * S(t.q2_n[q][a]);
        term += S(props.mu) * (gv[i][0] * m.dq2[a][0] + gv[i][1] * m.dq2[a][1]);
        r[2 * a + i] += m.jxw * term;

        for (int c = 0; c < 9; ++c) {
          const double nc = t.q2_n[q][c];
          const S grad_dot = m.dq2[a][0] * m.dq2[c][0] + m.dq2[a][1] * m.dq2[c][1];
          // same-component coupling: convection transport + viscosity + Brinkman
          k[2 * a + i][2 * c + i] +=
              na * (S(props.rho_f) * vdotgrad[c] + in.alpha * S(nc)) +
              m.jxw * S(props.mu) * grad_dot;
          // cross coupling from linearizing the advected field
          for (int kk = 0; kk < 2; ++kk)
            k[2 * a + i][2 * c + kk] += na * S(props.rho_f) * S(nc) * gv[i][kk];
        }
        for (int b = 0; b < 4; ++b)
          k[2 * a + i][18 + b] -= m.jxw * S(t.q1_n[q][b]) * m.dq2[a][i];
      }
    }
    for (int b = 0; b < 4; ++b) {
      r[18 + b] += m.jxw * S(t.q1_n[q][b]) * divv;
      for (int c = 0; c < 9; ++c)
        for (int kk = 0; kk < 2; ++kk)
          k[18 + b][2 * c + kk] +=
              m.jxw * S(t.q1_n[q][b]) * m.dq2[c][kk];
    }
  }
}

// Divergence of the total fluid stress, -grad p + mu (lapl v + grad div v),
// per quadrature point. Uses Q2 second derivatives, element-local (no
// inter-element smoothing).
template <class S>
void stress_divergence_qp(const FluidElementInput<S>& in,
                          const FluidProperties& props,
                          std::array<std::array<S, 2>, QuadratureTables::nq>& div_sigma,
                          std::array<MappedPoint<S>, QuadratureTables::nq>& mp,
                          int element_id = -1) {
  map_element<S>(in.x, in.y, true, mp, element_id);
  for (int q = 0; q < QuadratureTables::nq; ++q) {
    const MappedPoint<S>& m = mp[q];
    S out[2] = {S(0), S(0)};
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 2; ++i) out[i] -= in.p[b] * m.dq1[b][i];
    for (int c = 0; c < 9; ++c) {
      const S lap = m.d2q2[c][0] + m.d2q2[c][1];
      const S h[2][2] = {{m.d2q2[c][0], m.d2q2[c][2]},
                         {m.d2q2[c][2], m.d2q2[c][1]}};
      for (int i = 0; i < 2; ++i) {
        S s = lap * in.v[2 * c + i];
        s += h[i][0] * in.v[2 * c] + h[i][1] * in.v[2 * c + 1];
        out[i] += S(props.mu) * s;
      }
    }
    div_sigma[q] = {out[0], out[1]};
  }
}

}  // namespace detail

// Assembles the global fluid residual; when `sys` is non-null, also the exact
// Jacobian with Dirichlet rows replaced by the identity (columns into
// Dirichlet unknowns are dropped; their increments are identically zero).
template <class S>
void assemble_fluid(const StructuredGrid& g, const Coords<S>& coords,
                    std::span<const S> rho_bar_elements,
                    const FluidProperties& props, const InterpolationParams& ip,
                    std::span<const S> w, const FluidDofMap& map,
                    const FluidBC& bc, std::vector<S>& residual,
                    SparseSystem<S>* sys = nullptr) {
  residual.assign(map.n_dofs(), S(0));
  if (sys) {
    sys->resize(map.n_dofs());
    sys->triplets.reserve(static_cast<std::size_t>(g.n_elements()) * 484 +
                          map.n_dofs());
  }
  detail::FluidElementInput<S> in;
  std::array<S, detail::kFluidLocal> re;
  std::array<std::array<S, detail::kFluidLocal>, detail::kFluidLocal> ke;
  std::array<int, detail::kFluidLocal> dofs;
  for (int e = 0; e < g.n_elements(); ++e) {
    const S alpha = brinkman_alpha(rho_bar_elements[e], ip).first;
    detail::gather_fluid_element(g, e, coords, w, map, alpha, in);
    if (sys)
      detail::fluid_element_system(in, props, re, ke, e);
    else
      detail::fluid_element_residual(in, props, re, e);
    const Element& el = g.elements[e];
    for (int a = 0; a < 9; ++a) {
      dofs[2 * a] = map.vel(el.q2[a], 0);
      dofs[2 * a + 1] = map.vel(el.q2[a], 1);
    }
    for (int b = 0; b < 4; ++b) dofs[18 + b] = map.pres(el.q1[b]);
    for (int i = 0; i < detail::kFluidLocal; ++i) {
      if (bc.is_dirichlet[dofs[i]]) continue;
      residual[dofs[i]] += re[i];
      if (sys)
        for (int j = 0; j < detail::kFluidLocal; ++j)
          if (!bc.is_dirichlet[dofs[j]]) sys->add(dofs[i], dofs[j], ke[i][j]);
    }
  }
  for (int d = 0; d < map.n_dofs(); ++d) {
    if (!bc.is_dirichlet[d]) continue;
    residual[d] = w[d] - S(bc.value[d]);
    if (sys) sys->add(d, d, S(1));
  }
}

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  // Scale of the imaginary residual channel carried in from earlier solves of
  // the same run; a warm start can enter with its imaginary residual already
  // at the floor, where "relative to entry" is unsatisfiable.
  double im_scale_floor = 0.0;
};

struct NewtonResult {
  std::vector<double> residual_history;  // combined norms, includes entry
  std::vector<double> imag_history;
  int iterations = 0;
  SplitNorm final_norm;
};

// Undamped Newton-Raphson. Convergence is relative to the entry residual
// (with the prescribed-value norm as a floor) and absolute for zero-flow
// cases; in complex runs the imaginary component must independently converge
// against the largest imaginary residual seen, since it rides on a far
// smaller scale than the real part.
template <class S>
NewtonResult solve_newton(const StructuredGrid& g, const Coords<S>& coords,
                          std::span<const S> rho_bar_elements,
                          const FluidProperties& props,
                          const InterpolationParams& ip, const FluidDofMap& map,
                          const FluidBC& bc, std::vector<S>& w,
                          DirectSolver<S>& solver,
                          const NewtonOptions& opt = {}) {
  bc.apply(w);
  NewtonResult res;
  std::vector<S> r;
  SparseSystem<S> sys;
  assemble_fluid<S>(g, coords, rho_bar_elements, props, ip, w, map, bc, r);
  SplitNorm rn = split_norm<S>(r);
  const double ref_re = std::max(rn.re, bc.scale);
  double ref_im = std::max(rn.im, opt.im_scale_floor);
  auto converged = [&](const SplitNorm& n) {
    return n.re <= opt.tol * ref_re && n.im <= opt.tol * ref_im;
  };
  res.residual_history.push_back(rn.combined());
  res.imag_history.push_back(rn.im);
  while (!converged(rn)) {
    if (res.iterations >= opt.max_iter)
      throw ConvergenceError("fluid newton did not converge in " +
                                 std::to_string(opt.max_iter) + " iterations",
                             res.residual_history);
    assemble_fluid<S>(g, coords, rho_bar_elements, props, ip, w, map, bc, r,
                      &sys);
    solver.factorize(sys.matrix());
    for (S& v : r) v = -v;
    const std::vector<S> dw = solver.solve(r);
    for (int i = 0; i < map.n_dofs(); ++i) w[i] += dw[i];
    assemble_fluid<S>(g, coords, rho_bar_elements, props, ip, w, map, bc, r);
    rn = split_norm<S>(r);
    if (!std::isfinite(rn.re) || !std::isfinite(rn.im))
      throw ConvergenceError("fluid newton diverged (non-finite residual)",
                             res.residual_history);
    ref_im = std::max(ref_im, rn.im);
    res.residual_history.push_back(rn.combined());
    res.imag_history.push_back(rn.im);
    ++res.iterations;
  }
  res.final_norm = rn;
  return res;
}

// Total-stress divergence of the discrete fluid solution at the quadrature
// points of one element.
template <class S>
std::array<std::array<S, 2>, QuadratureTables::nq> stress_divergence(
    const StructuredGrid& g, int element, const Coords<S>& coords,
    std::span<const S> w, const FluidDofMap& map,
    const FluidProperties& props) {
  detail::FluidElementInput<S> in;
  detail::gather_fluid_element(g, element, coords, w, map, S(0), in);
  std::array<std::array<S, 2>, QuadratureTables::nq> out;
  std::array<MappedPoint<S>, QuadratureTables::nq> mp;
  detail::stress_divergence_qp(in, props, out, mp, element);
  return out;
}

}  // namespace tofsi
