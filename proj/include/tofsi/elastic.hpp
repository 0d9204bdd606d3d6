#pragma once

#include <memory>
#include <vector>

#include "tofsi/fluid.hpp"
#include "tofsi/grid.hpp"
#include "tofsi/material.hpp"
#include "tofsi/sparse.hpp"

namespace tofsi {

struct SolidProperties {
  double nu = 0.3;
  double mesh_modulus = 1.0;  // pseudo-structure scaling only
  double nu_mesh = 0.3;

  void validate() const {
    if (nu <= -1.0 || nu >= 0.5)
      throw ConfigError("plane strain requires -1 < nu < 0.5");
    if (nu_mesh <= -1.0 || nu_mesh >= 0.5)
      throw ConfigError("plane strain requires -1 < nu_mesh < 0.5");
    if (mesh_modulus <= 0) throw ConfigError("mesh modulus must be positive");
  }
};

// Displacement unknowns on the solid computational domain (design plus solid
// non-design elements), two per node. Owns its index data so it stays valid
// when the surrounding model moves.
struct StructDofMap {
  std::vector<int> node_to_solid;
  std::vector<int> solid_nodes;
  explicit StructDofMap(const StructuredGrid& g)
      : node_to_solid(g.node_to_solid), solid_nodes(g.solid_nodes) {}
  StructDofMap() = default;
  int dof(int node, int comp) const { return 2 * node_to_solid[node] + comp; }
  int n_dofs() const { return 2 * static_cast<int>(solid_nodes.size()); }
};

namespace detail {

// Plane-strain Q2 element stiffness for a given modulus, on the coordinates
// provided (reference coordinates everywhere in this project).
template <class S>
void element_stiffness(std::span<const double> x, std::span<const double> y,
                       double nu, S modulus,
                       std::array<std::array<S, 18>, 18>& k, int element_id) {
  std::array<MappedPoint<double>, QuadratureTables::nq> mp;
  map_element<double>(x, y, false, mp, element_id);
  const double f = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const S c1 = modulus * S((1.0 - nu) * f);
  const S c2 = modulus * S(nu * f);
  const S c3 = modulus * S(0.5 * (1.0 - 2.0 * nu) * f);
  for (auto& row : k) row.fill(S(0));
  for (int q = 0; q < QuadratureTables::nq; ++q) {
    const MappedPoint<double>& m = mp[q];
    for (int a = 0; a < 9; ++a) {
      const double ax = m.dq2[a][0], ay = m.dq2[a][1];
      for (int c = 0; c < 9; ++c) {
        const double cx = m.dq2[c][0], cy = m.dq2[c][1];
        const S w = S(m.jxw);
        k[2 * a][2 * c] += w * (c1 * S(ax * cx) + c3 * S(ay * cy));
        k[2 * a][2 * c + 1] += w * (c2 * S(ax * cy) + c3 * S(ay * cx));
        k[2 * a + 1][2 * c] += w * (c2 * S(ay * cx) + c3 * S(ax * cy));
        k[2 * a + 1][2 * c + 1] += w * (c1 * S(ay * cy) + c3 * S(ax * cx));
      }
    }
  }
}

}  // namespace detail

// Unit-modulus element stiffness matrices on the reference configuration,
// shared by assembly, compliance, and the sensitivity contraction so there is
// a single constitutive code path.
class ElementStiffnessCache {
 public:
  ElementStiffnessCache(const StructuredGrid& g, double nu) {
    k_.resize(g.n_elements());
    std::array<double, 9> x, y;
    const Coords<double> ref = g.reference_coords();
    for (int e = 0; e < g.n_elements(); ++e) {
      if (!g.is_solid_element(e)) continue;
      gather_element_coords(g, ref, e, x, y);
      k_[e] = std::make_unique<std::array<std::array<double, 18>, 18>>();
      detail::element_stiffness<double>(x, y, nu, 1.0, *k_[e], e);
    }
  }
  const std::array<std::array<double, 18>, 18>& operator[](int e) const {
    return *k_[e];
  }

 private:
  std::vector<std::unique_ptr<std::array<std::array<double, 18>, 18>>> k_;
};

// Structural operator K(rho_bar) with the grounded-bottom constraint applied:
// identity rows on fixed dofs, columns dropped (the prescribed value is zero).
template <class S>
class StructureOperator {
 public:
  StructureOperator(const StructuredGrid& g, const StructDofMap& map,
                    const ElementStiffnessCache& unit_k,
                    std::span<const S> rho_bar_elements,
                    const InterpolationParams& ip)
      : grid_(&g), map_(map) {
    const int n = map.n_dofs();
    fixed_.assign(n, 0);
    for (int node : g.struct_fixed)
      for (int c = 0; c < 2; ++c) fixed_[map.dof(node, c)] = 1;
    SparseSystem<S> sys(n);
    sys.triplets.reserve(static_cast<std::size_t>(g.n_elements()) * 324 + n);
    std::array<int, 18> dofs;
    for (int e = 0; e < g.n_elements(); ++e) {
      if (!g.is_solid_element(e)) continue;
      const S mod = simp_modulus(rho_bar_elements[e], ip).first;
      const auto& ke = unit_k[e];
      for (int a = 0; a < 9; ++a)
        for (int c = 0; c < 2; ++c)
          dofs[2 * a + c] = map.dof(g.elements[e].q2[a], c);
      for (int i = 0; i < 18; ++i) {
        if (fixed_[dofs[i]]) continue;
        for (int j = 0; j < 18; ++j)
          if (!fixed_[dofs[j]])
            sys.add(dofs[i], dofs[j], mod * S(ke[i][j]));
      }
    }
    for (int i = 0; i < n; ++i)
      if (fixed_[i]) sys.add(i, i, S(1));
    matrix_ = sys.matrix();
  }

  // K u = f with zero displacement on the grounded boundary. Entries of f at
  // fixed dofs are ignored. Factorizes on first use.
  std::vector<S> solve(std::vector<S> f) const {
    if (!factorized_) {
      solver_.factorize(matrix_);
      factorized_ = true;
    }
    for (int i = 0; i < static_cast<int>(f.size()); ++i)
      if (fixed_[i]) f[i] = S(0);
    return solver_.solve(f);
  }

  // K u (constrained operator) for residual evaluation.
  std::vector<S> apply(const std::vector<S>& u) const {
    DenseVec<S> x = Eigen::Map<const DenseVec<S>>(u.data(), u.size());
    DenseVec<S> y = matrix_ * x;
    std::vector<S> out(y.data(), y.data() + y.size());
    for (int i = 0; i < static_cast<int>(out.size()); ++i)
      if (fixed_[i]) out[i] = u[i];  // constraint residual u - 0
    return out;
  }

  const SparseMat<S>& matrix() const { return matrix_; }
  const std::vector<char>& fixed() const { return fixed_; }

 private:
  const StructuredGrid* grid_;
  StructDofMap map_;
  std::vector<char> fixed_;
  SparseMat<S> matrix_;
  mutable DirectSolver<S> solver_;
  mutable bool factorized_ = false;
};

// Pseudo-elastic mesh motion on the fluid non-design domain. Free unknowns
// are interior mesh nodes; the wet interface carries the structural
// displacement and the outer boundary is clamped. The operator is constant
// per grid, so it is factorized exactly once.
template <class S>
class MeshMotionOperator {
 public:
  MeshMotionOperator(const StructuredGrid& g, const StructDofMap& smap,
                     const SolidProperties& props)
      : grid_(&g), smap_(smap) {
    const int nn = g.n_q2_nodes();
    free_index_.assign(2 * nn, -1);
    std::vector<char> in_mesh(nn, 0);
    for (int e = 0; e < g.n_elements(); ++e) {
      if (g.is_solid_element(e)) continue;
      for (int a = 0; a < 9; ++a) in_mesh[g.elements[e].q2[a]] = 1;
    }
    for (int node = 0; node < nn; ++node) {
      if (!in_mesh[node] || g.is_outer_boundary[node] || g.is_solid_node[node])
        continue;
      for (int c = 0; c < 2; ++c) {
        free_index_[2 * node + c] = n_free_;
        ++n_free_;
      }
    }

    std::vector<Eigen::Triplet<double>> kff, kfb;
    std::array<double, 9> x, y;
    std::array<std::array<double, 18>, 18> ke;
    const Coords<double> ref = g.reference_coords();
    for (int e = 0; e < g.n_elements(); ++e) {
      if (g.is_solid_element(e)) continue;
      gather_element_coords(g, ref, e, x, y);
      detail::element_stiffness<double>(x, y, props.nu_mesh, props.mesh_modulus,
                                        ke, e);
      const auto& q2 = g.elements[e].q2;
      for (int a = 0; a < 9; ++a) {
        for (int ca = 0; ca < 2; ++ca) {
          const int row = free_index_[2 * q2[a] + ca];
          if (row < 0) continue;
          for (int b = 0; b < 9; ++b) {
            for (int cb = 0; cb < 2; ++cb) {
              const int col_free = free_index_[2 * q2[b] + cb];
              const double v = ke[2 * a + ca][2 * b + cb];
              if (col_free >= 0) {
                kff.emplace_back(row, col_free, v);
              } else if (g.is_wet_node[q2[b]] && !g.is_outer_boundary[q2[b]]) {
                kfb.emplace_back(row, smap.dof(q2[b], cb), v);
              }
              // clamped outer-boundary columns carry zero displacement
            }
          }
        }
      }
    }
    k_ff_.resize(n_free_, n_free_);
    k_ff_.setFromTriplets(kff.begin(), kff.end());
    k_fb_.resize(n_free_, smap.n_dofs());
    k_fb_.setFromTriplets(kfb.begin(), kfb.end());
    if constexpr (is_complex_v<S>)
      solver_.factorize(SparseMat<S>(k_ff_.cast<S>()));
    else
      solver_.factorize(k_ff_);
  }

  // Solves for the mesh displacement given the structural displacement and
  // returns a full per-node field (2 entries per Q2 node); entries on solid
  // interior nodes are zero.
  std::vector<S> solve(const std::vector<S>& u) const {
    std::vector<S> rhs(n_free_, S(0));
    multiply_kfb(u, rhs);
    for (S& v : rhs) v = -v;
    const std::vector<S> d_free = n_free_ > 0 ? solver_.solve(rhs)
                                              : std::vector<S>{};
    std::vector<S> d(free_index_.size(), S(0));
    for (std::size_t i = 0; i < free_index_.size(); ++i)
      if (free_index_[i] >= 0) d[i] = d_free[free_index_[i]];
    for (int node : grid_->wet_interface) {
      if (grid_->is_outer_boundary[node]) continue;
      d[2 * node] = u[smap_.dof(node, 0)];
      d[2 * node + 1] = u[smap_.dof(node, 1)];
    }
    return d;
  }

  // Equilibrium residual rows evaluated on the full mesh field; boundary
  // columns carry zero displacement by construction.
  std::vector<S> equilibrium_residual_full(const std::vector<S>& d_full) const {
    std::vector<S> u_like(smap_.n_dofs(), S(0));
    for (int s = 0; s < smap_.n_dofs(); ++s) {
      const int node = smap_.solid_nodes[s / 2];
      u_like[s] = d_full[2 * node + (s % 2)];
    }
    std::vector<S> d(free_index_.size(), S(0));
    for (std::size_t i = 0; i < free_index_.size(); ++i)
      if (free_index_[i] >= 0) d[i] = d_full[i];
    return equilibrium_residual(d, u_like);
  }

  // Equilibrium residual K d (free rows only), for the convergence monitor.
  std::vector<S> equilibrium_residual(const std::vector<S>& d,
                                      const std::vector<S>& u) const {
    std::vector<S> r(n_free_, S(0));
    multiply_kfb(u, r);
    DenseVec<S> df(n_free_);
    for (std::size_t i = 0; i < free_index_.size(); ++i)
      if (free_index_[i] >= 0) df[free_index_[i]] = d[i];
    if (n_free_ > 0) {
      DenseVec<S> kd;
      if constexpr (is_complex_v<S>)
        kd = SparseMat<S>(k_ff_.cast<S>()) * df;
      else
        kd = k_ff_ * df;
      for (int i = 0; i < n_free_; ++i) r[i] += kd[i];
    }
    return r;
  }

  int n_free() const { return n_free_; }
  const std::vector<int>& free_index() const { return free_index_; }
  const SparseMat<double>& k_ff() const { return k_ff_; }
  const SparseMat<double>& k_fb() const { return k_fb_; }

 private:
  void multiply_kfb(const std::vector<S>& u, std::vector<S>& out) const {
    for (int col = 0; col < k_fb_.outerSize(); ++col)
      for (SparseMat<double>::InnerIterator it(k_fb_, col); it; ++it)
        out[it.row()] += S(it.value()) * u[col];
  }

  const StructuredGrid* grid_;
  StructDofMap smap_;
  std::vector<int> free_index_;  // 2*node+comp -> free index or -1
  int n_free_ = 0;
  SparseMat<double> k_ff_, k_fb_;
  DirectSolver<S> solver_;
};

// Per-element fluid force before the coupling filter: integral of N^T times
// the total-stress divergence over the element, on the supplied (deformed)
// coordinates.
template <class S>
std::array<S, 18> fluid_force_element(const StructuredGrid& g, int e,
                                      const Coords<S>& coords,
                                      std::span<const S> w,
                                      const FluidDofMap& fmap,
                                      const FluidProperties& props) {
  detail::FluidElementInput<S> in;
  detail::gather_fluid_element(g, e, coords, w, fmap, S(0), in);
  std::array<std::array<S, 2>, QuadratureTables::nq> ds;
  std::array<MappedPoint<S>, QuadratureTables::nq> mp;
  detail::stress_divergence_qp(in, props, ds, mp, e);
  const QuadratureTables& t = quad_tables();
  std::array<S, 18> f;
  f.fill(S(0));
  for (int q = 0; q < QuadratureTables::nq; ++q)
    for (int a = 0; a < 9; ++a) {
      const S najw = S(t.q2_n[q][a]) * mp[q].jxw;
      f[2 * a] += najw * ds[q][0];
      f[2 * a + 1] += najw * ds[q][1];
    }
  return f;
}

// Exact linearization of the unfiltered element fluid force w.r.t. the
// element fluid unknowns (18 velocities, 4 pressures); the stress divergence
// is linear in the fluid state.
inline void fluid_force_element_jacobian_w(
    const StructuredGrid& g, int e, const Coords<double>& coords,
    const FluidProperties& props,
    std::array<std::array<double, 22>, 18>& dfdw) {
  std::array<double, 9> x, y;
  gather_element_coords(g, coords, e, x, y);
  std::array<MappedPoint<double>, QuadratureTables::nq> mp;
  map_element<double>(x, y, true, mp, e);
  const QuadratureTables& t = quad_tables();
  for (auto& row : dfdw) row.fill(0.0);
  for (int q = 0; q < QuadratureTables::nq; ++q) {
    const MappedPoint<double>& m = mp[q];
    for (int a = 0; a < 9; ++a) {
      const double najw = t.q2_n[q][a] * m.jxw;
      for (int c = 0; c < 9; ++c) {
        const double lap = m.d2q2[c][0] + m.d2q2[c][1];
        const double h[2][2] = {{m.d2q2[c][0], m.d2q2[c][2]},
                                {m.d2q2[c][2], m.d2q2[c][1]}};
        for (int i = 0; i < 2; ++i)
          for (int k = 0; k < 2; ++k)
            dfdw[2 * a + i][2 * c + k] +=
                najw * props.mu * ((i == k ? lap : 0.0) + h[i][k]);
      }
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 2; ++i)
          dfdw[2 * a + i][18 + b] -= najw * m.dq1[b][i];
    }
  }
}

// Assembled structural load: per-element fluid force scaled by the force
// coupling filter Upsilon(rho_bar).
template <class S>
std::vector<S> couple_fluid_force(const StructuredGrid& g,
                                  const Coords<S>& coords, std::span<const S> w,
                                  std::span<const S> rho_bar_elements,
                                  const FluidProperties& props,
                                  const InterpolationParams& ip,
                                  const FluidDofMap& fmap,
                                  const StructDofMap& smap) {
  std::vector<S> f(smap.n_dofs(), S(0));
  for (int e = 0; e < g.n_elements(); ++e) {
    if (!g.is_solid_element(e)) continue;
    const S upsilon = force_filter(rho_bar_elements[e], ip).first;
    if (magnitude(upsilon) == 0.0) continue;
    const std::array<S, 18> fe =
        fluid_force_element(g, e, coords, w, fmap, props);
    for (int a = 0; a < 9; ++a)
      for (int c = 0; c < 2; ++c)
        f[smap.dof(g.elements[e].q2[a], c)] += upsilon * fe[2 * a + c];
  }
  return f;
}

// Structural compliance over the solid computational domain, with the same
// interpolated element stiffness used in assembly.
template <class S>
S compliance(const StructuredGrid& g, const StructDofMap& smap,
             const ElementStiffnessCache& unit_k,
             std::span<const S> rho_bar_elements,
             const InterpolationParams& ip, const std::vector<S>& u) {
  S total = S(0);
  std::array<S, 18> ue;
  for (int e = 0; e < g.n_elements(); ++e) {
    if (!g.is_solid_element(e)) continue;
    const S mod = simp_modulus(rho_bar_elements[e], ip).first;
    const auto& ke = unit_k[e];
    for (int a = 0; a < 9; ++a)
      for (int c = 0; c < 2; ++c)
        ue[2 * a + c] = u[smap.dof(g.elements[e].q2[a], c)];
    S quad = S(0);
    for (int i = 0; i < 18; ++i) {
      S row = S(0);
      for (int j = 0; j < 18; ++j) row += S(ke[i][j]) * ue[j];
      quad += ue[i] * row;
    }
    total += mod * quad;
  }
  return total;
}

// d(compliance)/du = 2 K u, assembled without boundary row replacement.
inline std::vector<double> compliance_gradient_u(
    const StructuredGrid& g, const StructDofMap& smap,
    const ElementStiffnessCache& unit_k,
    std::span<const double> rho_bar_elements, const InterpolationParams& ip,
    const std::vector<double>& u) {
  std::vector<double> grad(smap.n_dofs(), 0.0);
  std::array<double, 18> ue;
  for (int e = 0; e < g.n_elements(); ++e) {
    if (!g.is_solid_element(e)) continue;
    const double mod = simp_modulus(rho_bar_elements[e], ip).first;
    const auto& ke = unit_k[e];
    std::array<int, 18> dofs;
    for (int a = 0; a < 9; ++a)
      for (int c = 0; c < 2; ++c) {
        dofs[2 * a + c] = smap.dof(g.elements[e].q2[a], c);
        ue[2 * a + c] = u[dofs[2 * a + c]];
      }
    for (int i = 0; i < 18; ++i) {
      double row = 0.0;
      for (int j = 0; j < 18; ++j) row += ke[i][j] * ue[j];
      grad[dofs[i]] += 2.0 * mod * row;
    }
  }
  return grad;
}

}  // namespace tofsi
