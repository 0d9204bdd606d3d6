#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "tofsi/grid.hpp"
#include "tofsi/scalar.hpp"

namespace tofsi {

// Interpolation laws tying the design density to the physics: Brinkman
// inverse permeability alpha(rho), modified-SIMP elastic modulus E(rho), and
// the force coupling filter Upsilon(rho).
struct InterpolationParams {
  double alpha_max = 1e7;   // kg/(m^3 s); never stated in the source problem,
  double alpha_min = 0.0;   // validated by velocity-suppression checks
  double p_alpha = 18e-7;
  double e_max = 1e4;       // Pa
  double e_min = 1e-6;      // Pa
  double p_e = 1.0;
  double p_upsilon = 1.0;
  double delta_e_upsilon = 1.0;  // relative penalization ratio for p_upsilon

  void validate() const {
    if (!(alpha_max > alpha_min) || alpha_min < 0)
      throw ConfigError("require alpha_max > alpha_min >= 0");
    if (!(e_max > e_min) || !(e_min > 0))
      throw ConfigError("require e_max > e_min > 0");
    if (!(p_alpha > 0)) throw ConfigError("require p_alpha > 0");
    if (p_e < 1 || p_upsilon < 1)
      throw ConfigError("require p_e >= 1 and p_upsilon >= 1");
    if (!(delta_e_upsilon > 0)) throw ConfigError("require delta_e_upsilon > 0");
  }
};

struct ProjectionParams {
  double beta = 4.0;
  double eta_n = 0.50, eta_d = 0.49, eta_e = 0.51;
  double radius = 1.5;  // in multiples of the largest element edge

  void validate() const {
    if (!(eta_d < eta_n && eta_n < eta_e) || eta_d <= 0 || eta_e >= 1)
      throw ConfigError("require 0 < eta_d < eta_n < eta_e < 1");
    if (beta < 1) throw ConfigError("require beta >= 1");
    if (radius < 1) throw ConfigError("require filter radius >= 1 element");
  }
};

// value and d(value)/d(rho) pairs ------------------------------------------

template <class S>
std::pair<S, S> brinkman_alpha(S rho, const InterpolationParams& p) {
  const double q = p.p_alpha;
  const S s = S(1) - rho;
  const S den = s + S(q);
  // alpha_max + s (alpha_min - alpha_max)(1+q)/(s+q), rearranged so the
  // alpha_max-scale terms never cancel (q is tiny, alpha is O(alpha_max q)
  // away from rho = 1)
  const S value =
      (S(p.alpha_max * q) * rho + S(p.alpha_min * (1 + q)) * s) / den;
  const S deriv = S(p.alpha_max - p.alpha_min) * S((1 + q) * q) / (den * den);
  return {value, deriv};
}

template <class S>
std::pair<S, S> simp_modulus(S rho, const InterpolationParams& p) {
  using std::pow;
  const S value = S(p.e_min) + S(p.e_max - p.e_min) * pow(rho, S(p.p_e));
  const S deriv = S(p.e_max - p.e_min) * S(p.p_e) * pow(rho, S(p.p_e - 1.0));
  return {value, deriv};
}

template <class S>
std::pair<S, S> force_filter(S rho, const InterpolationParams& p) {
  using std::pow;
  return {pow(rho, S(p.p_upsilon)),
          S(p.p_upsilon) * pow(rho, S(p.p_upsilon - 1.0))};
}

// Smoothed Heaviside projection with threshold eta and sharpness beta.
template <class S>
std::pair<S, S> project(S rho_tilde, double beta, double eta) {
  using std::cosh;
  using std::tanh;
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  const S t = S(beta) * (rho_tilde - S(eta));
  const S value = (S(std::tanh(beta * eta)) + tanh(t)) / S(den);
  const S c = cosh(t);
  const S deriv = S(beta) / (c * c * S(den));
  return {value, deriv};
}

// Percentage of "grayness": 0 for a crisp 0/1 field, 100 for uniform 0.5.
double discreteness_measure(std::span<const double> rho_bar);

// Linear hat-kernel density filter over the design elements. Non-design
// densities are hard constraints and take no part in the averaging, so the
// column and the surrounding fluid never bleed into the design field.
class DensityFilter {
 public:
  DensityFilter() = default;
  DensityFilter(const StructuredGrid& grid, double relative_radius);

  int n() const { return static_cast<int>(rows_.size()); }
  double radius() const { return radius_; }

  // y = W x and y = W^T x over design-element vectors.
  template <class S>
  std::vector<S> apply(std::span<const S> x) const {
    std::vector<S> y(rows_.size(), S(0));
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [j, w] : rows_[i]) y[i] += S(w) * x[j];
    return y;
  }
  template <class S>
  std::vector<S> apply_transpose(std::span<const S> x) const {
    std::vector<S> y(rows_.size(), S(0));
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [j, w] : rows_[i]) y[j] += S(w) * x[i];
    return y;
  }

  double weight(int i, int j) const;  // normalized entry, for tests

 private:
  std::vector<std::vector<std::pair<int, double>>> rows_;
  double radius_ = 0.0;
};

// Raw design variables embedded in the full per-element field, with the
// filtered field and the three projected realizations.
struct DesignField {
  std::vector<double> rho;  // raw, one per design element
  std::vector<double> rho_tilde;
  std::vector<double> dilated, nominal, eroded;  // projected realizations
};

template <class S>
struct RobustRealization {
  std::vector<S> rho_bar;   // projected densities per design element
  std::vector<S> dproject;  // d(rho_bar)/d(rho_tilde) per design element
};

template <class S>
struct RobustTriplet {
  std::vector<S> rho_tilde;
  RobustRealization<S> dilated, nominal, eroded;
};

template <class S>
RobustRealization<S> project_field(std::span<const S> rho_tilde, double beta,
                                   double eta) {
  RobustRealization<S> r;
  r.rho_bar.resize(rho_tilde.size());
  r.dproject.resize(rho_tilde.size());
  for (std::size_t i = 0; i < rho_tilde.size(); ++i) {
    auto [v, d] = project(rho_tilde[i], beta, eta);
    r.rho_bar[i] = v;
    r.dproject[i] = d;
  }
  return r;
}

template <class S>
RobustTriplet<S> robust_triplet(std::span<const S> rho,
                                const DensityFilter& filter,
                                const ProjectionParams& pp) {
  RobustTriplet<S> t;
  t.rho_tilde = filter.apply(rho);
  t.dilated = project_field<S>(t.rho_tilde, pp.beta, pp.eta_d);
  t.nominal = project_field<S>(t.rho_tilde, pp.beta, pp.eta_n);
  t.eroded = project_field<S>(t.rho_tilde, pp.beta, pp.eta_e);
  return t;
}

// Scatters a design-element realization into the full per-element density
// field: 1 on solid non-design, 0 on fluid non-design.
template <class S>
std::vector<S> element_density_field(const StructuredGrid& g,
                                     std::span<const S> design_values) {
  std::vector<S> field(g.n_elements(), S(0));
  for (int e = 0; e < g.n_elements(); ++e)
    if (g.elements[e].tag == DomainTag::solid_nondesign) field[e] = S(1);
  for (std::size_t k = 0; k < g.design_elements.size(); ++k)
    field[g.design_elements[k]] = design_values[k];
  return field;
}

}  // namespace tofsi
