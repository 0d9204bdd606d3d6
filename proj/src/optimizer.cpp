#include "tofsi/optimizer.hpp"

#include <chrono>
#include <future>

namespace tofsi {

ContinuationState continuation_state(int iteration, double delta_e_upsilon) {
  if (iteration < 1) throw ConfigError("iteration index starts at 1");
  static constexpr int kUpdates[] = {21, 41, 61, 81};
  static constexpr double kBeta[] = {4, 8, 16, 32, 64};
  ContinuationState cs;
  for (int u : kUpdates)
    if (iteration >= u) ++cs.stage;
  cs.beta = kBeta[cs.stage];
  cs.p_e = 1.0 + 0.5 * cs.stage;
  cs.p_upsilon = 1.0 + (0.5 / delta_e_upsilon) * cs.stage;
  return cs;
}

double design_volume_fraction(const StructuredGrid& grid,
                              std::span<const double> rho_bar_design) {
  double v = 0.0, v0 = 0.0;
  for (std::size_t k = 0; k < grid.design_elements.size(); ++k) {
    const double ve = grid.element_area[grid.design_elements[k]];
    v += ve * rho_bar_design[k];
    v0 += ve;
  }
  if (v0 <= 0.0) throw ConfigError("empty design domain");
  return v / v0;
}

VolumeConstraint volume_constraint(const StructuredGrid& grid,
                                   const RobustRealization<double>& dilated,
                                   const DensityFilter& filter,
                                   double dilated_target) {
  VolumeConstraint out;
  double v0 = 0.0;
  for (int e : grid.design_elements) v0 += grid.element_area[e];
  std::vector<double> d_bar(grid.design_elements.size());
  double v = 0.0;
  for (std::size_t k = 0; k < grid.design_elements.size(); ++k) {
    const double ve = grid.element_area[grid.design_elements[k]];
    v += ve * dilated.rho_bar[k];
    d_bar[k] = ve / v0;
  }
  out.volume_fraction = v / v0;
  out.value = out.volume_fraction - dilated_target;
  out.d_raw = chain_to_raw(d_bar, dilated.dproject, filter);
  return out;
}

double rescale_dilated_target(double nominal_fraction, double dilated_fraction,
                              double nominal_target) {
  if (nominal_fraction <= 0.0)
    throw ConfigError("degenerate design: nominal volume is zero");
  return nominal_target * dilated_fraction / nominal_fraction;
}

std::vector<double> initial_design(const Model& model, double volume_fraction) {
  return std::vector<double>(model.grid.design_elements.size(),
                             volume_fraction);
}

namespace {

struct RealizationOutcome {
  StaggeredResult<double> solve;
  RealizationSensitivity sens;
};

RealizationOutcome run_realization(PhysicsContext<double>& ctx,
                                   const RobustRealization<double>& realization,
                                   const DensityFilter& filter,
                                   const InterpolationParams& ip,
                                   const CouplerConfig& coupler,
                                   const CoupledState<double>* warm) {
  const Model& m = *ctx.model;
  const std::vector<double> field =
      element_density_field<double>(m.grid, realization.rho_bar);
  RealizationOutcome out;
  out.solve = staggered_solve<double>(ctx, field, ip, coupler, warm);
  out.sens = realization_sensitivity(ctx, out.solve.state, realization, filter,
                                     ip);
  return out;
}

}  // namespace

OptimizationResult run_optimization(const RunConfig& cfg,
                                    const IterationCallback& callback) {
  cfg.validate();
  const Model model = build_model(cfg);
  const StructuredGrid& grid = model.grid;
  DensityFilter filter(grid, cfg.projection.radius);
  const int n = static_cast<int>(grid.design_elements.size());

  // one context and warm state per realization; reused across iterations
  std::array<std::unique_ptr<PhysicsContext<double>>, 3> ctxs;
  for (auto& c : ctxs) c = std::make_unique<PhysicsContext<double>>(model);
  std::array<std::unique_ptr<CoupledState<double>>, 3> warm;

  std::vector<double> rho = initial_design(model, cfg.volume_fraction);
  MmaSolver mma(n, 3, 1);
  double dilated_target = cfg.volume_fraction;

  OptimizationResult result;
  InterpolationParams ip = cfg.interpolation;
  ProjectionParams pp = cfg.projection;

  for (int it = 1; it <= cfg.iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const ContinuationState cs = continuation_state(it, ip.delta_e_upsilon);
    ip.p_e = cs.p_e;
    ip.p_upsilon = cs.p_upsilon;
    pp.beta = cs.beta;

    const RobustTriplet<double> trip = robust_triplet<double>(rho, filter, pp);
    const RobustRealization<double>* realizations[3] = {
        &trip.dilated, &trip.nominal, &trip.eroded};

    std::array<RealizationOutcome, 3> outcomes;
    try {
      std::array<std::future<RealizationOutcome>, 3> futures;
      for (int k = 0; k < 3; ++k)
        futures[k] = std::async(std::launch::async, run_realization,
                                std::ref(*ctxs[k]), std::ref(*realizations[k]),
                                std::ref(filter), std::ref(ip),
                                std::ref(cfg.coupler), warm[k].get());
      for (int k = 0; k < 3; ++k) outcomes[k] = futures[k].get();
    } catch (const std::exception& e) {
      result.abort_reason = "iteration " + std::to_string(it) + ": " + e.what();
      result.design.rho = rho;
      return result;
    }
    for (int k = 0; k < 3; ++k)
      warm[k] = std::make_unique<CoupledState<double>>(outcomes[k].solve.state);

    const double vol_nominal =
        design_volume_fraction(grid, trip.nominal.rho_bar);
    const double vol_dilated =
        design_volume_fraction(grid, trip.dilated.rho_bar);
    if (it % 2 == 0)
      dilated_target = rescale_dilated_target(vol_nominal, vol_dilated,
                                              cfg.volume_fraction);
    const VolumeConstraint vc =
        volume_constraint(grid, trip.dilated, filter, dilated_target);

    std::vector<double> rows = {
        outcomes[0].sens.compliance_value + cfg.mma.objective_offset,
        outcomes[1].sens.compliance_value + cfg.mma.objective_offset,
        outcomes[2].sens.compliance_value + cfg.mma.objective_offset,
        vc.value};
    std::vector<std::vector<double>> grads = {
        outcomes[0].sens.d_raw, outcomes[1].sens.d_raw, outcomes[2].sens.d_raw,
        vc.d_raw};
    const std::vector<double> rho_new = mma.update(rho, rows, grads, cfg.mma);

    IterationLog log;
    log.iteration = it;
    log.f_dilated = outcomes[0].sens.compliance_value;
    log.f_nominal = outcomes[1].sens.compliance_value;
    log.f_eroded = outcomes[2].sens.compliance_value;
    log.dm_percent = discreteness_measure(trip.nominal.rho_bar);
    log.volume_nominal = vol_nominal;
    log.dilated_target = dilated_target;
    log.beta = cs.beta;
    log.p_e = cs.p_e;
    log.p_upsilon = cs.p_upsilon;
    for (int j = 0; j < n; ++j)
      log.max_change = std::max(log.max_change, std::abs(rho_new[j] - rho[j]));
    for (int k = 0; k < 3; ++k)
      log.staggered_iterations += outcomes[k].solve.outer_iterations;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.history.rows.push_back(log);
    rho = rho_new;
    if (callback) callback(log, rho);
  }

  const ContinuationState cs =
      continuation_state(cfg.iterations, ip.delta_e_upsilon);
  pp.beta = cs.beta;
  const RobustTriplet<double> trip = robust_triplet<double>(rho, filter, pp);
  result.design.rho = rho;
  result.design.rho_tilde = trip.rho_tilde;
  result.design.dilated = trip.dilated.rho_bar;
  result.design.nominal = trip.nominal.rho_bar;
  result.design.eroded = trip.eroded.rho_bar;
  result.completed = true;
  return result;
}

AnalysisResult analyze_design(const RunConfig& cfg, const Model& model,
                              std::span<const double> rho_raw) {
  DensityFilter filter(model.grid, cfg.projection.radius);
  InterpolationParams ip = cfg.interpolation;
  ProjectionParams pp = cfg.projection;
  const ContinuationState cs = continuation_state(cfg.iterations,
                                                  ip.delta_e_upsilon);
  ip.p_e = cs.p_e;
  ip.p_upsilon = cs.p_upsilon;
  pp.beta = cs.beta;
  const RobustTriplet<double> trip = robust_triplet<double>(rho_raw, filter, pp);

  AnalysisResult out;
  out.rho_bar_nominal = element_density_field<double>(model.grid,
                                                      trip.nominal.rho_bar);
  PhysicsContext<double> ctx(model);
  StaggeredResult<double> sol =
      staggered_solve<double>(ctx, out.rho_bar_nominal, ip, cfg.coupler);
  out.compliance_nominal = compliance<double>(
      model.grid, model.smap, *model.unit_k, out.rho_bar_nominal, ip,
      sol.state.u);
  out.state = std::move(sol.state);
  out.trace = std::move(sol.trace);
  return out;
}

}  // namespace tofsi
