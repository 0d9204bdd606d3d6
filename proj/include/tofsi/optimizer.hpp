#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tofsi/adjoint.hpp"
#include "tofsi/config.hpp"

namespace tofsi {

// Continuation schedule: beta doubles and the penalization exponents grow at
// iterations {21, 41, 61, 81}; p_upsilon is scaled against p_e by the
// delta ratio.
struct ContinuationState {
  double beta = 4.0;
  double p_e = 1.0;
  double p_upsilon = 1.0;
  int stage = 0;
};

ContinuationState continuation_state(int iteration, double delta_e_upsilon);

// Volume constraint on the dilated realization: g = sum(V_e rho_d_e)/V0 -
// target over the design elements, with the gradient pulled back to the raw
// variables.
struct VolumeConstraint {
  double value = 0.0;
  double volume_fraction = 0.0;  // sum(V_e rho_d_e) / V0
  std::vector<double> d_raw;
};

VolumeConstraint volume_constraint(const StructuredGrid& grid,
                                   const RobustRealization<double>& dilated,
                                   const DensityFilter& filter,
                                   double dilated_target);

double design_volume_fraction(const StructuredGrid& grid,
                              std::span<const double> rho_bar_design);

// Dilated-target rescaling, applied every second iteration.
double rescale_dilated_target(double nominal_fraction, double dilated_fraction,
                              double nominal_target);

struct IterationLog {
  int iteration = 0;
  double f_dilated = 0, f_nominal = 0, f_eroded = 0;  // un-offset compliances
  double dm_percent = 0;
  double volume_nominal = 0;
  double dilated_target = 0;
  double beta = 0, p_e = 0, p_upsilon = 0;
  double max_change = 0;
  int staggered_iterations = 0;
  double wall_seconds = 0;
};

struct OptimizationHistory {
  std::vector<IterationLog> rows;
};

struct OptimizationResult {
  DesignField design;
  OptimizationHistory history;
  bool completed = false;
  std::string abort_reason;
};

// Called after each iteration with the log row and the current raw design.
using IterationCallback =
    std::function<void(const IterationLog&, const std::vector<double>&)>;

// The full robust optimization loop: continuation, the three projected
// realizations each solved and differentiated independently, the dilated
// volume constraint, and the min-max MMA update. A staggered failure aborts
// the run and returns the design snapshot with the failure attached.
OptimizationResult run_optimization(const RunConfig& cfg,
                                    const IterationCallback& callback = {});

// Single coupled analysis of a given raw design under the configuration's
// analysis mode; used by the analyze/cross-check workflows.
struct AnalysisResult {
  CoupledState<double> state;
  std::vector<OuterRecord> trace;
  double compliance_nominal = 0.0;
  std::vector<double> rho_bar_nominal;  // per element
};

AnalysisResult analyze_design(const RunConfig& cfg, const Model& model,
                              std::span<const double> rho_raw);

// The initial guess: the target volume fraction everywhere in the design
// domain.
std::vector<double> initial_design(const Model& model, double volume_fraction);

}  // namespace tofsi
