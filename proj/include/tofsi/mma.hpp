#pragma once

#include <span>
#include <vector>

#include "tofsi/errors.hpp"

namespace tofsi {

struct MmaSettings {
  double move_limit = 0.1;
  double objective_offset = 1.0;  // added to the min-max objective rows
  double asy_init = 0.5;
  double asy_decr = 0.7;
  double asy_incr = 1.2;
  double constraint_penalty = 1000.0;  // c_i, pushes slack variables to zero
  double dual_tol = 1e-9;

  void validate() const {
    if (move_limit <= 0 || move_limit > 1)
      throw ConfigError("move limit must be in (0,1]");
    if (objective_offset < 0) throw ConfigError("objective offset must be >= 0");
  }
};

// Method of moving asymptotes in its min-max form: minimize the largest of
// the objective rows subject to the constraint rows, box bounds [0,1] and the
// move limit. The separable subproblem is solved by a primal-dual interior
// point method to `dual_tol`.
class MmaSolver {
 public:
  // n variables; rows = n_objectives min-max rows followed by n_constraints
  // ordinary rows.
  MmaSolver(int n, int n_objectives, int n_constraints);

  // values/gradients: one entry per row (objectives first). Returns the
  // updated variables; maintains asymptote history across calls.
  std::vector<double> update(std::span<const double> x,
                             std::span<const double> row_values,
                             const std::vector<std::vector<double>>& row_grads,
                             const MmaSettings& settings);

  int iteration() const { return iter_; }
  const std::vector<double>& low() const { return low_; }
  const std::vector<double>& upp() const { return upp_; }

 private:
  int n_ = 0, n_obj_ = 0, n_con_ = 0;
  int iter_ = 0;
  std::vector<double> low_, upp_, xold1_, xold2_;
};

// Brute-force reference for tests: minimizes the same separable MMA
// approximation on a coordinate grid, with the inner (y, z) minimization done
// exactly. Only sensible for one or two variables.
struct MmaSubproblem {
  // per-variable approximation data
  std::vector<double> low, upp, alfa, beta;
  std::vector<std::vector<double>> p, q;  // [row][var]
  std::vector<double> b;                  // row right-hand sides
  std::vector<double> a, c, d;            // row parameters
  double a0 = 1.0;

  double row_value(int row, std::span<const double> x) const;
  double outer_cost(std::span<const double> x) const;
};

// Builds the subproblem exactly as MmaSolver::update does (same asymptotes
// and bounds) without advancing the solver state.
MmaSubproblem build_mma_subproblem(const MmaSolver& solver, int iter,
                                   int n_objectives,
                                   std::span<const double> x,
                                   std::span<const double> xold1,
                                   std::span<const double> xold2,
                                   std::span<const double> row_values,
                                   const std::vector<std::vector<double>>& row_grads,
                                   const MmaSettings& settings);

}  // namespace tofsi
