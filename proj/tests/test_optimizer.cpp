#include <doctest.h>

#include "test_helpers.hpp"
#include "tofsi/optimizer.hpp"

using namespace tofsi;

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("continuation schedule values") {
  auto cs = continuation_state(1, 1.0);
  CHECK(cs.beta == 4.0);
  CHECK(cs.p_e == 1.0);
  CHECK(cs.p_upsilon == 1.0);

  cs = continuation_state(20, 1.0);
  CHECK(cs.beta == 4.0);
  cs = continuation_state(21, 1.0);
  CHECK(cs.beta == 8.0);
  CHECK(cs.p_e == 1.5);
  CHECK(cs.p_upsilon == 1.5);

  cs = continuation_state(81, 1.0 / 1.25);
  CHECK(cs.beta == 64.0);
  CHECK(cs.p_e == 3.0);
  CHECK(cs.p_upsilon == doctest::Approx(3.5));

  // with delta = 1 both exponents follow the same trajectory
  double prev_beta = 0;
  for (int it = 1; it <= 100; ++it) {
    cs = continuation_state(it, 1.0);
    CHECK(cs.p_e == cs.p_upsilon);
    CHECK(cs.beta >= prev_beta);
    prev_beta = cs.beta;
  }
}

TEST_CASE("mma: move limit, descent direction, brute-force subproblem") {
  MmaSettings st;
  {
    const int n = 16;
    MmaSolver mma(n, 3, 1);
    std::vector<double> x(n, 0.5);
    std::vector<double> rows = {1.2, 1.1, 1.3, -0.05};
    std::vector<std::vector<double>> grads(4, std::vector<double>(n));
    for (int j = 0; j < n; ++j) {
      grads[0][j] = -0.8 - 0.01 * j;
      grads[1][j] = -0.7;
      grads[2][j] = -0.9 + 0.02 * j;
      grads[3][j] = 0.05;
    }
    const auto xn = mma.update(x, rows, grads, st);
    double dmax = 0;
    for (int j = 0; j < n; ++j) {
      CHECK(xn[j] >= 0.0);
      CHECK(xn[j] <= 1.0);
      dmax = std::max(dmax, std::abs(xn[j] - x[j]));
    }
    CHECK(dmax <= st.move_limit + 1e-12);
    CHECK(dmax > 0.05);  // the offset objectives keep the update aggressive
  }
  {
    // single variable, inactive constraint, negative sensitivity
    MmaSolver mma(1, 1, 1);
    std::vector<double> x = {0.4};
    std::vector<double> rows = {2.0, -1.0};
    std::vector<std::vector<double>> grads = {{-5.0}, {0.0}};
    const auto xn = mma.update(x, rows, grads, st);
    CHECK(xn[0] == doctest::Approx(0.5).epsilon(1e-6));
  }
  {
    // two variables against a grid search of the same approximation
    MmaSolver mma(2, 1, 1);
    std::vector<double> x = {0.45, 0.62};
    std::vector<double> rows = {1.3, 0.05};
    std::vector<std::vector<double>> grads = {{-3.0, 1.2}, {0.5, 0.5}};
    const auto sub = build_mma_subproblem(mma, 1, 1, x, x, x, rows, grads, st);
    const auto xn = mma.update(x, rows, grads, st);
    double best = 1e300, b0 = 0, b1 = 0;
    for (double x0 = sub.alfa[0]; x0 <= sub.beta[0] + 1e-12; x0 += 1e-4)
      for (double x1 = sub.alfa[1]; x1 <= sub.beta[1] + 1e-12; x1 += 1e-4) {
        const double v = sub.outer_cost(std::array<double, 2>{x0, x1});
        if (v < best) {
          best = v;
          b0 = x0;
          b1 = x1;
        }
      }
    CHECK(std::abs(xn[0] - b0) < 1e-3);
    CHECK(std::abs(xn[1] - b1) < 1e-3);
  }
}

TEST_CASE("volume constraint values and rescaling") {
  Model model = Model::build(testing::miniature_geometry(), FluidProperties{},
                             SolidProperties{}, true);
  const int n = static_cast<int>(model.grid.design_elements.size());

  RobustRealization<double> uniform;
  uniform.rho_bar.assign(n, 0.1);
  uniform.dproject.assign(n, 1.0);
  DensityFilter filter(model.grid, 1.5);
  const VolumeConstraint g0 =
      volume_constraint(model.grid, uniform, filter, 0.1);
  CHECK(g0.value == doctest::Approx(0.0).epsilon(1e-14));

  uniform.rho_bar.assign(n, 1.0);
  const VolumeConstraint g1 =
      volume_constraint(model.grid, uniform, filter, 0.1);
  CHECK(g1.value == doctest::Approx(0.9).epsilon(1e-14));

  CHECK(rescale_dilated_target(0.1, 0.1, 0.1) == doctest::Approx(0.1));
  CHECK(rescale_dilated_target(0.1, 0.12, 0.1) == doctest::Approx(0.12));
  CHECK_THROWS_AS(rescale_dilated_target(0.0, 0.1, 0.1), ConfigError);
}

TEST_CASE("miniature optimization run respects the design invariants") {
  RunConfig cfg;
  cfg.geometry = testing::miniature_geometry();
  cfg.iterations = 6;
  cfg.snapshot_every = 0;
  cfg.coupler.tol = 1e-8;

  std::vector<double> prev;
  bool first = true;
  double observed_max_change = 0.0;
  const OptimizationResult res = run_optimization(
      cfg, [&](const IterationLog& log, const std::vector<double>& rho) {
        for (double v : rho) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
        if (!first) {
          double dmax = 0;
          for (std::size_t i = 0; i < rho.size(); ++i)
            dmax = std::max(dmax, std::abs(rho[i] - prev[i]));
          CHECK(dmax <= cfg.mma.move_limit + 1e-12);
        }
        CHECK(log.max_change <= cfg.mma.move_limit + 1e-12);
        observed_max_change = std::max(observed_max_change, log.max_change);
        prev = rho;
        first = false;
      });
  CHECK(res.completed);
  CHECK(res.history.rows.size() == 6);
  CHECK(observed_max_change > 0.0);
  // dilated target was rescaled on even iterations
  const auto& rows = res.history.rows;
  CHECK(rows[1].dilated_target != doctest::Approx(rows[0].dilated_target));
  CHECK(rows[2].dilated_target == doctest::Approx(rows[1].dilated_target));
  for (const IterationLog& row : rows) {
    CHECK(std::isfinite(row.f_nominal));
    CHECK(row.f_nominal > 0.0);
    CHECK(row.f_dilated > 0.0);
    CHECK(row.f_eroded > 0.0);
  }
}

TEST_SUITE_END();
