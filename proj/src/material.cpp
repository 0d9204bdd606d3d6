#include "tofsi/material.hpp"

#include <algorithm>
#include <cmath>

namespace tofsi {

double discreteness_measure(std::span<const double> rho_bar) {
  if (rho_bar.empty()) throw ConfigError("discreteness measure of empty field");
  double sum = 0.0;
  for (double r : rho_bar) sum += 4.0 * r * (1.0 - r);
  return 100.0 * sum / static_cast<double>(rho_bar.size());
}

DensityFilter::DensityFilter(const StructuredGrid& grid, double relative_radius) {
  double max_edge = 0.0;
  for (std::size_t i = 1; i < grid.x_lines.size(); ++i)
    max_edge = std::max(max_edge, grid.x_lines[i] - grid.x_lines[i - 1]);
  for (std::size_t j = 1; j < grid.y_lines.size(); ++j)
    max_edge = std::max(max_edge, grid.y_lines[j] - grid.y_lines[j - 1]);
  radius_ = relative_radius * max_edge;

  const auto& des = grid.design_elements;
  const int n = static_cast<int>(des.size());
  rows_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double xi = grid.centroid_x[des[i]], yi = grid.centroid_y[des[i]];
    double total = 0.0;
    auto& row = rows_[i];
    for (int j = 0; j < n; ++j) {
      const double dx = grid.centroid_x[des[j]] - xi;
      const double dy = grid.centroid_y[des[j]] - yi;
      if (std::abs(dx) > radius_ || std::abs(dy) > radius_) continue;
      const double w = radius_ - std::sqrt(dx * dx + dy * dy);
      if (w <= 0.0) continue;
      row.emplace_back(j, w);
      total += w;
    }
    for (auto& [col, w] : row) w /= total;
  }
}

double DensityFilter::weight(int i, int j) const {
  for (const auto& [col, w] : rows_[i])
    if (col == j) return w;
  return 0.0;
}

}  // namespace tofsi
