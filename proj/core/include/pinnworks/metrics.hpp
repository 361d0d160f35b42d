#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnworks/odeint.hpp"

namespace pinnworks {

struct ComparisonReport {
  std::vector<std::string> names;
  std::vector<double> rmse;  // per variable
  double pooled_rmse = 0.0;  // over all variables and points
  std::vector<double> max_abs_error;  // per variable
  std::vector<double> max_error_time;
  double overall_max_error = 0.0;
  double overall_max_error_time = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> error;  // error[v][k] = a - b
  std::optional<bool> equilibrium_reached;  // set by check_equilibrium
};

/// Per-variable comparison on a shared grid. Throws std::invalid_argument on
/// grid or variable mismatch.
ComparisonReport compare(const Trajectory& a, const Trajectory& b);

/// Root mean square of a - b over equal-length series.
double rmse(std::span<const double> a, std::span<const double> b);

struct EquilibriumCheck {
  std::vector<double> target;
  /// Indices of angle-like variables compared modulo 2*pi.
  std::vector<std::size_t> periodic;
  double tolerance = 0.05;  // max-norm
};

/// Whether the final state lies within tolerance of the target.
bool reached_equilibrium(const Trajectory& trajectory, const EquilibriumCheck& check);

/// Wraps x - y into (-pi, pi].
double angle_difference(double x, double y);

}  // namespace pinnworks
