#include "pinnworks/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pinnworks {

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("series length mismatch");
  if (a.empty()) throw std::invalid_argument("empty series");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

ComparisonReport compare(const Trajectory& a, const Trajectory& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("variable count mismatch: " + std::to_string(a.dimension()) +
                                " vs " + std::to_string(b.dimension()));
  }
  if (a.names() != b.names()) throw std::invalid_argument("variable order mismatch");
  if (a.size() != b.size()) {
    throw std::invalid_argument("grid mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + " points");
  }
  if (a.size() == 0) throw std::invalid_argument("empty trajectories");
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ta = a.times()[k], tb = b.times()[k];
    if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta))) {
      throw std::invalid_argument("grid mismatch at row " + std::to_string(k));
    }
  }

  const std::size_t n = a.size(), dim = a.dimension();
  ComparisonReport r;
  r.names = a.names();
  r.times = a.times();
  r.rmse.assign(dim, 0.0);
  r.max_abs_error.assign(dim, 0.0);
  r.max_error_time.assign(dim, a.times().front());
  r.error.assign(dim, std::vector<double>(n));
  r.overall_max_error_time = a.times().front();
  double pooled = 0.0;
  for (std::size_t v = 0; v < dim; ++v) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = a.at(k, v) - b.at(k, v);
      r.error[v][k] = d;
      sum += d * d;
      if (std::abs(d) > r.max_abs_error[v]) {
        r.max_abs_error[v] = std::abs(d);
        r.max_error_time[v] = a.times()[k];
      }
    }
    pooled += sum;
    r.rmse[v] = std::sqrt(sum / static_cast<double>(n));
    if (r.max_abs_error[v] > r.overall_max_error) {
      r.overall_max_error = r.max_abs_error[v];
      r.overall_max_error_time = r.max_error_time[v];
    }
  }
  r.pooled_rmse = std::sqrt(pooled / static_cast<double>(n * dim));
  return r;
}

double angle_difference(double x, double y) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double d = std::remainder(x - y, two_pi);
  if (d <= -std::numbers::pi) d += two_pi;
  return d;
}

bool reached_equilibrium(const Trajectory& trajectory, const EquilibriumCheck& check) {
  if (trajectory.size() == 0) return false;
  if (check.target.size() != trajectory.dimension()) {
    throw std::invalid_argument("equilibrium dimension mismatch");
  }
  const auto last = trajectory.back();
  for (std::size_t v = 0; v < last.size(); ++v) {
    const bool periodic =
        std::find(check.periodic.begin(), check.periodic.end(), v) != check.periodic.end();
    const double d = periodic ? angle_difference(last[v], check.target[v]) : last[v] - check.target[v];
    if (!(std::abs(d) <= check.tolerance)) return false;
  }
  return true;
}

}  // namespace pinnworks
