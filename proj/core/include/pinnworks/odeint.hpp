#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinnworks/expr.hpp"

namespace pinnworks {

enum class Provenance { reference_fixed, reference_adaptive, pinn };

std::string_view to_string(Provenance p);

/// Time-stamped states; row k holds the state at times[k] in the system's
/// variable order.
class Trajectory {
 public:
  Trajectory(std::vector<std::string> names, Provenance provenance);

  void append(double t, std::span<const double> state);

  std::size_t size() const { return times_.size(); }
  std::size_t dimension() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Provenance provenance() const { return provenance_; }
  const std::vector<double>& times() const { return times_; }
  std::span<const double> row(std::size_t k) const {
    return {states_.data() + k * names_.size(), names_.size()};
  }
  double at(std::size_t k, std::size_t v) const { return states_[k * names_.size() + v]; }
  std::vector<double> column(std::size_t v) const;
  std::span<const double> back() const { return row(size() - 1); }

 private:
  std::vector<std::string> names_;
  Provenance provenance_;
  std::vector<double> times_;
  std::vector<double> states_;
};

/// Thrown when the state stops being finite; carries what was integrated so far.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, Trajectory partial, double time)
      : std::runtime_error(what), partial_(std::move(partial)), time_(time) {}
  const Trajectory& partial() const { return partial_; }
  double time() const { return time_; }

 private:
  Trajectory partial_;
  double time_;
};

/// Classic fourth-order Runge-Kutta on a uniform grid; every grid point,
/// including t0, becomes a row. dt must divide (t1 - t0) up to rounding.
Trajectory integrate_fixed(const OdeSystem& system, double dt);

struct AdaptiveOptions {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double output_dt = 0.01;
  double initial_step = 0.0;  // 0 picks one automatically
  double min_step = 1e-14;
  std::size_t max_steps = 10'000'000;
};

struct AdaptiveStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

/// Dormand-Prince 5(4) with PI step-size control, sampled on the uniform
/// output grid t0, t0 + output_dt, ..., t1 through the method's continuous
/// extension.
Trajectory integrate_adaptive(const OdeSystem& system, const AdaptiveOptions& options,
                              AdaptiveStats* stats = nullptr);

/// Output grid t0, t0 + dt, ..., t1 (last point snapped to t1).
std::vector<double> uniform_grid(double t0, double t1, double dt);

}  // namespace pinnworks
