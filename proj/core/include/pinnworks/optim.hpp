#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "pinnworks/net.hpp"

namespace pinnworks {

/// Writes grad(x) into `grad` and returns f(x).
using ValueAndGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;

enum class StopReason {
  converged_gradient,
  converged_loss_delta,
  reached_loss_target,
  max_iterations,
  line_search_failure,
  callback,
};

std::string_view to_string(StopReason reason);

enum class LineSearchKind {
  strong_wolfe,
  exact,  // secant search for phi'(alpha) = 0; intended for quadratics
};

struct LineSearchConfig {
  LineSearchKind kind = LineSearchKind::strong_wolfe;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_evaluations = 50;
};

struct StopConfig {
  int max_iterations = 50000;
  double gradient_tol = 1e-8;  // on the infinity norm
  /// Stop when |f_k - f_{k+1}| <= loss_delta_tol * max(1, |f_k|); 0 disables.
  double loss_delta_tol = 0.0;
  /// Stop as soon as f <= loss_target.
  double loss_target = -std::numeric_limits<double>::infinity();
};

enum class HessianMethod { dense_bfgs, lbfgs };

struct OptimizerConfig {
  LineSearchConfig line_search;
  StopConfig stop;
  HessianMethod method = HessianMethod::dense_bfgs;
  std::size_t lbfgs_memory = 10;
  /// Rescale the identity by s'y / y'y before the first update.
  bool scale_initial_hessian = true;
};

/// Dense inverse-Hessian approximation with the BFGS update.
class InverseHessian {
 public:
  explicit InverseHessian(std::size_t n) : n_(n), h_(n * n, 0.0) { reset(); }

  void reset(double scale = 1.0);
  /// Applies the update if s'y > 0; returns whether it was applied.
  bool update(std::span<const double> s, std::span<const double> y);
  /// out = H v
  void apply(std::span<const double> v, std::span<double> out) const;

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return h_[i * n_ + j]; }
  /// max |H_ij - H_ji|
  double asymmetry() const;

 private:
  std::size_t n_;
  std::vector<double> h_;
  std::vector<double> hy_;
};

struct IterationInfo {
  int iteration = 0;  // completed iterations
  double loss = 0.0;
  double gradient_inf_norm = 0.0;
  double step = 0.0;
  int evaluations = 0;
  std::span<const double> x;
  std::span<const double> gradient;
};

enum class CallbackAction {
  proceed,
  objective_changed,  // re-evaluate at x and restart curvature from identity
  stop,
};

using IterationCallback = std::function<CallbackAction(const IterationInfo&)>;

struct MinimizeResult {
  std::vector<double> x;
  double loss = 0.0;
  std::vector<double> gradient;
  int iterations = 0;
  int evaluations = 0;
  StopReason stop_reason = StopReason::max_iterations;
  /// Loss at x0 followed by the loss after each iteration.
  std::vector<double> loss_history;
  int hessian_resets = 0;
  int skipped_updates = 0;
};

/// Quasi-Newton minimization with a line search.
///
/// Throws std::domain_error when f or its gradient is non-finite at x0.
MinimizeResult minimize(const ValueAndGradient& f, std::vector<double> x0,
                        const OptimizerConfig& config, const IterationCallback& callback = {});

/// Initial iterate for a transfer run; throws ShapeError naming both layouts
/// when `saved` does not match `current`.
std::vector<double> warm_start(const NetworkLayout& current, const NetworkLayout& saved,
                               std::span<const double> saved_theta);

}  // namespace pinnworks
