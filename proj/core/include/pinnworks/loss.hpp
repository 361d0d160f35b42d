#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pinnworks/expr.hpp"
#include "pinnworks/net.hpp"

namespace pinnworks {

enum class SamplerKind { grid, monte_carlo };

/// How grid points are weighted.
///  as_printed: interior points t0+dt, t0+2dt, ... <= t1, each weighted dt.
///  trapezoid:  t0, t0+dt, ..., t1 with half weights at both ends.
enum class Quadrature { as_printed, trapezoid };

std::string_view to_string(SamplerKind kind);
std::string_view to_string(Quadrature q);
Quadrature parse_quadrature(std::string_view text);

/// Collocation points and their quadrature weights.
struct SamplingPlan {
  SamplerKind kind = SamplerKind::grid;
  Quadrature quadrature = Quadrature::as_printed;
  double dt = 0.0;           // grid spacing
  std::size_t count = 0;     // Monte-Carlo sample count
  std::uint64_t seed = 0;    // Monte-Carlo seed
  double alpha = 0.0;        // Monte-Carlo scale (t1 - t0) / N
  double boundary_time = 0.0;
  std::vector<double> points;
  std::vector<double> weights;

  static SamplingPlan grid(double t0, double t1, double dt,
                           Quadrature quadrature = Quadrature::as_printed);
  /// N points uniform on (t0, t1], reproducible from `seed`.
  static SamplingPlan monte_carlo(double t0, double t1, std::size_t count,
                                  std::uint64_t seed);
};

struct AdaptiveConfig {
  bool enabled = false;
  int period = 10;
  double gamma = 0.9;
  /// Also rescale residual weights (each residual term against the pooled
  /// residual maximum). Off by default: residual weights stay at 1.
  bool adapt_residual = false;
};

/// Term weights of the total loss plus the adaptive re-weighting settings.
struct LossAssembly {
  std::vector<double> residual_weights;
  std::vector<double> boundary_weights;
  AdaptiveConfig adaptive;

  static LossAssembly uniform(std::size_t state_count, AdaptiveConfig adaptive = {});
};

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> residual;  // L_f_i, unweighted
  std::vector<double> boundary;  // L_b_j, unweighted
  std::vector<double> residual_weights;
  std::vector<double> boundary_weights;
};

/// L_f_i = sum_points q * (rhs_i(t, u) - du_i/dt)^2 for each equation i.
std::vector<double> residual_loss(const OdeSystem& system, const NetworkLayout& layout,
                                  std::span<const double> theta, const SamplingPlan& plan);

/// L_b_j = (u_j(t0) - u_j0)^2 for each state variable j.
std::vector<double> boundary_loss(const OdeSystem& system, const NetworkLayout& layout,
                                  std::span<const double> theta);

/// Weighted sum of the given terms.
LossBreakdown combine_terms(const LossAssembly& assembly, std::vector<double> residual,
                            std::vector<double> boundary);

LossBreakdown total_loss(const LossAssembly& assembly, const OdeSystem& system,
                         const NetworkLayout& layout, std::span<const double> theta,
                         const SamplingPlan& plan);

struct TermGradients {
  LossBreakdown breakdown;
  std::vector<double> residual_sum;                 // grad of sum_i L_f_i
  std::vector<std::vector<double>> residual_terms;  // grad L_f_i (optional)
  std::vector<std::vector<double>> boundary_terms;  // grad L_b_j
};

/// Hot-path loss evaluation with analytic gradients. Holds the network
/// workspace; one instance per thread.
class LossEvaluator {
 public:
  LossEvaluator(const OdeSystem& system, const NetworkLayout& layout, SamplingPlan plan);

  /// Total loss; writes its gradient into `grad` (resized by the caller to
  /// layout.param_count()).
  double value_and_gradient(const LossAssembly& assembly, std::span<const double> theta,
                            std::span<double> grad, LossBreakdown* breakdown = nullptr);

  /// Unweighted per-term gradients used by the adaptive update.
  TermGradients term_gradients(const LossAssembly& assembly, std::span<const double> theta,
                               bool per_residual_term);

  const SamplingPlan& plan() const { return plan_; }
  const OdeSystem& system() const { return system_; }
  const NetworkLayout& layout() const { return layout_; }

 private:
  // Accumulates residual terms and, when grads is non-empty, the gradient of
  // sum_i scale_i * L_f_i into grads.
  void residual_pass(std::span<const double> theta, std::span<const double> scale,
                     std::span<double> grad, std::vector<double>& terms);
  void boundary_pass(std::span<const double> theta, std::span<const double> scale,
                     std::span<double> grad, std::vector<double>& terms);

  OdeSystem system_;
  NetworkLayout layout_;
  SamplingPlan plan_;
  NetworkEvaluator net_;
  std::vector<double> residual_, adj_value_, adj_rate_, stack_;
};

struct AdaptiveUpdateResult {
  std::vector<double> proposed;      // w_hat per boundary term (NaN when skipped)
  std::vector<bool> skipped;         // mean gradient magnitude was zero
  std::vector<double> residual_proposed;  // only with adapt_residual
  bool changed = false;
};

/// w_hat_j = max_k |d(sum_i L_f_i)/d theta_k| / mean_k |d L_b_j / d theta_k|
/// w_j <- (1 - gamma) w_j + gamma w_hat_j
/// Terms whose mean gradient magnitude is zero keep their weight.
AdaptiveUpdateResult adaptive_update(LossAssembly& assembly,
                                     std::span<const double> residual_gradient,
                                     const std::vector<std::vector<double>>& boundary_gradients,
                                     double gamma);

/// Same as above, additionally rescaling residual weights when
/// assembly.adaptive.adapt_residual is set.
AdaptiveUpdateResult adaptive_update(LossAssembly& assembly, const TermGradients& grads);

}  // namespace pinnworks
