#include "pinnworks/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pinnworks {

std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::grid ? "grid" : "monte-carlo";
}

std::string_view to_string(Quadrature q) {
  return q == Quadrature::as_printed ? "as-printed" : "trapezoid";
}

Quadrature parse_quadrature(std::string_view text) {
  if (text == "as-printed") return Quadrature::as_printed;
  if (text == "trapezoid") return Quadrature::trapezoid;
  throw std::invalid_argument("unknown quadrature '" + std::string(text) +
                              "' (expected as-printed or trapezoid)");
}

SamplingPlan SamplingPlan::grid(double t0, double t1, double dt, Quadrature quadrature) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("grid spacing must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("grid requires t1 > t0");
  SamplingPlan plan;
  plan.kind = SamplerKind::grid;
  plan.quadrature = quadrature;
  plan.dt = dt;
  plan.boundary_time = t0;
  const double span = t1 - t0;
  const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
  if (quadrature == Quadrature::as_printed) {
    if (n == 0) throw std::invalid_argument("grid spacing exceeds the domain");
    for (std::size_t k = 1; k <= n; ++k) {
      plan.points.push_back(t0 + static_cast<double>(k) * dt);
      plan.weights.push_back(dt);
    }
    return plan;
  }
  for (std::size_t k = 0; k <= n; ++k) plan.points.push_back(t0 + static_cast<double>(k) * dt);
  if (t1 - plan.points.back() > 1e-9 * dt) plan.points.push_back(t1);
  plan.weights.assign(plan.points.size(), 0.0);
  for (std::size_t k = 0; k + 1 < plan.points.size(); ++k) {
    const double h = plan.points[k + 1] - plan.points[k];
    plan.weights[k] += 0.5 * h;
    plan.weights[k + 1] += 0.5 * h;
  }
  return plan;
}

SamplingPlan SamplingPlan::monte_carlo(double t0, double t1, std::size_t count,
                                       std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("Monte-Carlo sample count must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("sampling requires t1 > t0");
  SamplingPlan plan;
  plan.kind = SamplerKind::monte_carlo;
  plan.count = count;
  plan.seed = seed;
  plan.alpha = (t1 - t0) / static_cast<double>(count);
  plan.boundary_time = t0;
  std::mt19937_64 rng(seed);
  plan.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    plan.points.push_back(t1 - (t1 - t0) * u);                      // (t0, t1]
  }
  plan.weights.assign(count, plan.alpha);
  return plan;
}

LossAssembly LossAssembly::uniform(std::size_t state_count, AdaptiveConfig adaptive) {
  return {std::vector<double>(state_count, 1.0), std::vector<double>(state_count, 1.0),
          adaptive};
}

namespace {

void check_sizes(const OdeSystem& system, const NetworkLayout& layout) {
  if (layout.state_count() != system.size()) {
    throw ShapeError("network produces " + std::to_string(layout.state_count()) +
                     " outputs but the system has " + std::to_string(system.size()) +
                     " state variables");
  }
}

void check_assembly(const LossAssembly& a, const OdeSystem& system) {
  if (a.residual_weights.size() != system.size() || a.boundary_weights.size() != system.size()) {
    throw std::invalid_argument("loss assembly needs one weight per equation and per initial condition");
  }
}

}  // namespace

std::vector<double> residual_loss(const OdeSystem& system, const NetworkLayout& layout,
                                  std::span<const double> theta, const SamplingPlan& plan) {
  LossEvaluator eval(system, layout, plan);
  const auto assembly = LossAssembly::uniform(system.size());
  LossBreakdown b;
  std::vector<double> grad;  // unused
  eval.value_and_gradient(assembly, theta, grad, &b);
  return b.residual;
}

std::vector<double> boundary_loss(const OdeSystem& system, const NetworkLayout& layout,
                                  std::span<const double> theta) {
  check_sizes(system, layout);
  const std::vector<double> u = forward(layout, system.t0(), theta);
  std::vector<double> out(system.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double d = u[j] - system.initial_conditions()[j];
    out[j] = d * d;
  }
  return out;
}

LossBreakdown combine_terms(const LossAssembly& assembly, std::vector<double> residual,
                            std::vector<double> boundary) {
  if (residual.size() != assembly.residual_weights.size() ||
      boundary.size() != assembly.boundary_weights.size()) {
    throw std::invalid_argument("term count does not match assembly weights");
  }
  LossBreakdown b;
  b.residual = std::move(residual);
  b.boundary = std::move(boundary);
  b.residual_weights = assembly.residual_weights;
  b.boundary_weights = assembly.boundary_weights;
  for (std::size_t i = 0; i < b.residual.size(); ++i) b.total += b.residual_weights[i] * b.residual[i];
  for (std::size_t j = 0; j < b.boundary.size(); ++j) b.total += b.boundary_weights[j] * b.boundary[j];
  return b;
}

LossBreakdown total_loss(const LossAssembly& assembly, const OdeSystem& system,
                         const NetworkLayout& layout, std::span<const double> theta,
                         const SamplingPlan& plan) {
  check_assembly(assembly, system);
  return combine_terms(assembly, residual_loss(system, layout, theta, plan),
                       boundary_loss(system, layout, theta));
}

// ---------------------------------------------------------------------------

LossEvaluator::LossEvaluator(const OdeSystem& system, const NetworkLayout& layout,
                             SamplingPlan plan)
    : system_(system), layout_(layout), plan_(std::move(plan)), net_(layout_) {
  check_sizes(system_, layout_);
  if (plan_.points.empty()) throw std::invalid_argument("sampling plan has no points");
  if (plan_.points.size() != plan_.weights.size()) {
    throw std::invalid_argument("sampling plan points and weights differ in length");
  }
  const std::size_t n = system_.size();
  residual_.resize(n);
  adj_value_.resize(n);
  adj_rate_.resize(n);
}

void LossEvaluator::residual_pass(std::span<const double> theta, std::span<const double> scale,
                                  std::span<double> grad, std::vector<double>& terms) {
  const std::size_t n = system_.size();
  const auto params = system_.parameter_values();
  terms.assign(n, 0.0);
  const bool want_grad = !grad.empty();
  for (std::size_t p = 0; p < plan_.points.size(); ++p) {
    const double t = plan_.points[p];
    const double q = plan_.weights[p];
    net_.evaluate(t, theta);
    const auto u = net_.value();
    const auto du = net_.time_derivative();
    for (std::size_t i = 0; i < n; ++i) {
      const double f = system_.compiled_rhs(i).evaluate<double>(t, u, params, stack_);
      residual_[i] = f - du[i];
      terms[i] += q * residual_[i] * residual_[i];
    }
    if (!want_grad) continue;
    // d/du_k and d/d(du_k) of sum_i scale_i * q * r_i^2
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
      adj_value_[k] = 0.0;
      adj_rate_[k] = -2.0 * q * scale[k] * residual_[k];
      any = any || adj_rate_[k] != 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double c = 2.0 * q * scale[i] * residual_[i];
      if (c == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        const CompiledExpr& jac = system_.compiled_jacobian(i, k);
        if (jac.is_constant()) {
          adj_value_[k] += c * jac.constant_value();
        } else {
          adj_value_[k] += c * jac.evaluate<double>(t, u, params, stack_);
        }
      }
    }
    if (any) net_.backpropagate(theta, adj_value_, adj_rate_, grad);
  }
}

void LossEvaluator::boundary_pass(std::span<const double> theta, std::span<const double> scale,
                                  std::span<double> grad, std::vector<double>& terms) {
  const std::size_t n = system_.size();
  terms.assign(n, 0.0);
  net_.evaluate(system_.t0(), theta);
  const auto u = net_.value();
  for (std::size_t j = 0; j < n; ++j) {
    const double d = u[j] - system_.initial_conditions()[j];
    terms[j] = d * d;
    adj_value_[j] = 2.0 * scale[j] * d;
    adj_rate_[j] = 0.0;
  }
  if (!grad.empty()) net_.backpropagate(theta, adj_value_, adj_rate_, grad);
}

double LossEvaluator::value_and_gradient(const LossAssembly& assembly,
                                         std::span<const double> theta,
                                         std::span<double> grad, LossBreakdown* breakdown) {
  check_assembly(assembly, system_);
  if (theta.size() != layout_.param_count()) {
    throw ShapeError("theta has " + std::to_string(theta.size()) + " entries, expected " +
                     std::to_string(layout_.param_count()));
  }
  if (!grad.empty()) {
    if (grad.size() != theta.size()) throw ShapeError("gradient buffer has the wrong size");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  std::vector<double> residual, boundary;
  residual_pass(theta, assembly.residual_weights, grad, residual);
  boundary_pass(theta, assembly.boundary_weights, grad, boundary);
  LossBreakdown b = combine_terms(assembly, std::move(residual), std::move(boundary));
  const double total = b.total;
  if (breakdown) *breakdown = std::move(b);
  return total;
}

TermGradients LossEvaluator::term_gradients(const LossAssembly& assembly,
                                            std::span<const double> theta,
                                            bool per_residual_term) {
  check_assembly(assembly, system_);
  const std::size_t n = system_.size();
  const std::size_t m = theta.size();
  TermGradients out;
  std::vector<double> residual, boundary, scratch;
  const std::vector<double> ones(n, 1.0);

  out.residual_sum.assign(m, 0.0);
  residual_pass(theta, ones, out.residual_sum, residual);

  std::vector<double> unit(n, 0.0);
  if (per_residual_term) {
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(unit.begin(), unit.end(), 0.0);
      unit[i] = 1.0;
      out.residual_terms.emplace_back(m, 0.0);
      residual_pass(theta, unit, out.residual_terms.back(), scratch);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[j] = 1.0;
    out.boundary_terms.emplace_back(m, 0.0);
    boundary_pass(theta, unit, out.boundary_terms.back(), boundary);
  }
  out.breakdown = combine_terms(assembly, std::move(residual), std::move(boundary));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double mean_abs(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

// Returns the proposal, or NaN when the term must be skipped.
double blend(double& weight, double numerator, double denominator, double gamma) {
  if (!(denominator > 0.0) || !std::isfinite(denominator) || !std::isfinite(numerator)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double proposed = numerator / denominator;
  if (!(proposed > 0.0) || !std::isfinite(proposed)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  weight = (1.0 - gamma) * weight + gamma * proposed;
  return proposed;
}

}  // namespace

AdaptiveUpdateResult adaptive_update(LossAssembly& assembly,
                                     std::span<const double> residual_gradient,
                                     const std::vector<std::vector<double>>& boundary_gradients,
                                     double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (boundary_gradients.size() != assembly.boundary_weights.size()) {
    throw std::invalid_argument("one gradient per boundary term required");
  }
  AdaptiveUpdateResult result;
  const double numerator = max_abs(residual_gradient);
  for (std::size_t j = 0; j < boundary_gradients.size(); ++j) {
    double& w = assembly.boundary_weights[j];
    const double before = w;
    const double proposed = blend(w, numerator, mean_abs(boundary_gradients[j]), gamma);
    result.proposed.push_back(proposed);
    result.skipped.push_back(std::isnan(proposed));
    result.changed = result.changed || w != before;
  }
  return result;
}

AdaptiveUpdateResult adaptive_update(LossAssembly& assembly, const TermGradients& grads) {
  const double gamma = assembly.adaptive.gamma;
  AdaptiveUpdateResult result =
      adaptive_update(assembly, grads.residual_sum, grads.boundary_terms, gamma);
  if (assembly.adaptive.adapt_residual) {
    if (grads.residual_terms.size() != assembly.residual_weights.size()) {
      throw std::invalid_argument("residual adaptation needs per-equation gradients");
    }
    const double numerator = max_abs(grads.residual_sum);
    for (std::size_t i = 0; i < grads.residual_terms.size(); ++i) {
      double& w = assembly.residual_weights[i];
      const double before = w;
      result.residual_proposed.push_back(
          blend(w, numerator, mean_abs(grads.residual_terms[i]), gamma));
      result.changed = result.changed || w != before;
    }
  }
  return result;
}

}  // namespace pinnworks
