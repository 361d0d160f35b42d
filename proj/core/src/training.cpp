#include "pinnworks/training.hpp"

#include <chrono>
#include <numeric>

namespace pinnworks {

namespace {

WeightSnapshot snapshot(int iteration, const LossAssembly& assembly) {
  return {iteration, assembly.residual_weights, assembly.boundary_weights};
}

}  // namespace

TrainReport train(const TrainingProblem& problem, std::vector<double> theta0,
                  const ProgressObserver& observer) {
  if (theta0.size() != problem.layout.param_count()) {
    throw ShapeError("theta has " + std::to_string(theta0.size()) + " entries, layout " +
                     problem.layout.describe() + " needs " +
                     std::to_string(problem.layout.param_count()));
  }
  const auto start = std::chrono::steady_clock::now();
  LossEvaluator evaluator(problem.system, problem.layout, problem.plan);
  LossAssembly assembly = problem.assembly;
  const AdaptiveConfig adaptive = assembly.adaptive;
  if (adaptive.enabled && adaptive.period <= 0) {
    throw std::invalid_argument("adaptive period must be > 0");
  }

  TrainReport report;
  report.weight_history.push_back(snapshot(0, assembly));
  auto update_weights = [&](int iteration, std::span<const double> theta) {
    const TermGradients grads = evaluator.term_gradients(assembly, theta, adaptive.adapt_residual);
    const AdaptiveUpdateResult result = adaptive_update(assembly, grads);
    if (result.changed) report.weight_history.push_back(snapshot(iteration, assembly));
    return result.changed;
  };
  if (adaptive.enabled) update_weights(0, theta0);

  const ValueAndGradient f = [&](std::span<const double> x, std::span<double> g) {
    return evaluator.value_and_gradient(assembly, x, g);
  };
  const IterationCallback callback = [&](const IterationInfo& info) {
    if (observer) observer(info);
    if (adaptive.enabled && info.iteration % adaptive.period == 0 &&
        update_weights(info.iteration, info.x)) {
      return CallbackAction::objective_changed;
    }
    return CallbackAction::proceed;
  };

  MinimizeResult r = minimize(f, std::move(theta0), problem.optimizer, callback);
  report.theta = std::move(r.x);
  report.loss_history = std::move(r.loss_history);
  report.stop_reason = r.stop_reason;
  report.iterations = r.iterations;
  report.evaluations = r.evaluations;
  report.hessian_resets = r.hessian_resets;
  report.skipped_updates = r.skipped_updates;
  evaluator.value_and_gradient(assembly, report.theta, {}, &report.final_breakdown);
  const auto& b = report.final_breakdown;
  report.final_unweighted_loss = std::accumulate(b.residual.begin(), b.residual.end(), 0.0) +
                                 std::accumulate(b.boundary.begin(), b.boundary.end(), 0.0);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::optional<std::size_t> first_iteration_below(std::span<const double> history,
                                                 double threshold) {
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (history[k] <= threshold) return k;
  }
  return std::nullopt;
}

Trajectory pinn_trajectory(const OdeSystem& system, const NetworkLayout& layout,
                           std::span<const double> theta, std::span<const double> times) {
  if (layout.state_count() != system.size()) {
    throw ShapeError("network covers " + std::to_string(layout.state_count()) +
                     " variables, system has " + std::to_string(system.size()));
  }
  Trajectory traj(system.state_names(), Provenance::pinn);
  for (double t : times) traj.append(t, forward(layout, t, theta));
  return traj;
}

}  // namespace pinnworks
