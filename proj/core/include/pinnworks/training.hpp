#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pinnworks/loss.hpp"
#include "pinnworks/net.hpp"
#include "pinnworks/odeint.hpp"
#include "pinnworks/optim.hpp"

namespace pinnworks {

struct TrainingProblem {
  OdeSystem system;
  NetworkLayout layout;
  SamplingPlan plan;
  LossAssembly assembly;
  OptimizerConfig optimizer;
};

struct WeightSnapshot {
  int iteration = 0;
  std::vector<double> residual_weights;
  std::vector<double> boundary_weights;
};

struct TrainReport {
  std::vector<double> theta;
  /// Weighted total loss at theta0, then after every iteration.
  std::vector<double> loss_history;
  /// Initial weights, then one entry per adaptive update.
  std::vector<WeightSnapshot> weight_history;
  StopReason stop_reason = StopReason::max_iterations;
  int iterations = 0;
  int evaluations = 0;
  int hessian_resets = 0;
  int skipped_updates = 0;
  double seconds = 0.0;
  LossBreakdown final_breakdown;
  /// Sum of the final terms with every weight set to 1.
  double final_unweighted_loss = 0.0;
};

using ProgressObserver = std::function<void(const IterationInfo&)>;

/// Minimizes the assembled loss from theta0, running the adaptive weight
/// update at iteration 0 and every `period` iterations when enabled.
TrainReport train(const TrainingProblem& problem, std::vector<double> theta0,
                  const ProgressObserver& observer = {});

/// First index k with history[k] <= threshold.
std::optional<std::size_t> first_iteration_below(std::span<const double> history,
                                                 double threshold);

/// Evaluates the ensemble on the given times.
Trajectory pinn_trajectory(const OdeSystem& system, const NetworkLayout& layout,
                           std::span<const double> theta, std::span<const double> times);

}  // namespace pinnworks
