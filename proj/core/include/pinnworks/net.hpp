#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinnworks/ad.hpp"

namespace pinnworks {

/// Parameter vector does not fit the network layout.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NetworkMode {
  symbolic,      // one single-output network per state variable
  conventional,  // one network whose outputs are all state variables
};

std::string_view to_string(NetworkMode mode);
NetworkMode parse_network_mode(std::string_view text);

/// Fully connected tanh network with an identity output layer.
struct SubNetwork {
  std::vector<std::size_t> dims;  // dims.front() == 1 (time input)
  std::size_t offset = 0;         // start of this network's block in theta

  std::size_t layer_count() const { return dims.size() - 1; }
  std::size_t output_dim() const { return dims.back(); }
  std::size_t param_count() const;

  friend bool operator==(const SubNetwork&, const SubNetwork&) = default;
};

/// Sum over layers of (fan_in * fan_out + fan_out).
std::size_t param_count(std::span<const std::size_t> dims);

/// Architecture of an ensemble and the flat theta layout: network by network,
/// layer by layer, weights (row-major, out x in) then biases.
class NetworkLayout {
 public:
  NetworkLayout(NetworkMode mode, std::size_t state_count,
                std::span<const std::size_t> hidden);

  /// Rebuilds a layout from explicit per-network dims (checkpoint loading).
  static NetworkLayout from_dims(NetworkMode mode,
                                 std::vector<std::vector<std::size_t>> dims);

  NetworkMode mode() const { return mode_; }
  std::size_t state_count() const { return state_count_; }
  const std::vector<SubNetwork>& networks() const { return nets_; }
  std::size_t param_count() const { return param_count_; }
  /// First state index produced by network k.
  std::size_t first_output(std::size_t k) const { return mode_ == NetworkMode::symbolic ? k : 0; }

  /// e.g. "symbolic 2x[1,10,10,10,1] (502 parameters)"
  std::string describe() const;

  friend bool operator==(const NetworkLayout&, const NetworkLayout&) = default;

 private:
  NetworkLayout() = default;
  void finalize();

  NetworkMode mode_ = NetworkMode::symbolic;
  std::size_t state_count_ = 0;
  std::vector<SubNetwork> nets_;
  std::size_t param_count_ = 0;
};

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major out x in
  std::vector<double> bias;
  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Splits theta into per-network layer matrices.
std::vector<std::vector<Layer>> unflatten(const NetworkLayout& layout,
                                          std::span<const double> theta);
std::vector<double> flatten(const NetworkLayout& layout,
                            const std::vector<std::vector<Layer>>& layers);

struct NetworkEnsemble {
  NetworkLayout layout;
  std::vector<double> theta;
};

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
NetworkEnsemble init_ensemble(NetworkMode mode, std::size_t state_count,
                              std::span<const std::size_t> hidden, std::uint64_t seed);

/// Network outputs u(t) in state order.
std::vector<double> forward(const NetworkLayout& layout, double t,
                            std::span<const double> theta);

struct TimeJet {
  std::vector<double> value;            // u(t)
  std::vector<double> time_derivative;  // du/dt, exact
};

TimeJet forward_with_time_derivative(const NetworkLayout& layout, double t,
                                     std::span<const double> theta);

/// Forward pass with time tangents plus the matching reverse pass.
///
/// evaluate() keeps every activation and tangent. backpropagate() then
/// accumulates into `grad` the theta-gradient of
///   sum_k adj_value[k] * u_k(t) + adj_rate[k] * du_k/dt(t),
/// which includes the mixed d^2 u / dt dtheta terms needed by residual losses.
class NetworkEvaluator {
 public:
  explicit NetworkEvaluator(const NetworkLayout& layout);

  void evaluate(double t, std::span<const double> theta);
  std::span<const double> value() const { return value_; }
  std::span<const double> time_derivative() const { return rate_; }

  void backpropagate(std::span<const double> theta, std::span<const double> adj_value,
                     std::span<const double> adj_rate, std::span<double> grad);

  const NetworkLayout& layout() const { return layout_; }

 private:
  struct Buffers {
    // Per layer boundary l = 0..L: activation, tangent and pre-activation tangent.
    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> tan;
    std::vector<std::vector<double>> zdot;
    std::vector<double> g_z, g_zd, g_a, g_ad;
  };

  NetworkLayout layout_;
  std::vector<Buffers> buffers_;
  std::vector<double> value_;
  std::vector<double> rate_;
};

/// Taped view of an ensemble handed to loss closures by param_gradient().
class TapedNetwork {
 public:
  TapedNetwork(const NetworkLayout& layout, std::span<const ad::Var> theta)
      : layout_(layout), theta_(theta) {}

  std::span<const ad::Var> parameters() const { return theta_; }
  std::vector<ad::Var> forward(double t) const;
  /// Returns {u(t), du/dt(t)}, both taped.
  std::pair<std::vector<ad::Var>, std::vector<ad::Var>> forward_with_time_derivative(
      double t) const;

 private:
  const NetworkLayout& layout_;
  std::span<const ad::Var> theta_;
};

using TapedLoss = std::function<ad::Var(const TapedNetwork&)>;

struct GradientResult {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Exact gradient of a scalar loss closure by reverse accumulation on a tape.
GradientResult param_gradient(const NetworkLayout& layout, std::span<const double> theta,
                              const TapedLoss& loss);

}  // namespace pinnworks
