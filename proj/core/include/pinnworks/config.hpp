#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinnworks/loss.hpp"
#include "pinnworks/net.hpp"
#include "pinnworks/optim.hpp"
#include "pinnworks/training.hpp"

namespace pinnworks {

struct ConfigDiagnostic {
  int line = 0;  // 0 when not tied to a line
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigDiagnostic> diagnostics);
  const std::vector<ConfigDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<ConfigDiagnostic> diagnostics_;
};

struct RunConfig {
  // [system]: exactly one of preset / file
  std::string preset;
  std::filesystem::path system_file;

  // [network]
  NetworkMode mode = NetworkMode::symbolic;
  std::vector<std::size_t> hidden;  // empty: mode default

  // [sampler]
  SamplerKind sampler = SamplerKind::grid;
  double dt = 0.01;
  std::size_t count = 1000;
  std::optional<std::uint64_t> sampler_seed;  // defaults to the run seed
  Quadrature quadrature = Quadrature::as_printed;

  // [optimizer]
  HessianMethod method = HessianMethod::dense_bfgs;
  int max_iterations = 50000;
  double gradient_tol = 1e-8;
  double loss_delta_tol = 0.0;
  std::optional<double> loss_target;
  std::size_t lbfgs_memory = 10;

  // [adaptive]
  AdaptiveConfig adaptive;

  // [run]
  std::uint64_t seed = 0;
  std::filesystem::path warm_start;
  std::filesystem::path output_dir;

  std::vector<std::size_t> hidden_widths() const;
};

/// Default hidden widths: 3x10 per sub-network (symbolic), 4x20 (conventional).
std::vector<std::size_t> default_hidden(NetworkMode mode);

/// INI-style text; relative paths resolve against `base_dir`. All problems
/// are collected before throwing ConfigError.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text (output directory excluded), used for the digest.
std::string canonical_text(const RunConfig& config);
std::string config_digest(const RunConfig& config);

OdeSystem load_system(const RunConfig& config);
TrainingProblem build_problem(const RunConfig& config);

/// Fresh Glorot initialization, or the warm-start checkpoint's theta.
std::vector<double> initial_theta(const RunConfig& config, const TrainingProblem& problem);

}  // namespace pinnworks
