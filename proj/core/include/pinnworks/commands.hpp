#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace pinnworks {

/// Process exit codes shared by all commands.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,  // runtime error, or no progress at all
  exit_usage = 2,    // bad config, arguments or inputs
  exit_blowup = 3,   // non-finite numbers
};

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path warm_start;
  std::filesystem::path out;
  int progress_every = 500;  // 0 disables progress lines
};

/// Writes checkpoint.txt, report.txt and loss_history.csv into `out`.
int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::string preset;
  std::filesystem::path system_file;
  std::optional<double> dt;   // fixed-step RK4
  std::optional<double> tol;  // adaptive; default 1e-8 when neither is given
  std::optional<double> horizon;
  double output_dt = 0.01;
  bool energy = false;
  std::filesystem::path out;  // CSV
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::filesystem::path checkpoint;
  std::string preset;
  std::filesystem::path system_file;
  std::filesystem::path reference_csv;  // replaces the reference solver
  double tol = 1e-8;
  double output_dt = 0.01;
  double equilibrium_tolerance = 0.05;
  std::filesystem::path out;
};

/// Writes report.txt, errors.csv, pinn.csv, reference.csv, one overlay SVG per
/// variable and phase.svg into `out`.
int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err);

}  // namespace pinnworks
