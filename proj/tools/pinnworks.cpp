#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pinnworks/commands.hpp"
#include "pinnworks/parser.hpp"

namespace pw = pinnworks;

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed neural network ODE solver"};
  app.require_subcommand(1);

  pw::TrainOptions train;
  std::optional<std::uint64_t> train_seed;
  auto* train_cmd = app.add_subcommand("train", "Train a network ensemble from a run config");
  train_cmd->add_option("--config", train.config, "Run config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", train_seed, "Override the config's seed");
  train_cmd->add_option("--warm-start", train.warm_start, "Initial theta from this checkpoint");
  train_cmd->add_option("--out", train.out, "Output directory");
  train_cmd->add_option("--progress", train.progress_every, "Print every N iterations (0: never)");

  pw::SimulateOptions sim;
  std::optional<std::uint64_t> sim_seed;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate a system with the reference solver");
  auto* sim_preset = sim_cmd->add_option("--preset", sim.preset, "Built-in system");
  auto* sim_system = sim_cmd->add_option("--system", sim.system_file, "System DSL file")->check(CLI::ExistingFile);
  sim_preset->excludes(sim_system);
  auto* sim_dt = sim_cmd->add_option("--dt", sim.dt, "Fixed RK4 step");
  auto* sim_tol = sim_cmd->add_option("--tol", sim.tol, "Adaptive tolerance (default 1e-8)");
  sim_dt->excludes(sim_tol);
  sim_cmd->add_option("--horizon", sim.horizon, "Integrate over [t0, t0 + horizon]");
  sim_cmd->add_option("--output-dt", sim.output_dt, "Output spacing of the adaptive solver");
  sim_cmd->add_flag("--energy", sim.energy, "Append the SMIB energy column");
  sim_cmd->add_option("--out", sim.out, "CSV path (stdout when omitted)");
  sim_cmd->add_option("--seed", sim_seed, "Accepted for uniformity; simulation is deterministic");

  pw::CompareOptions cmp;
  std::optional<std::uint64_t> cmp_seed;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare a checkpoint with the reference solution");
  cmp_cmd->add_option("--checkpoint", cmp.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  auto* cmp_preset = cmp_cmd->add_option("--preset", cmp.preset, "Built-in system");
  auto* cmp_system = cmp_cmd->add_option("--system", cmp.system_file, "System DSL file")->check(CLI::ExistingFile);
  cmp_preset->excludes(cmp_system);
  cmp_cmd->add_option("--reference", cmp.reference_csv, "Reference trajectory CSV instead of the solver")
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--tol", cmp.tol, "Reference solver tolerance");
  cmp_cmd->add_option("--equilibrium-tol", cmp.equilibrium_tolerance, "Max-norm tolerance of the equilibrium check");
  cmp_cmd->add_option("--out", cmp.out, "Output directory")->required();
  cmp_cmd->add_option("--seed", cmp_seed, "Accepted for uniformity; comparison is deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pw::exit_usage;
  }

  try {
    if (*train_cmd) {
      train.seed = train_seed;
      return pw::cmd_train(train, std::cout, std::cerr);
    }
    if (*sim_cmd) {
      if (sim.preset.empty() == sim.system_file.empty()) {
        std::cerr << "error: give exactly one of --preset or --system\n";
        return pw::exit_usage;
      }
      return pw::cmd_simulate(sim, std::cout, std::cerr);
    }
    if (cmp.preset.empty() == cmp.system_file.empty()) {
      std::cerr << "error: give exactly one of --preset or --system\n";
      return pw::exit_usage;
    }
    return pw::cmd_compare(cmp, std::cout, std::cerr);
  } catch (const pw::ParseError& e) {
    for (const auto& d : e.diagnostics()) {
      std::cerr << "error: " << d.line << ':' << d.column << ": " << d.message << '\n';
    }
    return pw::exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pw::exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pw::exit_failure;
  }
}
