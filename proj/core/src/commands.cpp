#include "pinnworks/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pinnworks/checkpoint.hpp"
#include "pinnworks/config.hpp"
#include "pinnworks/metrics.hpp"
#include "pinnworks/models.hpp"
#include "pinnworks/parser.hpp"
#include "pinnworks/svg.hpp"
#include "pinnworks/textio.hpp"
#include "pinnworks/training.hpp"

namespace pinnworks {

namespace {

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

std::string loss_history_csv(const std::vector<double>& history) {
  std::string out = "iteration,loss\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    out += std::to_string(k) + ',' + format_double(history[k]) + '\n';
  }
  return out;
}

std::string train_report(const RunConfig& config, const TrainingProblem& problem,
                         const TrainReport& r) {
  const auto& names = problem.system.state_names();
  std::ostringstream os;
  os << "[run]\n";
  os << "config_digest = " << config_digest(config) << '\n';
  os << "system = " << (config.preset.empty() ? config.system_file.generic_string() : config.preset) << '\n';
  os << "seed = " << config.seed << '\n';
  os << "warm_start = " << (config.warm_start.empty() ? "none" : config.warm_start.generic_string()) << '\n';
  os << "layout = " << problem.layout.describe() << '\n';
  os << "parameters = " << problem.layout.param_count() << '\n';
  os << "collocation_points = " << problem.plan.points.size() << '\n';
  os << "\n[result]\n";
  os << "stop_reason = " << to_string(r.stop_reason) << '\n';
  os << "iterations = " << r.iterations << '\n';
  os << "evaluations = " << r.evaluations << '\n';
  os << "hessian_resets = " << r.hessian_resets << '\n';
  os << "skipped_updates = " << r.skipped_updates << '\n';
  os << "final_loss = " << format_double(r.final_breakdown.total) << '\n';
  os << "final_unweighted_loss = " << format_double(r.final_unweighted_loss) << '\n';
  for (std::size_t i = 0; i < r.final_breakdown.residual.size(); ++i) {
    os << "residual_" << names[i] << " = " << format_double(r.final_breakdown.residual[i]) << '\n';
  }
  for (std::size_t j = 0; j < r.final_breakdown.boundary.size(); ++j) {
    os << "boundary_" << names[j] << " = " << format_double(r.final_breakdown.boundary[j]) << '\n';
  }
  os << "seconds = " << format_double(r.seconds) << '\n';
  os << "seconds_per_iteration = "
     << format_double(r.iterations > 0 ? r.seconds / r.iterations : 0.0) << '\n';
  os << "\n[weights]\n";
  for (const auto& w : r.weight_history) {
    os << "iteration_" << w.iteration << " = residual " << join(w.residual_weights) << "; boundary "
       << join(w.boundary_weights) << '\n';
  }
  return os.str();
}

Checkpoint make_checkpoint(const RunConfig& config, const TrainingProblem& problem,
                           const TrainReport& r) {
  Checkpoint c;
  c.mode = problem.layout.mode();
  c.variables = problem.system.state_names();
  for (const auto& net : problem.layout.networks()) c.dims.push_back(net.dims);
  c.theta = r.theta;
  c.config_digest = config_digest(config);
  c.final_loss = r.final_breakdown.total;
  c.iterations = r.iterations;
  return c;
}

// Loads the system named by either a preset or a DSL file.
OdeSystem select_system(const std::string& preset_name, const std::filesystem::path& file) {
  if (preset_name.empty() == file.empty()) {
    throw std::invalid_argument("give exactly one of a preset or a system file");
  }
  if (!preset_name.empty()) return preset(preset_name).first;
  return parse_system(read_file(file));
}

std::string csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

}  // namespace

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(options.config);
  } catch (const ConfigError& e) {
    for (const auto& d : e.diagnostics()) {
      err << "error: " << options.config.string();
      if (d.line > 0) err << ':' << d.line;
      err << ": " << d.message << '\n';
    }
    return exit_usage;
  }
  if (options.seed) config.seed = *options.seed;
  if (!options.warm_start.empty()) {
    if (!std::filesystem::exists(options.warm_start)) {
      err << "error: warm-start checkpoint not found: " << options.warm_start.string() << '\n';
      return exit_usage;
    }
    config.warm_start = options.warm_start;
  }
  if (!options.out.empty()) config.output_dir = options.out;
  if (config.output_dir.empty()) {
    err << "error: no output directory (use --out)\n";
    return exit_usage;
  }

  const TrainingProblem problem = build_problem(config);
  std::vector<double> theta0;
  try {
    theta0 = initial_theta(config, problem);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  out << "training " << problem.layout.describe() << " on "
      << (config.preset.empty() ? config.system_file.string() : config.preset) << ", seed "
      << config.seed << '\n';
  const ProgressObserver observer = [&](const IterationInfo& info) {
    if (options.progress_every > 0 && info.iteration % options.progress_every == 0) {
      char line[128];
      std::snprintf(line, sizeof line, "iter %6d  loss %.6e  |g|inf %.3e\n", info.iteration, info.loss,
                    info.gradient_inf_norm);
      out << line << std::flush;
    }
  };

  TrainReport report;
  try {
    report = train(problem, std::move(theta0), observer);
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    write_file(config.output_dir / "report.txt",
               train_report(config, problem, TrainReport{}) + "error = " + e.what() + '\n');
    return exit_blowup;
  }

  write_file(config.output_dir / "loss_history.csv", loss_history_csv(report.loss_history));
  write_file(config.output_dir / "report.txt", train_report(config, problem, report));
  save_checkpoint(config.output_dir / "checkpoint.txt", make_checkpoint(config, problem, report));

  out << "stopped: " << to_string(report.stop_reason) << " after " << report.iterations
      << " iterations (" << report.evaluations << " evaluations, " << format_double(report.seconds)
      << " s)\nfinal loss " << format_double(report.final_breakdown.total) << '\n';

  if (!std::isfinite(report.final_breakdown.total)) return exit_blowup;
  if (report.stop_reason == StopReason::line_search_failure && report.iterations == 0) {
    err << "error: line search failed at the first iteration\n";
    return exit_failure;
  }
  return exit_ok;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  OdeSystem system = select_system(options.preset, options.system_file);
  if (options.horizon) {
    if (!(*options.horizon > 0.0)) {
      err << "error: horizon must be > 0\n";
      return exit_usage;
    }
    system = system.with_domain(system.t0(), system.t0() + *options.horizon);
  }
  if (options.dt && options.tol) {
    err << "error: --dt and --tol are mutually exclusive\n";
    return exit_usage;
  }
  const auto smib = smib_coefficients(system);
  if (options.energy && !smib) {
    err << "error: the energy column needs an SMIB-shaped system\n";
    return exit_usage;
  }
  ExtraColumn energy;
  if (options.energy) {
    energy = [k = *smib](double, std::span<const double> s) { return smib_energy(k, s[0], s[1]); };
  }

  auto emit = [&](const Trajectory& traj) {
    std::ostringstream os;
    write_trajectory_csv(os, traj, "energy", energy);
    if (options.out.empty()) {
      out << os.str();
    } else {
      write_file(options.out, os.str());
    }
  };

  Trajectory traj(system.state_names(), Provenance::reference_adaptive);
  try {
    if (options.dt) {
      traj = integrate_fixed(system, *options.dt);
    } else {
      AdaptiveOptions ao;
      ao.abs_tol = ao.rel_tol = options.tol.value_or(1e-8);
      ao.output_dt = options.output_dt;
      traj = integrate_adaptive(system, ao);
    }
  } catch (const IntegrationError& e) {
    emit(e.partial());
    err << "error: " << e.what() << '\n';
    return exit_blowup;
  }
  emit(traj);

  std::ostream& info = options.out.empty() ? err : out;
  info << "final state at t = " << format_double(traj.times().back()) << ':';
  for (std::size_t v = 0; v < traj.dimension(); ++v) {
    info << ' ' << traj.names()[v] << " = " << format_double(traj.back()[v]);
  }
  info << '\n';
  if (smib && std::abs(smib->k1) <= smib->k2 && smib->k2 > 0.0) {
    const auto eq = smib_equilibrium(*smib);
    const double dd = angle_difference(traj.back()[0], eq[0]);
    const double dw = traj.back()[1] - eq[1];
    info << "equilibrium (" << format_double(eq[0]) << ", 0): distance "
         << format_double(std::max(std::abs(dd), std::abs(dw))) << " (angle modulo 2 pi)\n";
  }
  return exit_ok;
}

int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err) {
  if (options.out.empty()) {
    err << "error: no output directory (use --out)\n";
    return exit_usage;
  }
  Checkpoint ckpt;
  try {
    ckpt = load_checkpoint(options.checkpoint);
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  const OdeSystem system = select_system(options.preset, options.system_file);
  if (ckpt.variables != system.state_names()) {
    err << "error: checkpoint variables do not match the system's variables\n";
    return exit_usage;
  }
  const NetworkLayout layout = ckpt.layout();

  Trajectory reference(system.state_names(), Provenance::reference_adaptive);
  if (!options.reference_csv.empty()) {
    std::ifstream in(options.reference_csv);
    if (!in) {
      err << "error: cannot open " << options.reference_csv.string() << '\n';
      return exit_usage;
    }
    reference = read_trajectory_csv(in, Provenance::reference_adaptive);
  } else {
    AdaptiveOptions ao;
    ao.abs_tol = ao.rel_tol = options.tol;
    ao.output_dt = options.output_dt;
    try {
      reference = integrate_adaptive(system, ao);
    } catch (const IntegrationError& e) {
      err << "error: reference solver: " << e.what() << '\n';
      return exit_blowup;
    }
  }
  const Trajectory pinn = pinn_trajectory(system, layout, ckpt.theta, reference.times());

  ComparisonReport report;
  try {
    report = compare(pinn, reference);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  const auto smib = smib_coefficients(system);
  std::vector<double> target;
  if (smib && smib->k2 > 0.0 && std::abs(smib->k1) <= smib->k2) {
    target = smib_equilibrium(*smib);
    EquilibriumCheck check{target, {0}, options.equilibrium_tolerance};
    report.equilibrium_reached = reached_equilibrium(pinn, check);
  }

  const auto& names = report.names;
  std::ostringstream rep;
  rep << "[compare]\n";
  rep << "checkpoint = " << options.checkpoint.generic_string() << '\n';
  rep << "system = " << (options.preset.empty() ? options.system_file.generic_string() : options.preset) << '\n';
  rep << "points = " << report.times.size() << '\n';
  for (std::size_t v = 0; v < names.size(); ++v) rep << "rmse_" << names[v] << " = " << format_double(report.rmse[v]) << '\n';
  rep << "rmse_pooled = " << format_double(report.pooled_rmse) << '\n';
  for (std::size_t v = 0; v < names.size(); ++v) {
    rep << "max_error_" << names[v] << " = " << format_double(report.max_abs_error[v]) << '\n';
    rep << "max_error_time_" << names[v] << " = " << format_double(report.max_error_time[v]) << '\n';
  }
  rep << "pinn_final = " << join({pinn.back().begin(), pinn.back().end()}) << '\n';
  rep << "reference_final = " << join({reference.back().begin(), reference.back().end()}) << '\n';
  if (report.equilibrium_reached) {
    rep << "equilibrium = " << join(target) << '\n';
    rep << "equilibrium_tolerance = " << format_double(options.equilibrium_tolerance) << '\n';
    rep << "equilibrium_reached = " << (*report.equilibrium_reached ? "true" : "false") << '\n';
  }

  std::ostringstream errors;
  errors << 't';
  for (const auto& n : names) errors << ',' << n;
  errors << '\n';
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    errors << format_double(report.times[k]);
    for (std::size_t v = 0; v < names.size(); ++v) errors << ',' << format_double(report.error[v][k]);
    errors << '\n';
  }

  const auto& dir = options.out;
  write_file(dir / "report.txt", rep.str());
  write_file(dir / "errors.csv", errors.str());
  write_file(dir / "pinn.csv", csv(pinn));
  write_file(dir / "reference.csv", csv(reference));
  for (std::size_t v = 0; v < names.size(); ++v) {
    const std::vector<Series> series{
        {"PINN", pinn.times(), pinn.column(v), "#d62728", false},
        {"reference", reference.times(), reference.column(v), "#1f77b4", true}};
    write_file(dir / (names[v] + ".svg"),
               line_chart(series, {names[v] + "(t)", "t (s)", names[v], 640, 400}));
  }
  if (names.size() >= 2) {
    const std::vector<Series> series{
        {"PINN", pinn.column(0), pinn.column(1), "#d62728", false},
        {"reference", reference.column(0), reference.column(1), "#1f77b4", true}};
    write_file(dir / "phase.svg",
               line_chart(series, {"phase portrait", names[0], names[1], 560, 480}));
  }

  out << rep.str();
  return exit_ok;
}

}  // namespace pinnworks
