#include "pinnworks/config.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "pinnworks/checkpoint.hpp"
#include "pinnworks/models.hpp"
#include "pinnworks/parser.hpp"
#include "pinnworks/textio.hpp"

namespace pinnworks {

namespace {

std::string join_diagnostics(const std::vector<ConfigDiagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    if (d.line > 0) out += "line " + std::to_string(d.line) + ": ";
    out += d.message;
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigDiagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::vector<std::size_t> default_hidden(NetworkMode mode) {
  if (mode == NetworkMode::symbolic) return {10, 10, 10};
  return {20, 20, 20, 20};
}

std::vector<std::size_t> RunConfig::hidden_widths() const {
  return hidden.empty() ? default_hidden(mode) : hidden;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  static const std::map<std::string, std::set<std::string>, std::less<>> known{
      {"system", {"preset", "file"}},
      {"network", {"mode", "hidden"}},
      {"sampler", {"kind", "dt", "count", "seed", "quadrature"}},
      {"optimizer",
       {"method", "max_iterations", "gradient_tol", "loss_delta_tol", "loss_target", "lbfgs_memory"}},
      {"adaptive", {"enabled", "period", "gamma", "adapt_residual"}},
      {"run", {"seed", "warm_start", "out"}},
  };

  RunConfig c;
  std::vector<ConfigDiagnostic> diags;
  auto resolve = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };

  std::string section;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        diags.push_back({line_no, "malformed section header"});
        continue;
      }
      section = std::string(line.substr(1, line.size() - 2));
      if (!known.contains(section)) diags.push_back({line_no, "unknown section [" + section + "]"});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      diags.push_back({line_no, "expected key = value"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view v = trim(line.substr(eq + 1));
    const auto sec = known.find(section);
    if (sec == known.end()) {
      if (section.empty()) diags.push_back({line_no, "'" + key + "' appears before any section"});
      continue;
    }
    if (!sec->second.contains(key)) {
      diags.push_back({line_no, "unknown key '" + key + "' in [" + section + "]"});
      continue;
    }
    if (!seen.insert(section + "." + key).second) {
      diags.push_back({line_no, "duplicate key '" + key + "' in [" + section + "]"});
      continue;
    }
    try {
      const std::string s = section + "." + key;
      if (s == "system.preset") {
        c.preset = std::string(v);
      } else if (s == "system.file") {
        c.system_file = resolve(v);
      } else if (s == "network.mode") {
        c.mode = parse_network_mode(v);
      } else if (s == "network.hidden") {
        for (const auto& w : split(v, ',')) {
          const long long n = parse_integer(w);
          if (n <= 0) throw std::invalid_argument("hidden widths must be positive");
          c.hidden.push_back(static_cast<std::size_t>(n));
        }
      } else if (s == "sampler.kind") {
        if (v == "grid") {
          c.sampler = SamplerKind::grid;
        } else if (v == "monte-carlo") {
          c.sampler = SamplerKind::monte_carlo;
        } else {
          throw std::invalid_argument("sampler kind must be grid or monte-carlo");
        }
      } else if (s == "sampler.dt") {
        c.dt = parse_double(v);
        if (!(c.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
      } else if (s == "sampler.count") {
        const long long n = parse_integer(v);
        if (n <= 0) throw std::invalid_argument("count must be > 0");
        c.count = static_cast<std::size_t>(n);
      } else if (s == "sampler.seed") {
        const long long n = parse_integer(v);
        if (n < 0) throw std::invalid_argument("seed must be >= 0");
        c.sampler_seed = static_cast<std::uint64_t>(n);
      } else if (s == "sampler.quadrature") {
        c.quadrature = parse_quadrature(v);
      } else if (s == "optimizer.method") {
        if (v == "bfgs") {
          c.method = HessianMethod::dense_bfgs;
        } else if (v == "lbfgs") {
          c.method = HessianMethod::lbfgs;
        } else {
          throw std::invalid_argument("method must be bfgs or lbfgs");
        }
      } else if (s == "optimizer.max_iterations") {
        const long long n = parse_integer(v);
        if (n < 0 || n > 100'000'000) throw std::invalid_argument("max_iterations out of range");
        c.max_iterations = static_cast<int>(n);
      } else if (s == "optimizer.gradient_tol") {
        c.gradient_tol = parse_double(v);
        if (!(c.gradient_tol >= 0.0)) throw std::invalid_argument("gradient_tol must be >= 0");
      } else if (s == "optimizer.loss_delta_tol") {
        c.loss_delta_tol = parse_double(v);
        if (!(c.loss_delta_tol >= 0.0)) throw std::invalid_argument("loss_delta_tol must be >= 0");
      } else if (s == "optimizer.loss_target") {
        c.loss_target = parse_double(v);
      } else if (s == "optimizer.lbfgs_memory") {
        const long long n = parse_integer(v);
        if (n <= 0) throw std::invalid_argument("lbfgs_memory must be > 0");
        c.lbfgs_memory = static_cast<std::size_t>(n);
      } else if (s == "adaptive.enabled") {
        c.adaptive.enabled = parse_bool(v);
      } else if (s == "adaptive.period") {
        const long long n = parse_integer(v);
        if (n <= 0) throw std::invalid_argument("period must be > 0");
        c.adaptive.period = static_cast<int>(n);
      } else if (s == "adaptive.gamma") {
        c.adaptive.gamma = parse_double(v);
        if (!(c.adaptive.gamma >= 0.0 && c.adaptive.gamma <= 1.0)) {
          throw std::invalid_argument("gamma must lie in [0, 1]");
        }
      } else if (s == "adaptive.adapt_residual") {
        c.adaptive.adapt_residual = parse_bool(v);
      } else if (s == "run.seed") {
        const long long n = parse_integer(v);
        if (n < 0) throw std::invalid_argument("seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(n);
      } else if (s == "run.warm_start") {
        c.warm_start = resolve(v);
      } else if (s == "run.out") {
        c.output_dir = resolve(v);
      }
    } catch (const std::invalid_argument& e) {
      diags.push_back({line_no, section + "." + key + ": " + e.what()});
    }
  }

  if (c.preset.empty() == c.system_file.empty()) {
    diags.push_back({0, "[system] needs exactly one of preset or file"});
  }
  if (!c.preset.empty()) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), c.preset) == names.end()) {
      diags.push_back({0, "unknown preset '" + c.preset + "'"});
    }
  }
  if (!c.system_file.empty() && !std::filesystem::exists(c.system_file)) {
    diags.push_back({0, "system file not found: " + c.system_file.string()});
  }
  if (!c.warm_start.empty() && !std::filesystem::exists(c.warm_start)) {
    diags.push_back({0, "warm-start checkpoint not found: " + c.warm_start.string()});
  }
  if (!diags.empty()) throw ConfigError(std::move(diags));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError({{0, e.what()}});
  }
  return parse_config(text, path.parent_path());
}

std::string canonical_text(const RunConfig& c) {
  std::ostringstream os;
  os << "[system]\n";
  if (!c.preset.empty()) os << "preset = " << c.preset << '\n';
  if (!c.system_file.empty()) os << "file = " << c.system_file.generic_string() << '\n';
  os << "[network]\nmode = " << to_string(c.mode) << "\nhidden = " << join_sizes(c.hidden_widths())
     << '\n';
  os << "[sampler]\nkind = " << (c.sampler == SamplerKind::grid ? "grid" : "monte-carlo") << '\n';
  if (c.sampler == SamplerKind::grid) {
    os << "dt = " << format_double(c.dt) << "\nquadrature = " << to_string(c.quadrature) << '\n';
  } else {
    os << "count = " << c.count << "\nseed = " << c.sampler_seed.value_or(c.seed) << '\n';
  }
  os << "[optimizer]\nmethod = " << (c.method == HessianMethod::dense_bfgs ? "bfgs" : "lbfgs")
     << "\nmax_iterations = " << c.max_iterations << "\ngradient_tol = " << format_double(c.gradient_tol)
     << "\nloss_delta_tol = " << format_double(c.loss_delta_tol) << '\n';
  if (c.loss_target) os << "loss_target = " << format_double(*c.loss_target) << '\n';
  if (c.method == HessianMethod::lbfgs) os << "lbfgs_memory = " << c.lbfgs_memory << '\n';
  os << "[adaptive]\nenabled = " << (c.adaptive.enabled ? "true" : "false")
     << "\nperiod = " << c.adaptive.period << "\ngamma = " << format_double(c.adaptive.gamma)
     << "\nadapt_residual = " << (c.adaptive.adapt_residual ? "true" : "false") << '\n';
  os << "[run]\nseed = " << c.seed << '\n';
  if (!c.warm_start.empty()) os << "warm_start = " << c.warm_start.generic_string() << '\n';
  return os.str();
}

std::string config_digest(const RunConfig& config) {
  return hex64(fnv1a(canonical_text(config)));
}

OdeSystem load_system(const RunConfig& config) {
  if (!config.preset.empty()) return preset(config.preset).first;
  return parse_system(read_file(config.system_file));
}

TrainingProblem build_problem(const RunConfig& config) {
  OdeSystem system = load_system(config);
  NetworkLayout layout(config.mode, system.size(), config.hidden_widths());
  SamplingPlan plan = config.sampler == SamplerKind::grid
                          ? SamplingPlan::grid(system.t0(), system.t1(), config.dt, config.quadrature)
                          : SamplingPlan::monte_carlo(system.t0(), system.t1(), config.count,
                                                      config.sampler_seed.value_or(config.seed));
  OptimizerConfig opt;
  opt.method = config.method;
  opt.lbfgs_memory = config.lbfgs_memory;
  opt.stop.max_iterations = config.max_iterations;
  opt.stop.gradient_tol = config.gradient_tol;
  opt.stop.loss_delta_tol = config.loss_delta_tol;
  if (config.loss_target) opt.stop.loss_target = *config.loss_target;
  const std::size_t n = system.size();
  return TrainingProblem{std::move(system), std::move(layout), std::move(plan),
                         LossAssembly::uniform(n, config.adaptive), opt};
}

std::vector<double> initial_theta(const RunConfig& config, const TrainingProblem& problem) {
  if (config.warm_start.empty()) {
    return init_ensemble(config.mode, problem.system.size(), config.hidden_widths(), config.seed).theta;
  }
  const Checkpoint saved = load_checkpoint(config.warm_start);
  if (saved.variables != problem.system.state_names()) {
    throw ShapeError("checkpoint variables do not match the system's variables");
  }
  return warm_start(problem.layout, saved.layout(), saved.theta);
}

}  // namespace pinnworks
