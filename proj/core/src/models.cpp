#include "pinnworks/models.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pinnworks/parser.hpp"

namespace pinnworks {

SmibCoefficients k_from_physical(const SmibPhysical& p) {
  if (!(p.inertia > 0.0)) throw std::invalid_argument("inertia constant H must be > 0");
  if (!(p.reactance > 0.0)) throw std::invalid_argument("reactance X must be > 0");
  if (!(p.synchronous_speed > 0.0)) throw std::invalid_argument("synchronous speed must be > 0");
  const double factor = p.synchronous_speed / (2.0 * p.inertia);
  return {factor * p.mechanical_torque,
          factor * p.internal_voltage * p.bus_voltage / p.reactance,
          factor * p.damping};
}

std::string smib_source(const SmibScenario& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# %s\n"
                "param K1 = %.17g;\nparam K2 = %.17g;\nparam K3 = %.17g;\n"
                "d(delta)/dt = omega;\n"
                "d(omega)/dt = K1 - K2 * sin(delta) - K3 * omega;\n"
                "init delta = %.17g;\ninit omega = %.17g;\n"
                "domain 0 %.17g;\n",
                s.label.empty() ? "smib" : s.label.c_str(), s.k.k1, s.k.k2, s.k.k3, s.delta0,
                s.omega0, s.horizon);
  return buf;
}

OdeSystem smib_system(const SmibScenario& scenario) {
  if (!(scenario.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  return parse_system(smib_source(scenario));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"normal", "case1", "case2", "pole-slipping",
                                              "undamped"};
  return names;
}

std::pair<OdeSystem, SmibScenario> preset(std::string_view name) {
  SmibScenario s;
  s.k = {5.0, 10.0, 1.7};
  s.delta0 = -1.0;
  s.omega0 = 7.0;
  s.horizon = 10.0;
  if (name == "normal") {
  } else if (name == "case1") {
    s.delta0 = 1.0;
    s.omega0 = -5.0;
  } else if (name == "case2") {
    s.delta0 = 0.0;
    s.omega0 = 2.0;
  } else if (name == "pole-slipping") {
    s.k.k3 = 1.6;
  } else if (name == "undamped") {
    s.k.k3 = 0.0;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  s.label = std::string(name);
  return {smib_system(s), s};
}

std::vector<double> smib_equilibrium(const SmibCoefficients& k) {
  if (!(k.k2 > 0.0) || std::abs(k.k1) > k.k2) {
    throw std::domain_error("no equilibrium: |K1| exceeds K2");
  }
  return {std::asin(k.k1 / k.k2), 0.0};
}

double smib_energy(const SmibCoefficients& k, double delta, double omega) {
  return 0.5 * omega * omega - k.k1 * delta - k.k2 * std::cos(delta);
}

std::optional<SmibCoefficients> smib_coefficients(const OdeSystem& system) {
  const std::vector<std::string> states{"delta", "omega"};
  if (system.state_names() != states) return std::nullopt;
  const auto k1 = system.parameter("K1"), k2 = system.parameter("K2"), k3 = system.parameter("K3");
  if (!k1 || !k2 || !k3) return std::nullopt;
  return SmibCoefficients{*k1, *k2, *k3};
}

}  // namespace pinnworks
