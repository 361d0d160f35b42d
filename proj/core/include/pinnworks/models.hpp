#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pinnworks/expr.hpp"

namespace pinnworks {

/// Physical data of a single machine connected to an infinite bus.
struct SmibPhysical {
  double inertia = 0.0;            // H, s
  double damping = 0.0;            // D, per unit
  double mechanical_torque = 0.0;  // T_m, per unit
  double synchronous_speed = 0.0;  // omega_s, rad/s
  double internal_voltage = 0.0;   // E_c, per unit
  double bus_voltage = 0.0;        // V_inf, per unit
  double reactance = 0.0;          // X, per unit
};

struct SmibCoefficients {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  friend bool operator==(const SmibCoefficients&, const SmibCoefficients&) = default;
};

/// K1 = ws/2H Tm, K2 = ws/2H Ec Vinf / X, K3 = ws/2H D.
SmibCoefficients k_from_physical(const SmibPhysical& p);

struct SmibScenario {
  SmibCoefficients k;
  double delta0 = 0.0;
  double omega0 = 0.0;
  double horizon = 10.0;
  std::string label;
};

/// d(delta)/dt = omega; d(omega)/dt = K1 - K2 sin(delta) - K3 omega
OdeSystem smib_system(const SmibScenario& scenario);

/// DSL source for the same system.
std::string smib_source(const SmibScenario& scenario);

/// normal, case1, case2, pole-slipping, undamped (the last one is for tests).
std::pair<OdeSystem, SmibScenario> preset(std::string_view name);

const std::vector<std::string>& preset_names();

/// Stable equilibrium (asin(K1/K2), 0); requires |K1| <= K2.
std::vector<double> smib_equilibrium(const SmibCoefficients& k);

/// omega^2/2 - K1 delta - K2 cos(delta); conserved when K3 = 0.
double smib_energy(const SmibCoefficients& k, double delta, double omega);

/// K1..K3 of a system shaped like smib_system (states delta, omega and
/// parameters K1, K2, K3), otherwise nullopt.
std::optional<SmibCoefficients> smib_coefficients(const OdeSystem& system);

}  // namespace pinnworks
