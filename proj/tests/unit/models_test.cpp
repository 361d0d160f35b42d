#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pinnworks/models.hpp"
#include "pinnworks/parser.hpp"

namespace {

using pinnworks::k_from_physical;
using pinnworks::SmibPhysical;

SmibPhysical machine() {
  SmibPhysical p;
  p.inertia = 2.0;
  p.damping = 0.034;
  p.mechanical_torque = 0.1;
  p.synchronous_speed = 100.0;
  p.internal_voltage = 1.0;
  p.bus_voltage = 1.0;
  p.reactance = 5.0;
  return p;
}

TEST(Coefficients, FromPhysicalData) {
  const auto k = k_from_physical(machine());
  EXPECT_NEAR(k.k1, 2.5, 1e-12);
  EXPECT_NEAR(k.k2, 5.0, 1e-12);
  EXPECT_NEAR(k.k3, 0.85, 1e-12);

  auto p = machine();
  p.inertia = 1.0;
  p.damping = 0.034;
  p.reactance = 10.0;
  p.internal_voltage = 2.0;
  const auto k2 = k_from_physical(p);
  EXPECT_NEAR(k2.k1, 5.0, 1e-12);
  EXPECT_NEAR(k2.k2, 10.0, 1e-12);
  EXPECT_NEAR(k2.k3, 1.7, 1e-12);
}

TEST(Coefficients, ZeroTorqueGivesZeroK1) {
  auto p = machine();
  p.mechanical_torque = 0.0;
  EXPECT_EQ(k_from_physical(p).k1, 0.0);
}

TEST(Coefficients, InverselyProportionalToInertia) {
  const auto base = k_from_physical(machine());
  for (double c : {0.5, 2.0, 7.5}) {
    auto p = machine();
    p.inertia *= c;
    const auto k = k_from_physical(p);
    EXPECT_NEAR(k.k1 * c, base.k1, 1e-12);
    EXPECT_NEAR(k.k2 * c, base.k2, 1e-12);
    EXPECT_NEAR(k.k3 * c, base.k3, 1e-12);
  }
}

TEST(Coefficients, RejectsNonPositiveData) {
  for (auto field : {&SmibPhysical::inertia, &SmibPhysical::reactance, &SmibPhysical::synchronous_speed}) {
    for (double v : {0.0, -1.0}) {
      auto p = machine();
      p.*field = v;
      EXPECT_THROW(k_from_physical(p), std::invalid_argument);
    }
  }
}

TEST(Presets, InitialConditionsAndCoefficients) {
  struct Row {
    const char* name;
    double k3, d0, w0;
  };
  for (const Row& r : {Row{"normal", 1.7, -1.0, 7.0}, Row{"case1", 1.7, 1.0, -5.0}, Row{"case2", 1.7, 0.0, 2.0},
                       Row{"pole-slipping", 1.6, -1.0, 7.0}, Row{"undamped", 0.0, -1.0, 7.0}}) {
    const auto [sys, sc] = pinnworks::preset(r.name);
    EXPECT_EQ(sc.k.k1, 5.0) << r.name;
    EXPECT_EQ(sc.k.k2, 10.0) << r.name;
    EXPECT_EQ(sc.k.k3, r.k3) << r.name;
    EXPECT_EQ(sys.initial_conditions(), (std::vector<double>{r.d0, r.w0})) << r.name;
    EXPECT_EQ(sys.t0(), 0.0);
    EXPECT_EQ(sys.t1(), 10.0);
    EXPECT_EQ(sys.state_names(), (std::vector<std::string>{"delta", "omega"}));
    const auto k = pinnworks::smib_coefficients(sys);
    ASSERT_TRUE(k.has_value());
    EXPECT_EQ(*k, sc.k);
  }
  EXPECT_EQ(pinnworks::preset_names().size(), 5u);
  EXPECT_THROW(pinnworks::preset("nope"), std::invalid_argument);
}

TEST(Presets, SourceRoundTrips) {
  const auto [sys, sc] = pinnworks::preset("case2");
  EXPECT_EQ(pinnworks::parse_system(pinnworks::smib_source(sc)), sys);
}

TEST(Equilibrium, RightHandSideVanishes) {
  for (const char* name : {"normal", "pole-slipping", "undamped"}) {
    const auto [sys, sc] = pinnworks::preset(name);
    const auto eq = pinnworks::smib_equilibrium(sc.k);
    EXPECT_NEAR(eq[0], std::numbers::pi / 6, 1e-15);
    std::vector<double> out(2);
    sys.evaluate_rhs(0.0, eq, out);
    EXPECT_LE(std::abs(out[0]), 1e-12);
    EXPECT_LE(std::abs(out[1]), 1e-12);
  }
  EXPECT_THROW(pinnworks::smib_equilibrium({11.0, 10.0, 1.0}), std::domain_error);
}

TEST(Energy, ConstantAlongUndampedFlow) {
  const pinnworks::SmibCoefficients k{5.0, 10.0, 0.0};
  // dE/dt = omega * omega' - K1 omega + K2 sin(delta) omega = 0 when K3 = 0.
  for (double d : {-1.0, 0.3, 2.0}) {
    for (double w : {-3.0, 0.5, 7.0}) {
      const double h = 1e-6;
      const double dd = w, dw = k.k1 - k.k2 * std::sin(d);
      const double rate = (pinnworks::smib_energy(k, d + h * dd, w + h * dw) -
                           pinnworks::smib_energy(k, d - h * dd, w - h * dw)) /
                          (2 * h);
      EXPECT_NEAR(rate, 0.0, 1e-6);
    }
  }
}

TEST(Coefficients, UnrecognizedSystems) {
  EXPECT_FALSE(pinnworks::smib_coefficients(pinnworks::parse_system("d(x)/dt = -x; init x = 1; domain 0 1")));
}

}  // namespace
