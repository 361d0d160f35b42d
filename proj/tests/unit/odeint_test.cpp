#include <gtest/gtest.h>

#include <cmath>

#include "pinnworks/models.hpp"
#include "pinnworks/odeint.hpp"
#include "pinnworks/parser.hpp"
#include "test_support.hpp"

namespace {

using pinnworks::AdaptiveOptions;
using pinnworks::integrate_adaptive;
using pinnworks::integrate_fixed;
using pinnworks::parse_system;

// Independent RK4 on the SMIB equations, used as the oracle below.
std::array<double, 2> smib_oracle(double k1, double k2, double k3, double d0, double w0, double t1,
                                  int steps) {
  auto f = [&](double d, double w) { return std::array<double, 2>{w, k1 - k2 * std::sin(d) - k3 * w}; };
  const double h = t1 / steps;
  double d = d0, w = w0;
  for (int i = 0; i < steps; ++i) {
    const auto a = f(d, w);
    const auto b = f(d + h / 2 * a[0], w + h / 2 * a[1]);
    const auto c = f(d + h / 2 * b[0], w + h / 2 * b[1]);
    const auto e = f(d + h * c[0], w + h * c[1]);
    d += h / 6 * (a[0] + 2 * b[0] + 2 * c[0] + e[0]);
    w += h / 6 * (a[1] + 2 * b[1] + 2 * c[1] + e[1]);
  }
  return {d, w};
}

TEST(Fixed, ExponentialDecay) {
  const auto sys = parse_system("d(x)/dt = -x; init x = 1; domain 0 1");
  const auto traj = integrate_fixed(sys, 0.001);
  EXPECT_EQ(traj.size(), 1001u);
  EXPECT_NEAR(traj.back()[0], std::exp(-1.0), 1e-12);
  EXPECT_EQ(traj.times().front(), 0.0);
  EXPECT_EQ(traj.times().back(), 1.0);
  EXPECT_EQ(traj.provenance(), pinnworks::Provenance::reference_fixed);
}

TEST(Fixed, ConstantSystemIsExact) {
  const auto sys = parse_system("param c = 2.5; d(x)/dt = c; d(y)/dt = 0; init x = 1 y = -3; domain 0 4");
  const auto traj = integrate_fixed(sys, 0.25);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.at(k, 0), 1.0 + 2.5 * traj.times()[k], 1e-13);
    EXPECT_EQ(traj.at(k, 1), -3.0);
  }
}

TEST(Fixed, FourthOrderConvergence) {
  const auto sys = parse_system("d(x)/dt = y; d(y)/dt = -x; init x = 1 y = 0; domain 0 2");
  auto error = [&](double dt) {
    const auto traj = integrate_fixed(sys, dt);
    return std::hypot(traj.back()[0] - std::cos(2.0), traj.back()[1] + std::sin(2.0));
  };
  for (double dt : {0.1, 0.05, 0.02}) {
    const double ratio = error(dt) / error(dt / 2);
    EXPECT_GE(ratio, 12.0) << dt;
    EXPECT_LE(ratio, 20.0) << dt;
  }
}

TEST(Fixed, RejectsStepsThatDoNotDivideTheSpan) {
  const auto sys = parse_system("d(x)/dt = -x; init x = 1; domain 0 1");
  EXPECT_THROW(integrate_fixed(sys, 0.3), std::invalid_argument);
  EXPECT_THROW(integrate_fixed(sys, 0.0), std::invalid_argument);
  EXPECT_THROW(integrate_fixed(sys, -0.1), std::invalid_argument);
  EXPECT_NO_THROW(integrate_fixed(sys, 0.1));
}

TEST(Fixed, SmibMatchesOracle) {
  const auto [sys, sc] = pinnworks::preset("normal");
  const auto traj = integrate_fixed(sys, 1e-3);
  const auto ref = smib_oracle(sc.k.k1, sc.k.k2, sc.k.k3, sc.delta0, sc.omega0, sc.horizon, 100000);
  EXPECT_NEAR(traj.back()[0], ref[0], 1e-9);
  EXPECT_NEAR(traj.back()[1], ref[1], 1e-9);
}

TEST(Fixed, BlowUpKeepsPartialTrajectory) {
  const auto sys = parse_system("d(x)/dt = x^2; init x = 1; domain 0 2");
  try {
    integrate_fixed(sys, 0.01);
    FAIL();
  } catch (const pinnworks::IntegrationError& e) {
    EXPECT_GT(e.time(), 0.9);
    EXPECT_LT(e.time(), 2.0);
    ASSERT_GT(e.partial().size(), 0u);
    EXPECT_LT(e.partial().times().back(), e.time());
    for (std::size_t k = 0; k < e.partial().size(); ++k) EXPECT_TRUE(std::isfinite(e.partial().at(k, 0)));
  }
}

TEST(Adaptive, ExponentialDecay) {
  const auto sys = parse_system("d(x)/dt = -x; init x = 1; domain 0 1");
  AdaptiveOptions opt;
  opt.abs_tol = opt.rel_tol = 1e-10;
  const auto traj = integrate_adaptive(sys, opt);
  EXPECT_EQ(traj.size(), 101u);
  EXPECT_NEAR(traj.back()[0], std::exp(-1.0), 1e-9);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.at(k, 0), std::exp(-traj.times()[k]), 1e-9);
  }
  EXPECT_EQ(traj.provenance(), pinnworks::Provenance::reference_adaptive);
}

TEST(Adaptive, SmibAgreesWithFineFixedStep) {
  for (const char* name : {"normal", "case1", "case2", "pole-slipping"}) {
    const auto [sys, sc] = pinnworks::preset(name);
    AdaptiveOptions opt;
    opt.abs_tol = opt.rel_tol = 1e-10;
    const auto adaptive = integrate_adaptive(sys, opt);
    const auto ref = smib_oracle(sc.k.k1, sc.k.k2, sc.k.k3, sc.delta0, sc.omega0, sc.horizon, 100000);
    EXPECT_NEAR(adaptive.back()[0], ref[0], 1e-6) << name;
    EXPECT_NEAR(adaptive.back()[1], ref[1], 1e-6) << name;
  }
}

// Error of dense output on every grid point against the fixed-step oracle
// stays within a modest multiple of the requested tolerance.
TEST(Adaptive, DenseOutputTracksTolerance) {
  const auto [sys, sc] = pinnworks::preset("normal");
  const auto fine = integrate_fixed(sys, 1e-4);
  for (double tol : {1e-6, 1e-8}) {
    AdaptiveOptions opt;
    opt.abs_tol = opt.rel_tol = tol;
    const auto traj = integrate_adaptive(sys, opt);
    ASSERT_EQ(traj.size(), 1001u);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      for (std::size_t v = 0; v < 2; ++v) {
        worst = std::max(worst, std::abs(traj.at(k, v) - fine.at(k * 100, v)));
      }
    }
    EXPECT_LT(worst, 10 * tol * 10.0) << tol;  // omega peaks near 10
  }
}

TEST(Adaptive, UndampedEnergyConserved) {
  const auto [sys, sc] = pinnworks::preset("undamped");
  AdaptiveOptions opt;
  opt.abs_tol = opt.rel_tol = 1e-10;
  const auto traj = integrate_adaptive(sys, opt);
  const double e0 = pinnworks::smib_energy(sc.k, traj.at(0, 0), traj.at(0, 1));
  double drift = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    drift = std::max(drift, std::abs(pinnworks::smib_energy(sc.k, traj.at(k, 0), traj.at(k, 1)) - e0));
  }
  EXPECT_LE(drift / std::abs(e0), 1e-6);
}

TEST(Adaptive, SingularityReportsUnderflow) {
  const auto sys = parse_system("d(x)/dt = x^2; init x = 1; domain 0 2");
  try {
    integrate_adaptive(sys, AdaptiveOptions{});
    FAIL();
  } catch (const pinnworks::IntegrationError& e) {
    EXPECT_NEAR(e.time(), 1.0, 1e-3);
    EXPECT_GT(e.partial().size(), 90u);
  }
}

TEST(Adaptive, RejectsBadTolerances) {
  const auto sys = parse_system("d(x)/dt = -x; init x = 1; domain 0 1");
  AdaptiveOptions opt;
  opt.abs_tol = 0.0;
  EXPECT_THROW(integrate_adaptive(sys, opt), std::invalid_argument);
}

TEST(Adaptive, DeterministicAndCounted) {
  const auto [sys, sc] = pinnworks::preset("case1");
  pinnworks::AdaptiveStats s1, s2;
  const auto a = integrate_adaptive(sys, AdaptiveOptions{}, &s1);
  const auto b = integrate_adaptive(sys, AdaptiveOptions{}, &s2);
  EXPECT_EQ(a.times(), b.times());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.at(k, 0), b.at(k, 0));
    EXPECT_EQ(a.at(k, 1), b.at(k, 1));
  }
  EXPECT_EQ(s1.accepted, s2.accepted);
  EXPECT_GT(s1.accepted, 0u);
  // Six new stages per attempt plus the initial evaluations.
  EXPECT_GE(s1.rhs_evaluations, 6 * (s1.accepted + s1.rejected));
}

TEST(Grid, EndpointsAndSpacing) {
  const auto g = pinnworks::uniform_grid(0.0, 10.0, 0.01);
  ASSERT_EQ(g.size(), 1001u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 10.0);
  const auto short_grid = pinnworks::uniform_grid(0.0, 0.01, 0.01);
  EXPECT_EQ(short_grid.size(), 2u);
}

TEST(TrajectoryTest, Validation) {
  pinnworks::Trajectory t({"a", "b"}, pinnworks::Provenance::pinn);
  t.append(0.0, std::vector<double>{1.0, 2.0});
  EXPECT_THROW(t.append(0.0, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(t.append(1.0, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(t.append(1.0, std::vector<double>{NAN, 0.0}), std::invalid_argument);
  t.append(0.5, std::vector<double>{3.0, 4.0});
  EXPECT_EQ(t.column(1), (std::vector<double>{2.0, 4.0}));
}

}  // namespace
