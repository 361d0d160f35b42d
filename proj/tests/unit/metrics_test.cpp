#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pinnworks/metrics.hpp"

namespace {

using pinnworks::compare;
using pinnworks::Provenance;
using pinnworks::Trajectory;

Trajectory make(const std::vector<double>& times, const std::function<std::array<double, 2>(double)>& f,
                Provenance p = Provenance::pinn) {
  Trajectory t({"delta", "omega"}, p);
  for (double s : times) {
    const auto v = f(s);
    t.append(s, v);
  }
  return t;
}

std::vector<double> grid(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = 0.1 * static_cast<double>(k);
  return t;
}

TEST(Rmse, IdenticalIsZero) {
  const auto a = make(grid(50), [](double t) { return std::array<double, 2>{std::sin(t), std::cos(t)}; });
  const auto r = compare(a, a);
  EXPECT_EQ(r.rmse, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(r.pooled_rmse, 0.0);
  EXPECT_EQ(r.overall_max_error, 0.0);
}

TEST(Rmse, ConstantOffset) {
  const auto g = grid(40);
  const auto a = make(g, [](double t) { return std::array<double, 2>{t, -t}; });
  const auto b = make(g, [](double t) { return std::array<double, 2>{t - 0.25, -t + 3.0}; });
  const auto r = compare(a, b);
  EXPECT_NEAR(r.rmse[0], 0.25, 1e-15);
  EXPECT_NEAR(r.rmse[1], 3.0, 1e-14);
  EXPECT_NEAR(r.pooled_rmse, std::sqrt((0.0625 + 9.0) / 2), 1e-14);
  EXPECT_NEAR(r.max_abs_error[1], 3.0, 1e-14);
  EXPECT_NEAR(r.error[0][5], 0.25, 1e-15);
}

TEST(Rmse, HandComputed) {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 0, 3, 8};
  EXPECT_DOUBLE_EQ(pinnworks::rmse(a, b), std::sqrt(20.0 / 4));
  EXPECT_THROW(pinnworks::rmse(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Rmse, SymmetricAndTriangle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30), b(30), c(30);
    for (std::size_t k = 0; k < 30; ++k) {
      a[k] = n(rng);
      b[k] = n(rng);
      c[k] = n(rng);
    }
    const double ab = pinnworks::rmse(a, b), ba = pinnworks::rmse(b, a);
    EXPECT_EQ(ab, ba);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, pinnworks::rmse(a, c) + pinnworks::rmse(c, b) + 1e-15);
  }
}

TEST(Compare, MaxErrorLocation) {
  const auto g = grid(20);
  const auto a = make(g, [](double) { return std::array<double, 2>{0.0, 0.0}; });
  const auto b = make(g, [](double t) { return std::array<double, 2>{t > 0.65 && t < 0.75 ? -2.0 : 0.0, 0.5}; });
  const auto r = compare(a, b);
  EXPECT_EQ(r.max_abs_error[0], 2.0);
  EXPECT_NEAR(r.max_error_time[0], 0.7, 1e-12);
  EXPECT_EQ(r.overall_max_error, 2.0);
  EXPECT_NEAR(r.overall_max_error_time, 0.7, 1e-12);
}

TEST(Compare, Mismatches) {
  const auto a = make(grid(10), [](double) { return std::array<double, 2>{0.0, 0.0}; });
  EXPECT_THROW(compare(a, make(grid(11), [](double) { return std::array<double, 2>{0.0, 0.0}; })),
               std::invalid_argument);
  auto shifted = grid(10);
  shifted[3] += 0.01;
  EXPECT_THROW(compare(a, make(shifted, [](double) { return std::array<double, 2>{0.0, 0.0}; })),
               std::invalid_argument);
  Trajectory swapped({"omega", "delta"}, Provenance::pinn);
  for (double t : grid(10)) swapped.append(t, std::vector<double>{0.0, 0.0});
  EXPECT_THROW(compare(a, swapped), std::invalid_argument);
  Trajectory one({"delta"}, Provenance::pinn);
  for (double t : grid(10)) one.append(t, std::vector<double>{0.0});
  EXPECT_THROW(compare(a, one), std::invalid_argument);
}

TEST(AngleDifference, WrapsIntoHalfOpenInterval) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(pinnworks::angle_difference(pi / 6 + 2 * pi, pi / 6), 0.0, 1e-12);
  EXPECT_NEAR(pinnworks::angle_difference(0.1, -0.1), 0.2, 1e-15);
  EXPECT_NEAR(pinnworks::angle_difference(-pi + 0.1, pi - 0.1), 0.2, 1e-12);
  EXPECT_NEAR(pinnworks::angle_difference(pi, 0.0), pi, 1e-15);
  for (double x = -20.0; x < 20.0; x += 0.37) {
    const double d = pinnworks::angle_difference(x, 1.0);
    EXPECT_GT(d, -pi);
    EXPECT_LE(d, pi);
    EXPECT_NEAR(std::remainder(d - (x - 1.0), 2 * pi), 0.0, 1e-12);
  }
}

TEST(Equilibrium, PeriodicAndTolerance) {
  const double pi = std::numbers::pi;
  const pinnworks::EquilibriumCheck check{{pi / 6, 0.0}, {0}, 0.05};
  auto ends_at = [](double d, double w) {
    Trajectory t({"delta", "omega"}, Provenance::pinn);
    t.append(0.0, std::vector<double>{0.0, 0.0});
    t.append(1.0, std::vector<double>{d, w});
    return t;
  };
  EXPECT_TRUE(pinnworks::reached_equilibrium(ends_at(pi / 6 + 2 * pi, 0.01), check));
  EXPECT_TRUE(pinnworks::reached_equilibrium(ends_at(pi / 6 + 0.04, -0.04), check));
  EXPECT_FALSE(pinnworks::reached_equilibrium(ends_at(pi / 6 + 0.06, 0.0), check));
  EXPECT_FALSE(pinnworks::reached_equilibrium(ends_at(pi / 6, 0.06), check));
  pinnworks::EquilibriumCheck strict = check;
  strict.periodic.clear();
  EXPECT_FALSE(pinnworks::reached_equilibrium(ends_at(pi / 6 + 2 * pi, 0.0), strict));
}

}  // namespace
