#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pinnworks/optim.hpp"

namespace {

using pinnworks::minimize;
using pinnworks::OptimizerConfig;
using pinnworks::StopReason;

double rosenbrock(std::span<const double> x, std::span<double> g) {
  const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  if (!g.empty()) {
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
  }
  return a * a + 100.0 * b * b;
}

// 0.5 x'Ax - b'x with A = M'M + I.
struct Quadratic {
  std::size_t n;
  std::vector<double> a, b;

  Quadratic(std::size_t size, std::uint64_t seed) : n(size), a(size * size), b(size) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> m(n * n);
    for (double& v : m) v = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = i == j ? 1.0 : 0.0;
        for (std::size_t k = 0; k < n; ++k) s += m[k * n + i] * m[k * n + j];
        a[i * n + j] = s;
      }
      b[i] = u(rng);
    }
  }

  double operator()(std::span<const double> x, std::span<double> g) const {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += a[i * n + j] * x[j];
      if (!g.empty()) g[i] = ax - b[i];
      f += 0.5 * x[i] * ax - b[i] * x[i];
    }
    return f;
  }
};

TEST(Minimize, OneDimensionalQuadratic) {
  auto f = [](std::span<const double> x, std::span<double> g) {
    if (!g.empty()) g[0] = 2.0 * (x[0] - 3.0);
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  const auto r = minimize(f, {0.0}, OptimizerConfig{});
  EXPECT_NEAR(r.x[0], 3.0, 1e-10);
  EXPECT_LE(r.iterations, 5);
  EXPECT_EQ(r.stop_reason, StopReason::converged_gradient);
}

TEST(Minimize, Rosenbrock) {
  const auto r = minimize(rosenbrock, {-1.2, 1.0}, OptimizerConfig{});
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_LE(r.iterations, 200);
}

TEST(Minimize, RosenbrockLimitedMemory) {
  OptimizerConfig cfg;
  cfg.method = pinnworks::HessianMethod::lbfgs;
  const auto r = minimize(rosenbrock, {-1.2, 1.0}, cfg);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
}

TEST(Minimize, SumOfSquaresIn502Dimensions) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> x0(502);
  for (double& v : x0) v = u(rng);
  auto f = [](std::span<const double> x, std::span<double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += x[i] * x[i];
      if (!g.empty()) g[i] = 2.0 * x[i];
    }
    return s;
  };
  const auto r = minimize(f, x0, OptimizerConfig{});
  for (double v : r.x) ASSERT_NEAR(v, 0.0, 1e-8);
}

TEST(Minimize, LossIsMonotoneOnFixedObjective) {
  Quadratic q(30, 4);
  for (auto method : {pinnworks::HessianMethod::dense_bfgs, pinnworks::HessianMethod::lbfgs}) {
    OptimizerConfig cfg;
    cfg.method = method;
    const auto r = minimize(q, std::vector<double>(30, 1.0), cfg);
    for (std::size_t k = 1; k < r.loss_history.size(); ++k) {
      EXPECT_LE(r.loss_history[k], r.loss_history[k - 1]);
    }
    const auto rb = minimize(rosenbrock, {-1.2, 1.0}, cfg);
    for (std::size_t k = 1; k < rb.loss_history.size(); ++k) {
      EXPECT_LE(rb.loss_history[k], rb.loss_history[k - 1]);
    }
  }
}

// With exact line searches BFGS reproduces conjugate directions and stops
// within n + 1 iterations on a strictly convex quadratic.
TEST(Minimize, FiniteTerminationWithExactLineSearch) {
  for (std::size_t n = 2; n <= 10; ++n) {
    Quadratic q(n, 100 + n);
    OptimizerConfig cfg;
    cfg.line_search.kind = pinnworks::LineSearchKind::exact;
    cfg.scale_initial_hessian = false;
    cfg.stop.gradient_tol = 1e-9;
    const auto r = minimize(q, std::vector<double>(n, 0.5), cfg);
    EXPECT_EQ(r.stop_reason, StopReason::converged_gradient) << "n = " << n;
    EXPECT_LE(r.iterations, static_cast<int>(n) + 1) << "n = " << n;
  }
}

TEST(Minimize, NonFiniteStartThrows) {
  auto f = [](std::span<const double> x, std::span<double> g) {
    if (!g.empty()) g[0] = 1.0;
    return std::log(x[0]);
  };
  EXPECT_THROW(minimize(f, {-1.0}, OptimizerConfig{}), std::domain_error);
  EXPECT_THROW(minimize(rosenbrock, {std::numeric_limits<double>::quiet_NaN(), 0.0}, OptimizerConfig{}),
               std::domain_error);
}

TEST(Minimize, InconsistentGradientStopsWithLineSearchFailure) {
  // The reported gradient points uphill, so no step can satisfy sufficient decrease.
  auto f = [](std::span<const double> x, std::span<double> g) {
    if (!g.empty()) g[0] = -2.0 * (x[0] - 1.0);
    return (x[0] - 1.0) * (x[0] - 1.0);
  };
  const auto r = minimize(f, {3.0}, OptimizerConfig{});
  EXPECT_EQ(r.stop_reason, StopReason::line_search_failure);
  EXPECT_EQ(r.iterations, 0);
}

TEST(Minimize, ObjectiveChangeResetsCurvature) {
  double scale = 1.0;
  auto scaled = [&](std::span<const double> x, std::span<double> g) {
    const double v = rosenbrock(x, g);
    for (double& gi : g) gi *= scale;
    return scale * v;
  };
  int changes = 0;
  const auto r = minimize(scaled, {-1.2, 1.0}, OptimizerConfig{}, [&](const pinnworks::IterationInfo& info) {
    if (info.iteration % 10 == 0 && changes < 3) {
      scale *= 2.0;
      ++changes;
      return pinnworks::CallbackAction::objective_changed;
    }
    return pinnworks::CallbackAction::proceed;
  });
  EXPECT_EQ(changes, 3);
  EXPECT_GE(r.hessian_resets, 3);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
}

TEST(Minimize, CallbackStop) {
  const auto r = minimize(rosenbrock, {-1.2, 1.0}, OptimizerConfig{}, [](const pinnworks::IterationInfo& info) {
    return info.iteration == 4 ? pinnworks::CallbackAction::stop : pinnworks::CallbackAction::proceed;
  });
  EXPECT_EQ(r.stop_reason, StopReason::callback);
  EXPECT_EQ(r.iterations, 4);
  EXPECT_EQ(r.loss_history.size(), 5u);
}

TEST(Minimize, LossTargetAndIterationCap) {
  OptimizerConfig cfg;
  cfg.stop.loss_target = 1e-3;
  auto r = minimize(rosenbrock, {-1.2, 1.0}, cfg);
  EXPECT_EQ(r.stop_reason, StopReason::reached_loss_target);
  EXPECT_LE(r.loss, 1e-3);
  cfg = OptimizerConfig{};
  cfg.stop.max_iterations = 3;
  r = minimize(rosenbrock, {-1.2, 1.0}, cfg);
  EXPECT_EQ(r.stop_reason, StopReason::max_iterations);
  EXPECT_EQ(r.iterations, 3);
}

TEST(Minimize, Deterministic) {
  Quadratic q(40, 9);
  const auto a = minimize(q, std::vector<double>(40, -1.0), OptimizerConfig{});
  const auto b = minimize(q, std::vector<double>(40, -1.0), OptimizerConfig{});
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.x, b.x);
}

TEST(InverseHessian, StaysSymmetricAndPositiveDefinite) {
  const std::size_t n = 8;
  const Quadratic q(n, 6);  // curvature pairs y = A s from a fixed SPD matrix
  pinnworks::InverseHessian h(n);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> s(n), y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) s[i] = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) y[i] += q.a[i * n + j] * s[j];
    }
    if (it % 7 == 3) {
      // Negative curvature must be refused.
      for (double& v : y) v = -v;
      EXPECT_FALSE(h.update(s, y));
    } else {
      EXPECT_TRUE(h.update(s, y));
    }
    ASSERT_LE(h.asymmetry(), 1e-12);

    // Cholesky succeeds iff H is positive definite.
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = h(i, j);
        for (std::size_t k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
        if (i == j) {
          ASSERT_GT(sum, 0.0) << "not positive definite after update " << it;
          l[i * n + i] = std::sqrt(sum);
        } else {
          l[i * n + j] = sum / l[j * n + j];
        }
      }
    }
  }
}

TEST(InverseHessian, SecantCondition) {
  pinnworks::InverseHessian h(3);
  const std::vector<double> s{0.3, -0.2, 0.5}, y{1.0, 0.4, 0.9};
  ASSERT_TRUE(h.update(s, y));
  std::vector<double> hy(3);
  h.apply(y, hy);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(hy[i], s[i], 1e-14);
}

TEST(WarmStart, RejectsMismatchedLayouts) {
  const std::vector<std::size_t> a{10, 10, 10}, b{10, 10};
  const pinnworks::NetworkLayout current(pinnworks::NetworkMode::symbolic, 2, a);
  const pinnworks::NetworkLayout saved(pinnworks::NetworkMode::symbolic, 2, b);
  const std::vector<double> theta(saved.param_count(), 0.1);
  try {
    pinnworks::warm_start(current, saved, theta);
    FAIL();
  } catch (const pinnworks::ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(current.describe()), std::string::npos);
    EXPECT_NE(what.find(saved.describe()), std::string::npos);
  }
  const std::vector<double> same(current.param_count(), 0.25);
  EXPECT_EQ(pinnworks::warm_start(current, current, same), same);
}

}  // namespace
