#include <gtest/gtest.h>

#include <cmath>

#include "pinnworks/ad.hpp"
#include "test_support.hpp"

namespace {

using pinnworks::ad::Tape;
using pinnworks::ad::Var;

TEST(Tape, ElementaryPartials) {
  Tape tape;
  const Var x = tape.variable(0.7);
  const Var y = tape.variable(-1.3);
  const Var f = sin(x) * y + exp(x / y) - tanh(y) + pow(x, 3.0) - cos(x * y);
  const auto adj = tape.adjoints(f);
  const double xv = 0.7, yv = -1.3;
  const double dfdx = std::cos(xv) * yv + std::exp(xv / yv) / yv + 3 * xv * xv + std::sin(xv * yv) * yv;
  const double dfdy = std::sin(xv) - std::exp(xv / yv) * xv / (yv * yv) -
                      (1 - std::tanh(yv) * std::tanh(yv)) + std::sin(xv * yv) * xv;
  EXPECT_NEAR(adj[x.index()], dfdx, 1e-14);
  EXPECT_NEAR(adj[y.index()], dfdy, 1e-14);
}

TEST(Tape, ConstantsStayOffTape) {
  Tape tape;
  const Var x = tape.variable(2.0);
  const std::size_t before = tape.size();
  const Var c = Var(3.0) * Var(4.0);
  EXPECT_FALSE(c.on_tape());
  EXPECT_EQ(tape.size(), before);
  const Var f = c * x;
  EXPECT_EQ(tape.adjoints(f)[x.index()], 12.0);
}

TEST(Tape, ReusedVariableAccumulates) {
  Tape tape;
  const Var x = tape.variable(1.5);
  Var f = x;
  for (int i = 0; i < 4; ++i) f = f * x;  // x^5
  EXPECT_NEAR(tape.adjoints(f)[x.index()], 5 * std::pow(1.5, 4), 1e-12);
}

TEST(Tape, MatchesFiniteDifferences) {
  auto g = [](double a, double b) { return std::tanh(a * b - std::sin(a)) / (1.0 + b * b); };
  Tape tape;
  const Var a = tape.variable(0.3), b = tape.variable(0.9);
  const Var f = tanh(a * b - sin(a)) / (Var(1.0) + b * b);
  const auto adj = tape.adjoints(f);
  const double fa = testing_support::central_difference([&](double v) { return g(v, 0.9); }, 0.3, 1e-6);
  const double fb = testing_support::central_difference([&](double v) { return g(0.3, v); }, 0.9, 1e-6);
  EXPECT_LE(testing_support::rel_error(adj[a.index()], fa), 1e-8);
  EXPECT_LE(testing_support::rel_error(adj[b.index()], fb), 1e-8);
}

}  // namespace
