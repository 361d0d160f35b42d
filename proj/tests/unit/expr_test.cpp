#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pinnworks/expr.hpp"
#include "pinnworks/parser.hpp"
#include "test_support.hpp"

namespace {

using pinnworks::Expr;
using pinnworks::ExprKind;
using pinnworks::NameValues;
using namespace testing_support;

const NameValues smib_params{{"K1", 5.0}, {"K2", 10.0}, {"K3", 1.7}};

Expr omega_rhs() {
  return pinnworks::parse_expression("K1 - K2*sin(delta) - K3*omega", {"delta", "omega"},
                                     {"K1", "K2", "K3"});
}

TEST(Eval, SwingEquationAtInitialState) {
  // 5 - 10 sin(-1) - 1.7 * 7, with sin(-1) = -0.8414709848078965
  const double expected = 5.0 + 10.0 * 0.8414709848078965 - 1.7 * 7.0;
  const double got = pinnworks::eval(omega_rhs(), 0.0, {{"delta", -1.0}, {"omega", 7.0}}, smib_params);
  EXPECT_NEAR(got, expected, 1e-14);
  EXPECT_NEAR(got, 1.5147098, 1e-7);
}

TEST(Eval, BareVariable) {
  EXPECT_EQ(pinnworks::eval(Expr::state("omega"), 0.0, {{"omega", 7.0}}, {}), 7.0);
}

TEST(Eval, EquilibriumIsZero) {
  const double v = pinnworks::eval(omega_rhs(), 0.0, {{"delta", std::numbers::pi / 6}, {"omega", 0.0}},
                                   smib_params);
  EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Eval, DivisionByZeroThrows) {
  const Expr e = Expr::binary(ExprKind::Div, Expr::constant(1.0), Expr::state("x"));
  EXPECT_THROW(pinnworks::eval(e, 0.0, {{"x", 0.0}}, {}), pinnworks::EvalError);
}

TEST(Eval, UnboundNameThrows) {
  EXPECT_THROW(pinnworks::eval(Expr::param("K9"), 0.0, {}, {}), pinnworks::EvalError);
}

TEST(Eval, IsPure) {
  const Expr e = omega_rhs();
  const NameValues s{{"delta", 0.37}, {"omega", -1.25}};
  const double a = pinnworks::eval(e, 0.0, s, smib_params);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a, pinnworks::eval(e, 0.0, s, smib_params));
}

TEST(Eval, TimeNode) {
  const Expr e = pinnworks::parse_expression("t^2 + x", {"x"}, {});
  EXPECT_DOUBLE_EQ(pinnworks::eval(e, 3.0, {{"x", 1.0}}, {}), 10.0);
}

TEST(Diff, SwingEquationByDelta) {
  const Expr d = pinnworks::diff(omega_rhs(), "delta");
  const Expr expected = pinnworks::parse_expression("-(K2*cos(delta))", {"delta", "omega"},
                                                    {"K1", "K2", "K3"});
  EXPECT_EQ(pinnworks::to_string(d), pinnworks::to_string(expected));
  EXPECT_EQ(d, expected);
}

TEST(Diff, IndependentVariableGivesZero) {
  const Expr d = pinnworks::diff(Expr::state("omega"), "delta");
  EXPECT_TRUE(d.is_constant(0.0));
}

TEST(Diff, ValueMatchesFiniteDifference) {
  const Expr e = omega_rhs();
  const double v = pinnworks::eval(pinnworks::diff(e, "delta"), 0.0, {{"delta", -1.0}, {"omega", 7.0}},
                                   smib_params);
  EXPECT_NEAR(v, -10.0 * std::cos(-1.0), 1e-14);
  EXPECT_NEAR(v, -5.4030230, 1e-7);
  auto f = [&](double d) { return pinnworks::eval(e, 0.0, {{"delta", d}, {"omega", 7.0}}, smib_params); };
  EXPECT_LE(rel_error(v, central_difference(f, -1.0, 1e-6), 0.0), 1e-8);
}

TEST(Diff, FoldsConstants) {
  using namespace pinnworks::fold;
  EXPECT_TRUE(add(Expr::constant(2.0), Expr::constant(3.0)).is_constant(5.0));
  EXPECT_EQ(add(Expr::state("x"), Expr::constant(0.0)), Expr::state("x"));
  EXPECT_EQ(mul(Expr::state("x"), Expr::constant(1.0)), Expr::state("x"));
  EXPECT_TRUE(mul(Expr::constant(0.0), Expr::state("x")).is_constant(0.0));
  // d(3x)/dx folds to the constant 3
  EXPECT_TRUE(pinnworks::diff(pinnworks::parse_expression("3*x", {"x"}, {}), "x").is_constant(3.0));
}

// eval(diff(e, v)) against a central difference over 1000 random trees.
TEST(DiffProperty, RandomTreesMatchFiniteDifferences) {
  ExprGenerator gen(20240611, {"x", "y"}, {"a"});
  int checked = 0, attempts = 0;
  while (checked < 1000) {
    ASSERT_LT(++attempts, 20000) << "too many rejected samples";
    const Expr e = gen.generate(6);
    const double t = gen.uniform(-2.0, 2.0);
    const double x0 = gen.uniform(-2.0, 2.0);
    const double y0 = gen.uniform(-2.0, 2.0);
    const NameValues params{{"a", gen.uniform(-2.0, 2.0)}};
    const std::string wrt = checked % 2 ? "x" : "y";
    auto f = [&](double v) {
      NameValues s{{"x", x0}, {"y", y0}};
      s[wrt] = v;
      return pinnworks::eval(e, t, s, params);
    };
    const double v0 = wrt == "x" ? x0 : y0;
    const double h = 1e-6 * std::max(1.0, std::abs(v0));
    double fd = 0.0, exact = 0.0;
    try {
      // Stay away from singular points where a difference quotient is meaningless.
      for (double probe : {v0 - 2 * h, v0 - h, v0, v0 + h, v0 + 2 * h}) {
        const double fv = f(probe);
        if (!std::isfinite(fv) || std::abs(fv) > 1e4) throw pinnworks::EvalError("out of range");
      }
      fd = central_difference(f, v0, h);
      exact = pinnworks::eval(pinnworks::diff(e, wrt), t, {{"x", x0}, {"y", y0}}, params);
      // Reject ill-conditioned samples: curvature so large that the difference
      // quotient itself carries more than the tolerance in truncation error.
      const double fd_coarse = central_difference(f, v0, 10 * h);
      if (!std::isfinite(exact) || std::abs(fd_coarse - fd) > 1e-7 * std::max(1.0, std::abs(fd))) {
        continue;
      }
    } catch (const pinnworks::EvalError&) {
      continue;
    }
    EXPECT_LE(rel_error(exact, fd), 1e-6)
        << pinnworks::to_string(e) << " d/d" << wrt << " at x=" << x0 << " y=" << y0 << " t=" << t;
    ++checked;
  }
}

TEST(Printer, NegativeConstantsParenthesized) {
  const Expr e = Expr::binary(ExprKind::Sub, Expr::state("x"), Expr::constant(-2.5));
  EXPECT_EQ(pinnworks::to_string(e), "x - (-2.5)");
}

TEST(Printer, RoundTripsRandomTrees) {
  ExprGenerator gen(7, {"x", "y"}, {"a", "b"});
  for (int i = 0; i < 500; ++i) {
    const Expr e = gen.generate(6);
    const Expr back = pinnworks::parse_expression(pinnworks::to_string(e), {"x", "y"}, {"a", "b"});
    ASSERT_EQ(back, e) << pinnworks::to_string(e);
  }
}

TEST(CompiledExpr, MatchesTreeEvaluation) {
  ExprGenerator gen(99, {"x", "y"}, {"a"});
  const std::vector<std::string> states{"x", "y"}, params{"a"};
  for (int i = 0; i < 300; ++i) {
    const Expr e = gen.generate(5);
    const pinnworks::CompiledExpr c(e, states, params);
    const std::vector<double> s{gen.uniform(-1, 1), gen.uniform(-1, 1)};
    const std::vector<double> p{gen.uniform(-1, 1)};
    double tree = 0.0;
    try {
      tree = pinnworks::eval(e, 0.5, {{"x", s[0]}, {"y", s[1]}}, {{"a", p[0]}});
    } catch (const pinnworks::EvalError&) {
      EXPECT_THROW(c.evaluate<double>(0.5, std::span<const double>(s), p), pinnworks::EvalError);
      continue;
    }
    const double flat = c.evaluate<double>(0.5, std::span<const double>(s), p);
    if (std::isnan(tree)) {
      EXPECT_TRUE(std::isnan(flat));
    } else {
      EXPECT_EQ(flat, tree) << pinnworks::to_string(e);
    }
  }
}

TEST(OdeSystem, RejectsUnresolvedNames) {
  EXPECT_THROW(pinnworks::OdeSystem({"x"}, {}, {Expr::param("k")}, {1.0}, 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(pinnworks::OdeSystem({"x"}, {}, {Expr::state("y")}, {1.0}, 0.0, 1.0),
               std::invalid_argument);
}

TEST(OdeSystem, RejectsBadDomainAndCounts) {
  EXPECT_THROW(pinnworks::OdeSystem({"x"}, {}, {Expr::constant(0.0)}, {1.0}, 1.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(pinnworks::OdeSystem({"x"}, {}, {Expr::constant(0.0)}, {}, 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(pinnworks::OdeSystem({"x", "y"}, {}, {Expr::constant(0.0)}, {1.0, 2.0}, 0.0, 1.0),
               std::invalid_argument);
}

TEST(OdeSystem, JacobianIsSymbolicDerivative) {
  const auto sys = pinnworks::parse_system(smib_source());
  const std::vector<double> state{-1.0, 7.0};
  std::vector<double> stack;
  const double j10 = sys.compiled_jacobian(1, 0).evaluate<double>(0.0, std::span<const double>(state),
                                                                  sys.parameter_values(), stack);
  const double j11 = sys.compiled_jacobian(1, 1).evaluate<double>(0.0, std::span<const double>(state),
                                                                  sys.parameter_values(), stack);
  EXPECT_NEAR(j10, -10.0 * std::cos(-1.0), 1e-14);
  EXPECT_EQ(j11, -1.7);
  EXPECT_TRUE(sys.jacobian(0, 0).is_constant(0.0));
  EXPECT_TRUE(sys.jacobian(0, 1).is_constant(1.0));
}

}  // namespace
