#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pinnworks/expr.hpp"

namespace testing_support {

/// |a - b| / max(|a|, |b|, floor)
inline double rel_error(double a, double b, double floor = 1.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Plain central difference (f(x+h) - f(x-h)) / 2h.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Fourth-order central difference.
inline double central_difference4(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

/// Finite-difference gradient of f at x, coordinate by coordinate.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double rel_step) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x0 = x[k];
    const double h = rel_step * std::max(1.0, std::abs(x0));
    auto fk = [&](double v) {
      x[k] = v;
      const double r = f(x);
      x[k] = x0;
      return r;
    };
    g[k] = central_difference4(fk, x0, h);
  }
  return g;
}

/// Random expression over the given states and parameters (plus t).
class ExprGenerator {
 public:
  ExprGenerator(std::uint64_t seed, std::vector<std::string> states, std::vector<std::string> params)
      : rng_(seed), states_(std::move(states)), params_(std::move(params)) {}

  pinnworks::Expr generate(int depth) {
    using pinnworks::Expr;
    using pinnworks::ExprKind;
    std::uniform_int_distribution<int> pick(0, 9);
    if (depth <= 0 || pick(rng_) < 2) return leaf();
    const int choice = std::uniform_int_distribution<int>(0, 9)(rng_);
    switch (choice) {
      case 0: return Expr::unary(ExprKind::Neg, generate(depth - 1));
      case 1: return Expr::unary(ExprKind::Sin, generate(depth - 1));
      case 2: return Expr::unary(ExprKind::Cos, generate(depth - 1));
      case 3: return Expr::unary(ExprKind::Tanh, generate(depth - 1));
      case 4: return Expr::unary(ExprKind::Exp, Expr::binary(ExprKind::Mul, Expr::constant(0.3),
                                                             generate(depth - 1)));
      case 5: return Expr::binary(ExprKind::Add, generate(depth - 1), generate(depth - 1));
      case 6: return Expr::binary(ExprKind::Sub, generate(depth - 1), generate(depth - 1));
      case 7: return Expr::binary(ExprKind::Mul, generate(depth - 1), generate(depth - 1));
      case 8: return Expr::binary(ExprKind::Div, generate(depth - 1), generate(depth - 1));
      default: {
        static constexpr double exponents[] = {2.0, 3.0, -1.0, 0.5, 1.5};
        const double p = exponents[std::uniform_int_distribution<int>(0, 4)(rng_)];
        return Expr::pow(generate(depth - 1), p);
      }
    }
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  pinnworks::Expr leaf() {
    using pinnworks::Expr;
    const int choice = std::uniform_int_distribution<int>(0, 3)(rng_);
    if (choice == 0) return Expr::constant(std::round(uniform(-5.0, 5.0) * 100.0) / 100.0);
    if (choice == 1 && !params_.empty()) {
      return Expr::param(params_[std::uniform_int_distribution<std::size_t>(0, params_.size() - 1)(rng_)]);
    }
    if (choice == 2) return Expr::time();
    return Expr::state(states_[std::uniform_int_distribution<std::size_t>(0, states_.size() - 1)(rng_)]);
  }

  std::mt19937_64 rng_;
  std::vector<std::string> states_;
  std::vector<std::string> params_;
};

inline const char* smib_source() {
  return "param K1=5 K2=10 K3=1.7;\n"
         "d(delta)/dt = omega;\n"
         "d(omega)/dt = K1 - K2*sin(delta) - K3*omega;\n"
         "init delta=-1 omega=7;\n"
         "domain 0 10\n";
}

}  // namespace testing_support
