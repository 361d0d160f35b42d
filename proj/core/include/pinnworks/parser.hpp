#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinnworks/expr.hpp"

namespace pinnworks {

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

/// Syntax or semantic error in DSL source. what() lists every diagnostic as
/// "line:col: message", one per line; line()/column() refer to the first.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);

  int line() const { return diagnostics_.front().line; }
  int column() const { return diagnostics_.front().column; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Parses the ODE-system DSL:
///
///   param K1=5 K2=10;                 # zero or more
///   d(delta)/dt = omega;              # one per state variable
///   d(omega)/dt = K1 - K2*sin(delta);
///   init delta=-1 omega=7;
///   domain 0 10
///
/// Unary minus binds tighter than '^' ("-x^2" is (-x)^2); the exponent must be
/// a numeric constant. `t` names the independent variable.
OdeSystem parse_system(std::string_view source);

/// Parses a single right-hand-side expression against known names.
Expr parse_expression(std::string_view source, const std::vector<std::string>& states,
                      const std::vector<std::string>& params);

}  // namespace pinnworks
