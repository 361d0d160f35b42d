#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pinnworks {

/// Raised when an expression cannot be evaluated (unbound name, x/0).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExprKind : std::uint8_t {
  Constant,
  Param,
  StateVar,
  Time,
  Neg,
  Sin,
  Cos,
  Tanh,
  Exp,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

/// Immutable expression tree node handle.
///
/// Copies share structure. Pow always carries a Constant exponent as its
/// second child; the factory rejects anything else.
class Expr {
 public:
  Expr();  // Constant(0)

  static Expr constant(double value);
  static Expr param(std::string name);
  static Expr state(std::string name);
  static Expr time();
  static Expr unary(ExprKind kind, Expr operand);
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs);
  static Expr pow(Expr base, double exponent);

  ExprKind kind() const;
  /// Constant value. Only meaningful for Constant nodes.
  double value() const;
  /// Identifier for Param / StateVar nodes.
  const std::string& name() const;
  std::size_t arity() const;
  const Expr& child(std::size_t i) const;
  /// Exponent of a Pow node.
  double exponent() const { return child(1).value(); }

  bool is_constant() const { return kind() == ExprKind::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Structural equality (constants compared bitwise-equal as doubles).
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

bool is_unary(ExprKind kind);
bool is_binary(ExprKind kind);
std::string_view function_name(ExprKind kind);  // "sin", "cos", ...

/// Constant-folding constructors used by the differentiator.
namespace fold {
Expr neg(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr base, double exponent);
Expr apply(ExprKind fn, Expr a);  // sin/cos/tanh/exp with folding
}  // namespace fold

using NameValues = std::map<std::string, double, std::less<>>;

/// Name-resolving evaluation. Throws EvalError on unbound names or x/0.
double eval(const Expr& e, double t, const NameValues& state,
            const NameValues& params);

/// Symbolic partial derivative with respect to a state variable.
Expr diff(const Expr& e, std::string_view wrt);

/// Canonical printer; output re-parses to a structurally identical tree.
std::string to_string(const Expr& e);

/// Collects identifiers referenced by StateVar and Param nodes.
void collect_names(const Expr& e, std::vector<std::string>& states,
                   std::vector<std::string>& params);

/// Flattened postfix program with names resolved to indices.
///
/// evaluate() is generic in the scalar so the same program runs on doubles
/// in the trainer and on taped variables in gradient checks.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::span<const std::string> states,
               std::span<const std::string> params);

  template <typename T>
  T evaluate(const T& t, std::span<const T> state,
             std::span<const double> params, std::vector<T>& stack) const;

  template <typename T>
  T evaluate(const T& t, std::span<const T> state,
             std::span<const double> params) const {
    std::vector<T> stack;
    stack.reserve(max_depth_);
    return evaluate(t, state, params, stack);
  }

  bool empty() const { return ops_.empty(); }
  /// True when the program is a single constant (e.g. a vanishing partial).
  bool is_constant() const {
    return ops_.size() == 1 && ops_[0].kind == ExprKind::Constant;
  }
  double constant_value() const { return ops_.empty() ? 0.0 : ops_[0].value; }

 private:
  struct Op {
    ExprKind kind;
    std::uint32_t index = 0;
    double value = 0.0;
  };
  void emit(const Expr& e, std::span<const std::string> states,
            std::span<const std::string> params, std::size_t depth);

  std::vector<Op> ops_;
  std::size_t max_depth_ = 0;
};

struct Parameter {
  std::string name;
  double value = 0.0;
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// du_i/dt = rhs_i(t, u; params) on [t0, t1] with u(t0) given.
class OdeSystem {
 public:
  /// Validates that names resolve, counts agree and t1 > t0.
  OdeSystem(std::vector<std::string> states, std::vector<Parameter> params,
            std::vector<Expr> rhs, std::vector<double> initial, double t0,
            double t1);

  std::size_t size() const { return states_.size(); }
  const std::vector<std::string>& state_names() const { return states_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  const std::vector<Expr>& rhs() const { return rhs_; }
  const std::vector<double>& initial_conditions() const { return initial_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }

  std::optional<std::size_t> state_index(std::string_view name) const;
  std::optional<double> parameter(std::string_view name) const;
  std::span<const double> parameter_values() const { return param_values_; }

  const CompiledExpr& compiled_rhs(std::size_t i) const { return compiled_rhs_[i]; }
  /// d rhs_i / d u_k, compiled from the symbolic derivative.
  const CompiledExpr& compiled_jacobian(std::size_t i, std::size_t k) const {
    return compiled_jac_[i * states_.size() + k];
  }
  const Expr& jacobian(std::size_t i, std::size_t k) const {
    return jac_[i * states_.size() + k];
  }

  void evaluate_rhs(double t, std::span<const double> state,
                    std::span<double> out) const;

  OdeSystem with_initial_conditions(std::vector<double> initial) const;
  OdeSystem with_domain(double t0, double t1) const;
  OdeSystem with_parameter(std::string_view name, double value) const;

  friend bool operator==(const OdeSystem& a, const OdeSystem& b);

 private:
  std::vector<std::string> states_;
  std::vector<Parameter> params_;
  std::vector<Expr> rhs_;
  std::vector<double> initial_;
  double t0_;
  double t1_;

  std::vector<double> param_values_;
  std::vector<std::string> param_names_;
  std::vector<CompiledExpr> compiled_rhs_;
  std::vector<Expr> jac_;
  std::vector<CompiledExpr> compiled_jac_;
};

/// Prints a system in the DSL accepted by parse_system().
std::string print_system(const OdeSystem& system);

// ---------------------------------------------------------------------------

template <typename T>
T CompiledExpr::evaluate(const T& t, std::span<const T> state,
                         std::span<const double> params,
                         std::vector<T>& stack) const {
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  using std::tanh;
  stack.clear();
  for (const Op& op : ops_) {
    switch (op.kind) {
      case ExprKind::Constant: stack.push_back(T(op.value)); break;
      case ExprKind::Param: stack.push_back(T(params[op.index])); break;
      case ExprKind::StateVar: stack.push_back(state[op.index]); break;
      case ExprKind::Time: stack.push_back(t); break;
      case ExprKind::Neg: stack.back() = -stack.back(); break;
      case ExprKind::Sin: stack.back() = sin(stack.back()); break;
      case ExprKind::Cos: stack.back() = cos(stack.back()); break;
      case ExprKind::Tanh: stack.back() = tanh(stack.back()); break;
      case ExprKind::Exp: stack.back() = exp(stack.back()); break;
      case ExprKind::Pow: stack.back() = pow(stack.back(), op.value); break;
      default: {
        T rhs = stack.back();
        stack.pop_back();
        T& lhs = stack.back();
        switch (op.kind) {
          case ExprKind::Add: lhs = lhs + rhs; break;
          case ExprKind::Sub: lhs = lhs - rhs; break;
          case ExprKind::Mul: lhs = lhs * rhs; break;
          case ExprKind::Div:
            if (static_cast<double>(rhs) == 0.0) throw EvalError("division by zero");
            lhs = lhs / rhs;
            break;
          default: break;
        }
      }
    }
  }
  return stack.back();
}

}  // namespace pinnworks
