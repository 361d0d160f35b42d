#include "pinnworks/expr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <sstream>

namespace pinnworks {

struct Expr::Node {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;
  std::string name;
  std::vector<Expr> children;
};

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::param(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Param;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::state(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::StateVar;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::time() {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Time;
  return Expr(std::move(n));
}

Expr Expr::unary(ExprKind kind, Expr operand) {
  if (!is_unary(kind)) throw std::invalid_argument("Expr::unary: not a unary kind");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->children.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
  if (!is_binary(kind)) throw std::invalid_argument("Expr::binary: not a binary kind");
  if (kind == ExprKind::Pow && !rhs.is_constant()) {
    throw std::invalid_argument("Pow exponent must be a constant");
  }
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, double exponent) {
  return binary(ExprKind::Pow, std::move(base), constant(exponent));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }

std::size_t Expr::arity() const {
  if (is_unary(kind())) return 1;
  if (is_binary(kind())) return 2;
  return 0;
}

const Expr& Expr::child(std::size_t i) const {
  if (i >= arity()) throw std::out_of_range("Expr::child");
  return node_->children[i];
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Constant:
      return std::bit_cast<std::uint64_t>(a.value()) ==
             std::bit_cast<std::uint64_t>(b.value());
    case ExprKind::Param:
    case ExprKind::StateVar: return a.name() == b.name();
    case ExprKind::Time: return true;
    default: break;
  }
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!(a.child(i) == b.child(i))) return false;
  }
  return true;
}

bool is_unary(ExprKind kind) {
  switch (kind) {
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Tanh:
    case ExprKind::Exp: return true;
    default: return false;
  }
}

bool is_binary(ExprKind kind) {
  switch (kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Pow: return true;
    default: return false;
  }
}

std::string_view function_name(ExprKind kind) {
  switch (kind) {
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    case ExprKind::Tanh: return "tanh";
    case ExprKind::Exp: return "exp";
    default: return "";
  }
}

// ---------------------------------------------------------------------------
// Folding constructors

namespace fold {

Expr neg(Expr a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.kind() == ExprKind::Neg) return a.child(0);
  return Expr::unary(ExprKind::Neg, std::move(a));
}

Expr add(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(ExprKind::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(std::move(b));
  return Expr::binary(ExprKind::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return neg(std::move(b));
  if (b.is_constant(-1.0)) return neg(std::move(a));
  return Expr::binary(ExprKind::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    return Expr::constant(a.value() / b.value());
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return Expr::binary(ExprKind::Div, std::move(a), std::move(b));
}

Expr pow(Expr base, double exponent) {
  if (exponent == 0.0) return Expr::constant(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) return Expr::constant(std::pow(base.value(), exponent));
  return Expr::pow(std::move(base), exponent);
}

Expr apply(ExprKind fn, Expr a) {
  if (a.is_constant()) {
    const double v = a.value();
    switch (fn) {
      case ExprKind::Sin: return Expr::constant(std::sin(v));
      case ExprKind::Cos: return Expr::constant(std::cos(v));
      case ExprKind::Tanh: return Expr::constant(std::tanh(v));
      case ExprKind::Exp: return Expr::constant(std::exp(v));
      case ExprKind::Neg: return Expr::constant(-v);
      default: break;
    }
  }
  if (fn == ExprKind::Neg) return neg(std::move(a));
  return Expr::unary(fn, std::move(a));
}

}  // namespace fold

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double lookup(const NameValues& table, const std::string& name, const char* what) {
  auto it = table.find(name);
  if (it == table.end()) {
    throw EvalError(std::string("unbound ") + what + " '" + name + "'");
  }
  return it->second;
}

}  // namespace

double eval(const Expr& e, double t, const NameValues& state,
            const NameValues& params) {
  switch (e.kind()) {
    case ExprKind::Constant: return e.value();
    case ExprKind::Param: return lookup(params, e.name(), "parameter");
    case ExprKind::StateVar: return lookup(state, e.name(), "state variable");
    case ExprKind::Time: return t;
    case ExprKind::Neg: return -eval(e.child(0), t, state, params);
    case ExprKind::Sin: return std::sin(eval(e.child(0), t, state, params));
    case ExprKind::Cos: return std::cos(eval(e.child(0), t, state, params));
    case ExprKind::Tanh: return std::tanh(eval(e.child(0), t, state, params));
    case ExprKind::Exp: return std::exp(eval(e.child(0), t, state, params));
    case ExprKind::Pow: return std::pow(eval(e.child(0), t, state, params), e.exponent());
    default: break;
  }
  const double a = eval(e.child(0), t, state, params);
  const double b = eval(e.child(1), t, state, params);
  switch (e.kind()) {
    case ExprKind::Add: return a + b;
    case ExprKind::Sub: return a - b;
    case ExprKind::Mul: return a * b;
    case ExprKind::Div:
      if (b == 0.0) throw EvalError("division by zero");
      return a / b;
    default: break;
  }
  throw EvalError("unknown expression kind");
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, std::string_view wrt) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Param:
    case ExprKind::Time: return Expr::constant(0.0);
    case ExprKind::StateVar: return Expr::constant(e.name() == wrt ? 1.0 : 0.0);
    default: break;
  }
  const Expr& u = e.child(0);
  const Expr du = diff(u, wrt);
  switch (e.kind()) {
    case ExprKind::Neg: return fold::neg(du);
    case ExprKind::Sin: return fold::mul(fold::apply(ExprKind::Cos, u), du);
    case ExprKind::Cos:
      return fold::mul(fold::neg(fold::apply(ExprKind::Sin, u)), du);
    case ExprKind::Tanh: {
      const Expr sech2 = fold::sub(Expr::constant(1.0),
                                   fold::pow(fold::apply(ExprKind::Tanh, u), 2.0));
      return fold::mul(sech2, du);
    }
    case ExprKind::Exp: return fold::mul(fold::apply(ExprKind::Exp, u), du);
    case ExprKind::Pow: {
      const double p = e.exponent();
      return fold::mul(fold::mul(Expr::constant(p), fold::pow(u, p - 1.0)), du);
    }
    default: break;
  }
  const Expr& v = e.child(1);
  const Expr dv = diff(v, wrt);
  switch (e.kind()) {
    case ExprKind::Add: return fold::add(du, dv);
    case ExprKind::Sub: return fold::sub(du, dv);
    case ExprKind::Mul: return fold::add(fold::mul(du, v), fold::mul(u, dv));
    case ExprKind::Div:
      // (u'v - uv') / v^2
      return fold::div(fold::sub(fold::mul(du, v), fold::mul(u, dv)),
                       fold::pow(v, 2.0));
    default: break;
  }
  throw std::logic_error("diff: unhandled expression kind");
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_plain(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Negative literals are parenthesized so they re-parse as a single constant.
std::string format_number(double v) {
  if (std::signbit(v)) return "(" + format_plain(v) + ")";
  return format_plain(v);
}

bool is_atom(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Param:
    case ExprKind::StateVar:
    case ExprKind::Time:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Tanh:
    case ExprKind::Exp: return true;
    default: return false;
  }
}

void print(const Expr& e, std::string& out, bool top) {
  switch (e.kind()) {
    case ExprKind::Constant: out += format_number(e.value()); return;
    case ExprKind::Param:
    case ExprKind::StateVar: out += e.name(); return;
    case ExprKind::Time: out += 't'; return;
    case ExprKind::Neg:
      out += '-';
      if (is_atom(e.child(0)) && !e.child(0).is_constant()) {
        print(e.child(0), out, false);
      } else {
        out += '(';
        print(e.child(0), out, true);
        out += ')';
      }
      return;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Tanh:
    case ExprKind::Exp:
      out += function_name(e.kind());
      out += '(';
      print(e.child(0), out, true);
      out += ')';
      return;
    case ExprKind::Pow:
      if (is_atom(e.child(0))) {
        print(e.child(0), out, false);
      } else {
        out += '(';
        print(e.child(0), out, true);
        out += ')';
      }
      out += '^';
      out += format_number(e.exponent());
      return;
    default: break;
  }
  const char* op = " + ";
  switch (e.kind()) {
    case ExprKind::Sub: op = " - "; break;
    case ExprKind::Mul: op = "*"; break;
    case ExprKind::Div: op = "/"; break;
    default: break;
  }
  if (!top) out += '(';
  print(e.child(0), out, false);
  out += op;
  print(e.child(1), out, false);
  if (!top) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out, true);
  return out;
}

void collect_names(const Expr& e, std::vector<std::string>& states,
                   std::vector<std::string>& params) {
  auto add_unique = [](std::vector<std::string>& v, const std::string& name) {
    if (std::find(v.begin(), v.end(), name) == v.end()) v.push_back(name);
  };
  switch (e.kind()) {
    case ExprKind::StateVar: add_unique(states, e.name()); return;
    case ExprKind::Param: add_unique(params, e.name()); return;
    default: break;
  }
  for (std::size_t i = 0; i < e.arity(); ++i) collect_names(e.child(i), states, params);
}

// ---------------------------------------------------------------------------
// Compiled form

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> states,
                           std::span<const std::string> params) {
  emit(e, states, params, 1);
}

void CompiledExpr::emit(const Expr& e, std::span<const std::string> states,
                        std::span<const std::string> params, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  auto index_of = [](std::span<const std::string> names, const std::string& name,
                     const char* what) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw EvalError(std::string("unbound ") + what + " '" + name + "'");
    }
    return static_cast<std::uint32_t>(it - names.begin());
  };
  switch (e.kind()) {
    case ExprKind::Constant: ops_.push_back({e.kind(), 0, e.value()}); return;
    case ExprKind::Param:
      ops_.push_back({e.kind(), index_of(params, e.name(), "parameter"), 0.0});
      return;
    case ExprKind::StateVar:
      ops_.push_back({e.kind(), index_of(states, e.name(), "state variable"), 0.0});
      return;
    case ExprKind::Time: ops_.push_back({e.kind(), 0, 0.0}); return;
    case ExprKind::Pow:
      emit(e.child(0), states, params, depth);
      ops_.push_back({e.kind(), 0, e.exponent()});
      return;
    default: break;
  }
  emit(e.child(0), states, params, depth);
  if (e.arity() == 2) emit(e.child(1), states, params, depth + 1);
  ops_.push_back({e.kind(), 0, 0.0});
}

// ---------------------------------------------------------------------------
// OdeSystem

OdeSystem::OdeSystem(std::vector<std::string> states, std::vector<Parameter> params,
                     std::vector<Expr> rhs, std::vector<double> initial, double t0,
                     double t1)
    : states_(std::move(states)),
      params_(std::move(params)),
      rhs_(std::move(rhs)),
      initial_(std::move(initial)),
      t0_(t0),
      t1_(t1) {
  if (states_.empty()) throw std::invalid_argument("system has no state variables");
  if (rhs_.size() != states_.size()) {
    throw std::invalid_argument("exactly one right-hand side per state variable required");
  }
  if (initial_.size() != states_.size()) {
    throw std::invalid_argument("exactly one initial condition per state variable required");
  }
  if (!(t1_ > t0_)) throw std::invalid_argument("domain requires t1 > t0");
  for (std::size_t i = 0; i < states_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (states_[i] == states_[j]) {
        throw std::invalid_argument("duplicate state variable '" + states_[i] + "'");
      }
    }
  }
  for (const auto& p : params_) {
    param_names_.push_back(p.name);
    param_values_.push_back(p.value);
  }
  for (std::size_t i = 0; i < param_names_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (param_names_[i] == param_names_[j]) {
        throw std::invalid_argument("duplicate parameter '" + param_names_[i] + "'");
      }
    }
  }
  // CompiledExpr resolves every name and throws EvalError on a miss.
  const std::size_t n = states_.size();
  compiled_rhs_.reserve(n);
  jac_.reserve(n * n);
  compiled_jac_.reserve(n * n);
  for (const Expr& e : rhs_) {
    try {
      compiled_rhs_.emplace_back(e, states_, param_names_);
    } catch (const EvalError& err) {
      throw std::invalid_argument(err.what());
    }
    for (const auto& name : states_) {
      jac_.push_back(diff(e, name));
      compiled_jac_.emplace_back(jac_.back(), states_, param_names_);
    }
  }
}

std::optional<std::size_t> OdeSystem::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<double> OdeSystem::parameter(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  return std::nullopt;
}

void OdeSystem::evaluate_rhs(double t, std::span<const double> state,
                             std::span<double> out) const {
  std::vector<double> stack;
  for (std::size_t i = 0; i < compiled_rhs_.size(); ++i) {
    out[i] = compiled_rhs_[i].evaluate<double>(t, state, param_values_, stack);
  }
}

OdeSystem OdeSystem::with_initial_conditions(std::vector<double> initial) const {
  return OdeSystem(states_, params_, rhs_, std::move(initial), t0_, t1_);
}

OdeSystem OdeSystem::with_domain(double t0, double t1) const {
  return OdeSystem(states_, params_, rhs_, initial_, t0, t1);
}

OdeSystem OdeSystem::with_parameter(std::string_view name, double value) const {
  auto params = params_;
  bool found = false;
  for (auto& p : params) {
    if (p.name == name) {
      p.value = value;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
  return OdeSystem(states_, std::move(params), rhs_, initial_, t0_, t1_);
}

bool operator==(const OdeSystem& a, const OdeSystem& b) {
  return a.states_ == b.states_ && a.params_ == b.params_ && a.rhs_ == b.rhs_ &&
         a.initial_ == b.initial_ && a.t0_ == b.t0_ && a.t1_ == b.t1_;
}

std::string print_system(const OdeSystem& system) {
  std::ostringstream os;
  if (!system.parameters().empty()) {
    os << "param";
    for (const auto& p : system.parameters()) {
      os << ' ' << p.name << '=' << format_plain(p.value);
    }
    os << ";\n";
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    os << "d(" << system.state_names()[i] << ")/dt = " << to_string(system.rhs()[i])
       << ";\n";
  }
  os << "init";
  for (std::size_t i = 0; i < system.size(); ++i) {
    os << ' ' << system.state_names()[i] << '='
       << format_plain(system.initial_conditions()[i]);
  }
  os << ";\n";
  os << "domain " << format_plain(system.t0()) << ' ' << format_plain(system.t1())
     << '\n';
  return os.str();
}

}  // namespace pinnworks
