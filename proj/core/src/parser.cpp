#include "pinnworks/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

namespace pinnworks {

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (i) os << '\n';
    os << diags[i].line << ':' << diags[i].column << ": " << diags[i].message;
  }
  return os.str();
}

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token tok;
      tok.line = line_;
      tok.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(tok);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        tok.kind = Tok::Ident;
        tok.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        tok.kind = Tok::Number;
        tok.text = lex_number();
        const char* first = tok.text.data();
        const char* last = first + tok.text.size();
        auto [ptr, ec] = std::from_chars(first, last, tok.number);
        if (ec != std::errc() || ptr != last) {
          throw ParseError({{tok.line, tok.column, "malformed number '" + tok.text + "'"}});
        }
      } else if (std::string_view("()=;+-*/^").find(c) != std::string_view::npos) {
        tok.kind = Tok::Punct;
        tok.text = std::string(1, c);
        advance();
      } else {
        throw ParseError(
            {{tok.line, tok.column, std::string("unexpected character '") + c + "'"}});
      }
      out.push_back(std::move(tok));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string lex_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        while (pos_ < look) advance();
        digits();
      }
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct IdentUse {
  std::string name;
  int line;
  int column;
};

struct NumberAt {
  std::string name;
  double value;
  int line;
  int column;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  struct Equation {
    std::string var;
    int line;
    int column;
    Expr rhs;
    std::vector<IdentUse> uses;
  };

  struct Raw {
    std::vector<NumberAt> params;
    std::vector<Equation> equations;
    std::vector<NumberAt> inits;
    std::optional<std::pair<double, double>> domain;
    int end_line = 1;
    int end_column = 1;
  };

  Raw parse_program() {
    Raw raw;
    while (!at_end()) {
      const Token& tok = peek();
      if (is_ident("param")) {
        next();
        parse_assignments(raw.params, "param");
      } else if (is_ident("init")) {
        next();
        parse_assignments(raw.inits, "init");
      } else if (is_ident("domain")) {
        next();
        if (raw.domain) fail(tok, "duplicate domain declaration");
        const double t0 = signed_number();
        const double t1 = signed_number();
        raw.domain = {t0, t1};
        if (is_punct(";")) next();
      } else if (is_ident("d") && peek(1).kind == Tok::Punct && peek(1).text == "(") {
        raw.equations.push_back(parse_equation());
      } else {
        fail(tok, "expected 'param', 'init', 'domain' or an equation 'd(x)/dt = ...', found '" +
                      describe(tok) + "'");
      }
    }
    raw.end_line = peek().line;
    raw.end_column = peek().column;
    return raw;
  }

  Expr parse_single() {
    Expr e = parse_expr();
    if (!at_end()) fail(peek(), "unexpected '" + describe(peek()) + "' after expression");
    return e;
  }

  const std::vector<IdentUse>& uses() const { return uses_; }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_ident(std::string_view s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }
  bool is_punct(std::string_view s) const {
    return peek().kind == Tok::Punct && peek().text == s;
  }

  static std::string describe(const Token& tok) {
    return tok.kind == Tok::End ? std::string("end of input") : tok.text;
  }

  [[noreturn]] static void fail(const Token& tok, std::string message) {
    throw ParseError({{tok.line, tok.column, std::move(message)}});
  }

  void expect_punct(std::string_view s) {
    if (!is_punct(s)) fail(peek(), "expected '" + std::string(s) + "', found '" + describe(peek()) + "'");
    next();
  }

  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) {
      fail(peek(), std::string("expected ") + what + ", found '" + describe(peek()) + "'");
    }
    return next().text;
  }

  double signed_number() {
    double sign = 1.0;
    if (is_punct("-") || is_punct("+")) {
      if (next().text == "-") sign = -1.0;
    }
    if (peek().kind != Tok::Number) {
      fail(peek(), "expected a number, found '" + describe(peek()) + "'");
    }
    return sign * next().number;
  }

  void parse_assignments(std::vector<NumberAt>& out, const char* keyword) {
    bool any = false;
    while (peek().kind == Tok::Ident) {
      const Token& name_tok = next();
      expect_punct("=");
      const double v = signed_number();
      out.push_back({name_tok.text, v, name_tok.line, name_tok.column});
      any = true;
    }
    if (!any) fail(peek(), std::string("'") + keyword + "' needs at least one name=value pair");
    expect_punct(";");
  }

  Equation parse_equation() {
    next();  // d
    expect_punct("(");
    const Token var_tok = peek();
    std::string var = expect_ident("a state variable name");
    expect_punct(")");
    expect_punct("/");
    if (!is_ident("dt")) fail(peek(), "expected 'dt' in 'd(" + var + ")/dt'");
    next();
    expect_punct("=");
    uses_.clear();
    Expr rhs = parse_expr();
    expect_punct(";");
    return {std::move(var), var_tok.line, var_tok.column, std::move(rhs), uses_};
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (is_punct("+") || is_punct("-")) {
      const ExprKind kind = next().text == "+" ? ExprKind::Add : ExprKind::Sub;
      lhs = Expr::binary(kind, std::move(lhs), parse_term());
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_power();
    while (is_punct("*") || is_punct("/")) {
      const ExprKind kind = next().text == "*" ? ExprKind::Mul : ExprKind::Div;
      lhs = Expr::binary(kind, std::move(lhs), parse_power());
    }
    return lhs;
  }

  Expr parse_power() {
    Expr base = parse_unary();
    while (is_punct("^")) {
      next();
      const Token& at = peek();
      Expr exponent = parse_unary();
      if (!exponent.is_constant()) fail(at, "exponent must be a numeric constant");
      base = Expr::pow(std::move(base), exponent.value());
    }
    return base;
  }

  Expr parse_unary() {
    if (is_punct("-")) {
      next();
      if (peek().kind == Tok::Number) return Expr::constant(-next().number);
      return Expr::unary(ExprKind::Neg, parse_unary());
    }
    if (is_punct("+")) {
      next();
      return parse_unary();
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& tok = peek();
    if (tok.kind == Tok::Number) {
      next();
      return Expr::constant(tok.number);
    }
    if (tok.kind == Tok::Ident) {
      const Token ident = next();
      if (is_punct("(")) {
        ExprKind fn;
        if (ident.text == "sin") fn = ExprKind::Sin;
        else if (ident.text == "cos") fn = ExprKind::Cos;
        else if (ident.text == "tanh") fn = ExprKind::Tanh;
        else if (ident.text == "exp") fn = ExprKind::Exp;
        else fail(ident, "unknown function '" + ident.text + "'");
        next();
        Expr arg = parse_expr();
        expect_punct(")");
        return Expr::unary(fn, std::move(arg));
      }
      if (ident.text == "t") return Expr::time();
      uses_.push_back({ident.text, ident.line, ident.column});
      // Classified as state or parameter once every declaration is known.
      return Expr::state(ident.text);
    }
    if (is_punct("(")) {
      next();
      Expr inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    fail(tok, "expected an expression, found '" + describe(tok) + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<IdentUse> uses_;
};

Expr resolve(const Expr& e, const std::vector<std::string>& params) {
  if (e.kind() == ExprKind::StateVar) {
    if (std::find(params.begin(), params.end(), e.name()) != params.end()) {
      return Expr::param(e.name());
    }
    return e;
  }
  if (e.arity() == 0) return e;
  if (e.kind() == ExprKind::Pow) return Expr::pow(resolve(e.child(0), params), e.exponent());
  if (e.arity() == 1) return Expr::unary(e.kind(), resolve(e.child(0), params));
  return Expr::binary(e.kind(), resolve(e.child(0), params), resolve(e.child(1), params));
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

OdeSystem parse_system(std::string_view source) {
  Parser parser(Lexer(source).run());
  Parser::Raw raw = parser.parse_program();

  std::vector<Diagnostic> diags;
  std::vector<std::string> states;
  std::vector<std::string> params;
  std::vector<Parameter> param_values;

  for (const auto& p : raw.params) {
    if (p.name == "t") {
      diags.push_back({p.line, p.column, "'t' is reserved for the independent variable"});
    } else if (contains(params, p.name)) {
      diags.push_back({p.line, p.column, "duplicate parameter '" + p.name + "'"});
    } else {
      params.push_back(p.name);
      param_values.push_back({p.name, p.value});
    }
  }
  std::vector<Expr> rhs;
  for (const auto& eq : raw.equations) {
    if (eq.var == "t") {
      diags.push_back({eq.line, eq.column, "'t' is reserved for the independent variable"});
    } else if (contains(states, eq.var)) {
      diags.push_back({eq.line, eq.column, "duplicate equation for '" + eq.var + "'"});
    } else if (contains(params, eq.var)) {
      diags.push_back({eq.line, eq.column, "'" + eq.var + "' is declared as a parameter"});
    } else {
      states.push_back(eq.var);
      rhs.push_back(resolve(eq.rhs, params));
    }
  }
  for (const auto& eq : raw.equations) {
    for (const auto& use : eq.uses) {
      if (!contains(states, use.name) && !contains(params, use.name)) {
        diags.push_back({use.line, use.column, "undefined identifier '" + use.name + "'"});
      }
    }
  }
  if (raw.equations.empty()) {
    diags.push_back({raw.end_line, raw.end_column, "system declares no equations"});
  }

  std::vector<std::optional<double>> init(states.size());
  for (const auto& i : raw.inits) {
    auto it = std::find(states.begin(), states.end(), i.name);
    if (it == states.end()) {
      diags.push_back({i.line, i.column,
                       "initial condition for undefined state variable '" + i.name + "'"});
      continue;
    }
    auto& slot = init[static_cast<std::size_t>(it - states.begin())];
    if (slot) {
      diags.push_back({i.line, i.column, "duplicate initial condition for '" + i.name + "'"});
    }
    slot = i.value;
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (!init[k]) {
      diags.push_back({raw.end_line, raw.end_column,
                       "missing initial condition for '" + states[k] + "'"});
    }
  }
  if (!raw.domain) {
    diags.push_back({raw.end_line, raw.end_column, "missing 'domain t0 t1' declaration"});
  } else if (!(raw.domain->second > raw.domain->first)) {
    diags.push_back({raw.end_line, raw.end_column, "domain requires t1 > t0"});
  }
  if (!diags.empty()) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return a.line != b.line ? a.line < b.line : a.column < b.column;
    });
    throw ParseError(std::move(diags));
  }

  std::vector<double> initial;
  for (const auto& v : init) initial.push_back(*v);
  return OdeSystem(std::move(states), std::move(param_values), std::move(rhs),
                   std::move(initial), raw.domain->first, raw.domain->second);
}

Expr parse_expression(std::string_view source, const std::vector<std::string>& states,
                      const std::vector<std::string>& params) {
  Parser parser(Lexer(source).run());
  Expr e = parser.parse_single();
  std::vector<Diagnostic> diags;
  for (const auto& use : parser.uses()) {
    if (!contains(states, use.name) && !contains(params, use.name)) {
      diags.push_back({use.line, use.column, "undefined identifier '" + use.name + "'"});
    }
  }
  if (!diags.empty()) throw ParseError(std::move(diags));
  return resolve(e, params);
}

}  // namespace pinnworks
