#include "pinnworks/ad.hpp"

#include <stdexcept>

namespace pinnworks::ad {

Var Tape::variable(double value) {
  return Var(this, push(kNone, 0.0, kNone, 0.0), value);
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (!output.on_tape()) return adj;
  if (output.tape_ != this) throw std::invalid_argument("Tape::adjoints: foreign variable");
  adj[output.index_] = 1.0;
  for (std::size_t i = output.index_ + 1; i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.parent[0] != kNone) adj[n.parent[0]] += a * n.partial[0];
    if (n.parent[1] != kNone) adj[n.parent[1]] += a * n.partial[1];
  }
  return adj;
}

Var Var::unary(const Var& a, double value, double da) {
  if (!a.on_tape()) return Var(value);
  return Var(a.tape_, a.tape_->push(a.index_, da, Tape::kNone, 0.0), value);
}

Var Var::binary(const Var& a, const Var& b, double value, double da, double db) {
  if (!a.on_tape() && !b.on_tape()) return Var(value);
  if (!b.on_tape()) return unary(a, value, da);
  if (!a.on_tape()) return unary(b, value, db);
  if (a.tape_ != b.tape_) throw std::invalid_argument("ad::Var: operands on different tapes");
  return Var(a.tape_, a.tape_->push(a.index_, da, b.index_, db), value);
}

Var operator+(const Var& a, const Var& b) {
  return Var::binary(a, b, a.value_ + b.value_, 1.0, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  return Var::binary(a, b, a.value_ - b.value_, 1.0, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  return Var::binary(a, b, a.value_ * b.value_, b.value_, a.value_);
}

Var operator/(const Var& a, const Var& b) {
  const double q = a.value_ / b.value_;
  return Var::binary(a, b, q, 1.0 / b.value_, -q / b.value_);
}

Var operator-(const Var& a) { return Var::unary(a, -a.value_, -1.0); }

Var sin(const Var& a) { return Var::unary(a, std::sin(a.value_), std::cos(a.value_)); }

Var cos(const Var& a) { return Var::unary(a, std::cos(a.value_), -std::sin(a.value_)); }

Var tanh(const Var& a) {
  const double th = std::tanh(a.value_);
  return Var::unary(a, th, 1.0 - th * th);
}

Var exp(const Var& a) {
  const double e = std::exp(a.value_);
  return Var::unary(a, e, e);
}

Var pow(const Var& a, double p) {
  if (p == 0.0) return Var(1.0);
  return Var::unary(a, std::pow(a.value_, p), p * std::pow(a.value_, p - 1.0));
}

}  // namespace pinnworks::ad
