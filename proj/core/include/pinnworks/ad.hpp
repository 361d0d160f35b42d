#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace pinnworks::ad {

class Var;

/// Wengert list for scalar reverse-mode differentiation. Each node records
/// at most two parents with the local partial derivatives.
///
/// The tape is the reference route for gradient checks; the trainer uses the
/// hand-written reverse pass in NetworkEvaluator instead.
class Tape {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  Var variable(double value);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Adjoints d(output)/d(node) for every node on the tape.
  std::vector<double> adjoints(const Var& output) const;

 private:
  friend class Var;
  struct Node {
    double partial[2];
    std::uint32_t parent[2];
  };
  std::uint32_t push(std::uint32_t p0, double d0, std::uint32_t p1, double d1) {
    nodes_.push_back({{d0, d1}, {p0, p1}});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  std::vector<Node> nodes_;
};

/// Scalar that records its history on a Tape. A Var built from a double is a
/// constant and lives off-tape.
class Var {
 public:
  Var(double constant = 0.0) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const { return value_; }
  explicit operator double() const { return value_; }
  bool on_tape() const { return tape_ != nullptr; }
  std::uint32_t index() const { return index_; }

  friend Var operator+(const Var& a, const Var& b);
  friend Var operator-(const Var& a, const Var& b);
  friend Var operator*(const Var& a, const Var& b);
  friend Var operator/(const Var& a, const Var& b);
  friend Var operator-(const Var& a);
  Var& operator+=(const Var& b) { return *this = *this + b; }
  Var& operator-=(const Var& b) { return *this = *this - b; }
  Var& operator*=(const Var& b) { return *this = *this * b; }

  friend Var sin(const Var& a);
  friend Var cos(const Var& a);
  friend Var tanh(const Var& a);
  friend Var exp(const Var& a);
  friend Var pow(const Var& a, double p);

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index, double value)
      : tape_(tape), index_(index), value_(value) {}

  static Var unary(const Var& a, double value, double da);
  static Var binary(const Var& a, const Var& b, double value, double da, double db);

  Tape* tape_ = nullptr;
  std::uint32_t index_ = Tape::kNone;
  double value_;
};

}  // namespace pinnworks::ad
