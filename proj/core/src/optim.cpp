#include "pinnworks/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace pinnworks {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged_gradient: return "converged-gradient";
    case StopReason::converged_loss_delta: return "converged-loss-delta";
    case StopReason::reached_loss_target: return "reached-loss-target";
    case StopReason::max_iterations: return "max-iterations";
    case StopReason::line_search_failure: return "line-search-failure";
    case StopReason::callback: return "callback";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

void InverseHessian::reset(double scale) {
  std::fill(h_.begin(), h_.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) h_[i * n_ + i] = scale;
}

bool InverseHessian::update(std::span<const double> s, std::span<const double> y) {
  double sy = 0.0;
  for (std::size_t i = 0; i < n_; ++i) sy += s[i] * y[i];
  if (!(sy > 0.0) || !std::isfinite(sy)) return false;
  const double rho = 1.0 / sy;
  hy_.resize(n_);
  apply(y, hy_);
  double yhy = 0.0;
  for (std::size_t i = 0; i < n_; ++i) yhy += y[i] * hy_[i];
  // H+ = H - rho (s (Hy)' + (Hy) s') + (rho^2 y'Hy + rho) s s'
  // Each (i, j) and (j, i) pair sees the same operands, so H stays exactly symmetric.
  const double c = rho * rho * yhy + rho;
  for (std::size_t i = 0; i < n_; ++i) {
    double* row = h_.data() + i * n_;
    const double si = s[i];
    const double hyi = hy_[i];
    for (std::size_t j = 0; j < n_; ++j) {
      row[j] += -rho * (si * hy_[j] + hyi * s[j]) + c * (si * s[j]);
    }
  }
  return true;
}

void InverseHessian::apply(std::span<const double> v, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = h_.data() + i * n_;
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
}

double InverseHessian::asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      m = std::max(m, std::abs(h_[i * n_ + j] - h_[j * n_ + i]));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Two-loop recursion over the stored (s, y) pairs.
class LimitedMemory {
 public:
  explicit LimitedMemory(std::size_t m) : m_(m) {}

  void reset() { pairs_.clear(); }

  bool update(std::span<const double> s, std::span<const double> y) {
    const double sy = dot(s, y);
    if (!(sy > 0.0) || !std::isfinite(sy)) return false;
    if (pairs_.size() == m_) pairs_.pop_front();
    pairs_.push_back({{s.begin(), s.end()}, {y.begin(), y.end()}, 1.0 / sy});
    return true;
  }

  void apply(std::span<const double> g, std::span<double> out, double initial_scale) const {
    std::copy(g.begin(), g.end(), out.begin());
    std::vector<double> alpha(pairs_.size());
    for (std::size_t k = pairs_.size(); k-- > 0;) {
      const auto& p = pairs_[k];
      alpha[k] = p.rho * dot(p.s, out);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] -= alpha[k] * p.y[i];
    }
    double gamma = initial_scale;
    if (!pairs_.empty()) {
      const auto& last = pairs_.back();
      gamma = 1.0 / (last.rho * dot(last.y, last.y));
    }
    for (double& v : out) v *= gamma;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      const double beta = p.rho * dot(p.y, out);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += (alpha[k] - beta) * p.s[i];
    }
  }

 private:
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::size_t m_;
  std::deque<Pair> pairs_;
};

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
  std::vector<double> grad;
};

class LineSearcher {
 public:
  LineSearcher(const ValueAndGradient& f, const LineSearchConfig& cfg, int& evaluations)
      : f_(f), cfg_(cfg), evaluations_(evaluations) {}

  /// On success fills `out` (alpha, f, grad) and `x_out`.
  bool search(std::span<const double> x, double f0, std::span<const double> p, double d0,
              double alpha0, Trial& out, std::vector<double>& x_out) {
    x_ = x;
    p_ = p;
    f0_ = f0;
    d0_ = d0;
    x_trial_.resize(x.size());
    used_ = 0;
    if (!(d0 < 0.0)) return false;
    const bool ok = cfg_.kind == LineSearchKind::exact ? exact(alpha0, out) : wolfe(alpha0, out);
    if (!ok) return false;
    x_out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x_out[i] = x[i] + out.alpha * p[i];
    return true;
  }

 private:
  Trial eval(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.grad.resize(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) x_trial_[i] = x_[i] + alpha * p_[i];
    t.f = f_(x_trial_, t.grad);
    ++evaluations_;
    ++used_;
    t.d = dot(t.grad, p_);
    if (!std::isfinite(t.f) || !std::isfinite(t.d)) {
      t.f = std::numeric_limits<double>::infinity();
      t.d = std::numeric_limits<double>::quiet_NaN();
    }
    return t;
  }

  bool armijo(const Trial& t) const { return t.f <= f0_ + cfg_.c1 * t.alpha * d0_; }
  bool curvature(const Trial& t) const { return std::abs(t.d) <= -cfg_.c2 * d0_; }

  bool wolfe(double alpha, Trial& out) {
    Trial prev{0.0, f0_, d0_, {}};
    for (int i = 0; used_ < cfg_.max_evaluations; ++i) {
      Trial cur = eval(alpha);
      if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(std::move(prev), std::move(cur), out);
      if (curvature(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.d >= 0.0) return zoom(std::move(cur), std::move(prev), out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

  static double cubic_min(const Trial& a, const Trial& b) {
    const double d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.d * b.d;
    if (!(disc >= 0.0) || !std::isfinite(disc)) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    return b.alpha - (b.alpha - a.alpha) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
  }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    while (used_ < cfg_.max_evaluations) {
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double width = b - a;
      if (width <= 1e-16 * std::max(1.0, b)) break;
      double alpha = std::isfinite(hi.f) && std::isfinite(hi.d) ? cubic_min(lo, hi)
                                                                : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(alpha) || alpha < a + 0.1 * width || alpha > b - 0.1 * width) {
        alpha = 0.5 * (a + b);
      }
      Trial cur = eval(alpha);
      if (!armijo(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (curvature(cur)) {
          out = std::move(cur);
          return true;
        }
        if (cur.d * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
        lo = std::move(cur);
      }
    }
    // Budget exhausted: lo still satisfies sufficient decrease.
    if (lo.alpha > 0.0 && !lo.grad.empty() && lo.f < f0_) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  bool exact(double alpha, Trial& out) {
    Trial a{0.0, f0_, d0_, {}};
    Trial b = eval(alpha);
    while (used_ < cfg_.max_evaluations) {
      if (std::abs(b.d) <= 1e-12 * std::abs(d0_)) break;
      const double denom = b.d - a.d;
      if (denom == 0.0 || !std::isfinite(denom)) break;
      const double next = b.alpha - b.d * (b.alpha - a.alpha) / denom;
      if (!(next > 0.0) || !std::isfinite(next)) break;
      a = std::move(b);
      b = eval(next);
    }
    if (b.alpha > 0.0 && b.f <= f0_) {
      out = std::move(b);
      return true;
    }
    return false;
  }

  const ValueAndGradient& f_;
  const LineSearchConfig& cfg_;
  int& evaluations_;
  std::span<const double> x_;
  std::span<const double> p_;
  double f0_ = 0.0;
  double d0_ = 0.0;
  int used_ = 0;
  std::vector<double> x_trial_;
};

}  // namespace

MinimizeResult minimize(const ValueAndGradient& f, std::vector<double> x0,
                        const OptimizerConfig& config, const IterationCallback& callback) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("minimize: empty parameter vector");
  if (!all_finite(x0)) throw std::domain_error("minimize: non-finite initial point");

  MinimizeResult r;
  r.x = std::move(x0);
  r.gradient.assign(n, 0.0);
  r.loss = f(r.x, r.gradient);
  r.evaluations = 1;
  if (!std::isfinite(r.loss) || !all_finite(r.gradient)) {
    throw std::domain_error("minimize: non-finite loss or gradient at the initial point");
  }
  r.loss_history.push_back(r.loss);

  const bool dense = config.method == HessianMethod::dense_bfgs;
  InverseHessian hess(dense ? n : 0);
  LimitedMemory memory(config.lbfgs_memory);
  double lbfgs_scale = 1.0;
  auto reset_curvature = [&] {
    if (dense) hess.reset();
    memory.reset();
    lbfgs_scale = 1.0;
    ++r.hessian_resets;
  };

  LineSearcher searcher(f, config.line_search, r.evaluations);
  std::vector<double> p(n), s(n), y(n), x_new;
  bool fresh = true;         // no curvature information yet
  bool reset_tried = false;  // a failed search already triggered a reset

  for (;;) {
    if (inf_norm(r.gradient) <= config.stop.gradient_tol) {
      r.stop_reason = StopReason::converged_gradient;
      break;
    }
    if (r.loss <= config.stop.loss_target) {
      r.stop_reason = StopReason::reached_loss_target;
      break;
    }
    if (r.iterations >= config.stop.max_iterations) {
      r.stop_reason = StopReason::max_iterations;
      break;
    }

    if (dense) {
      hess.apply(r.gradient, p);
    } else {
      memory.apply(r.gradient, p, lbfgs_scale);
    }
    for (double& v : p) v = -v;
    double d0 = dot(r.gradient, p);
    if (!(d0 < 0.0)) {
      reset_curvature();
      fresh = true;
      for (std::size_t i = 0; i < n; ++i) p[i] = -r.gradient[i];
      d0 = dot(r.gradient, p);
    }
    const double alpha0 = fresh ? std::min(1.0, 1.0 / std::sqrt(dot(r.gradient, r.gradient))) : 1.0;

    Trial accepted;
    if (!searcher.search(r.x, r.loss, p, d0, alpha0, accepted, x_new)) {
      if (!reset_tried && !fresh) {
        reset_tried = true;
        reset_curvature();
        fresh = true;
        continue;
      }
      r.stop_reason = StopReason::line_search_failure;
      break;
    }
    reset_tried = false;

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - r.x[i];
      y[i] = accepted.grad[i] - r.gradient[i];
    }
    const double sy = dot(s, y);
    if (fresh && config.scale_initial_hessian && sy > 0.0) {
      const double scale = sy / dot(y, y);
      if (dense) hess.reset(scale);
      lbfgs_scale = scale;
    }
    const bool applied = dense ? hess.update(s, y) : memory.update(s, y);
    if (!applied) ++r.skipped_updates;
    fresh = false;

    const double previous = r.loss;
    r.x.swap(x_new);
    r.gradient = std::move(accepted.grad);
    r.loss = accepted.f;
    ++r.iterations;
    r.loss_history.push_back(r.loss);

    if (callback) {
      const IterationInfo info{r.iterations, r.loss,      inf_norm(r.gradient), accepted.alpha,
                               r.evaluations, r.x, r.gradient};
      const CallbackAction action = callback(info);
      if (action == CallbackAction::stop) {
        r.stop_reason = StopReason::callback;
        break;
      }
      if (action == CallbackAction::objective_changed) {
        r.loss = f(r.x, r.gradient);
        ++r.evaluations;
        if (!std::isfinite(r.loss) || !all_finite(r.gradient)) {
          r.stop_reason = StopReason::line_search_failure;
          break;
        }
        reset_curvature();
        fresh = true;
        continue;
      }
    }
    if (config.stop.loss_delta_tol > 0.0 &&
        std::abs(previous - r.loss) <= config.stop.loss_delta_tol * std::max(1.0, std::abs(previous))) {
      r.stop_reason = StopReason::converged_loss_delta;
      break;
    }
  }
  return r;
}

std::vector<double> warm_start(const NetworkLayout& current, const NetworkLayout& saved,
                               std::span<const double> saved_theta) {
  if (!(current == saved)) {
    throw ShapeError("checkpoint layout " + saved.describe() + " does not match " +
                     current.describe());
  }
  if (saved_theta.size() != current.param_count()) {
    throw ShapeError("checkpoint theta has " + std::to_string(saved_theta.size()) +
                     " entries, " + current.describe() + " needs " +
                     std::to_string(current.param_count()));
  }
  return {saved_theta.begin(), saved_theta.end()};
}

}  // namespace pinnworks
