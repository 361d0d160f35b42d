#include "pinnworks/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pinnworks {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::reference_fixed: return "reference-fixed";
    case Provenance::reference_adaptive: return "reference-adaptive";
    case Provenance::pinn: return "pinn";
  }
  return "unknown";
}

Trajectory::Trajectory(std::vector<std::string> names, Provenance provenance)
    : names_(std::move(names)), provenance_(provenance) {}

void Trajectory::append(double t, std::span<const double> state) {
  if (state.size() != names_.size()) throw std::invalid_argument("state width mismatch");
  if (!times_.empty() && !(t > times_.back())) {
    throw std::invalid_argument("trajectory times must be strictly increasing");
  }
  for (double v : state) {
    if (!std::isfinite(v)) throw std::invalid_argument("trajectory states must be finite");
  }
  times_.push_back(t);
  states_.insert(states_.end(), state.begin(), state.end());
}

std::vector<double> Trajectory::column(std::size_t v) const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = at(k, v);
  return out;
}

std::vector<double> uniform_grid(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("grid requires t1 > t0");
  const double steps = (t1 - t0) / dt;
  auto n = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(n)) > 1e-9 * std::max(1.0, steps)) {
    n = static_cast<std::size_t>(std::floor(steps));
  }
  std::vector<double> grid;
  grid.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) grid.push_back(t0 + static_cast<double>(k) * dt);
  if (std::abs(grid.back() - t1) <= 1e-9 * dt) {
    grid.back() = t1;
  } else if (grid.back() < t1) {
    grid.push_back(t1);
  }
  return grid;
}

namespace {

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string blowup_message(double t) {
  std::ostringstream os;
  os << "state became non-finite at t = " << t;
  return os.str();
}

}  // namespace

Trajectory integrate_fixed(const OdeSystem& system, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be > 0");
  const double span = system.t1() - system.t0();
  const double steps = span / dt;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (n == 0 || std::abs(steps - static_cast<double>(n)) > 1e-9 * std::max(1.0, steps)) {
    throw std::invalid_argument("step size does not divide the domain");
  }
  const std::size_t dim = system.size();
  Trajectory traj(system.state_names(), Provenance::reference_fixed);
  std::vector<double> y = system.initial_conditions();
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  traj.append(system.t0(), y);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = system.t0() + static_cast<double>(s) * dt;
    system.evaluate_rhs(t, y, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    system.evaluate_rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    system.evaluate_rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
    system.evaluate_rhs(t + dt, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const double t_next = s + 1 == n ? system.t1() : system.t0() + static_cast<double>(s + 1) * dt;
    if (!finite(y)) throw IntegrationError(blowup_message(t_next), std::move(traj), t_next);
    traj.append(t_next, y);
  }
  return traj;
}

namespace {

// Dormand-Prince 5(4) tableau and dense-output coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Trajectory integrate_adaptive(const OdeSystem& system, const AdaptiveOptions& options,
                              AdaptiveStats* stats) {
  if (!(options.abs_tol > 0.0) || !(options.rel_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be > 0");
  }
  const std::size_t dim = system.size();
  const double t0 = system.t0();
  const double t1 = system.t1();
  const std::vector<double> grid = uniform_grid(t0, t1, options.output_dt);

  Trajectory traj(system.state_names(), Provenance::reference_adaptive);
  AdaptiveStats local;
  AdaptiveStats& st = stats ? *stats : local;
  st = {};

  std::vector<double> y = system.initial_conditions();
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  std::vector<double> tmp(dim), y_new(dim), err(dim), out(dim);
  std::vector<double> r1(dim), r2(dim), r3(dim), r4(dim), r5(dim);

  auto rhs = [&](double t, std::span<const double> state, std::span<double> dst) {
    system.evaluate_rhs(t, state, dst);
    ++st.rhs_evaluations;
  };

  traj.append(t0, y);
  std::size_t next_out = 1;

  rhs(t0, y, k1);
  double h = options.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic.
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sk = options.abs_tol + options.rel_tol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, t1 - t0);
  }

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
  const double expo = 0.2 - beta * 0.75;
  double err_old = 1e-4;
  bool last_rejected = false;
  double t = t0;

  while (t < t1) {
    if (st.accepted + st.rejected >= options.max_steps) {
      throw IntegrationError("step budget exhausted at t = " + std::to_string(t), std::move(traj), t);
    }
    if (h < options.min_step) {
      throw IntegrationError("step size underflow at t = " + std::to_string(t), std::move(traj), t);
    }
    if (t + h > t1) h = t1 - t;

    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    rhs(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < dim; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const double t_new = t + h;
    rhs(t_new, tmp, k6);
    for (std::size_t i = 0; i < dim; ++i) {
      y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    rhs(t_new, y_new, k7);

    double e = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = options.abs_tol + options.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      e += (err[i] / sk) * (err[i] / sk);
    }
    e = std::sqrt(e / static_cast<double>(dim));
    if (!std::isfinite(e)) {
      ++st.rejected;
      h *= fac_min;
      last_rejected = true;
      continue;
    }

    if (e <= 1.0) {
      // Continuous extension of order 4 on [t, t_new].
      for (std::size_t i = 0; i < dim; ++i) {
        const double dy = y_new[i] - y[i];
        const double bspl = h * k1[i] - dy;
        r1[i] = y[i];
        r2[i] = dy;
        r3[i] = bspl;
        r4[i] = dy - h * k7[i] - bspl;
        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      while (next_out < grid.size() && grid[next_out] <= t_new + 1e-12 * std::abs(t_new)) {
        const double s = (grid[next_out] - t) / h;
        const double s1 = 1.0 - s;
        for (std::size_t i = 0; i < dim; ++i) {
          out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
        }
        if (next_out + 1 == grid.size() && t_new >= t1) out = y_new;
        traj.append(grid[next_out], out);
        ++next_out;
      }

      ++st.accepted;
      t = t_new;
      y.swap(y_new);
      k1.swap(k7);  // first-same-as-last
      if (!finite(y)) throw IntegrationError(blowup_message(t), std::move(traj), t);

      double fac = std::pow(e, expo) / std::pow(std::max(err_old, 1e-4), beta);
      fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      err_old = std::max(e, 1e-4);
      last_rejected = false;
      h = h_new;
    } else {
      ++st.rejected;
      const double fac = std::min(1.0 / fac_min, std::pow(e, expo) / safety);
      h = h / fac;
      last_rejected = true;
    }
  }
  return traj;
}

}  // namespace pinnworks
