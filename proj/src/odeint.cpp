// Copyright 2026 The pvqflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pvqflow/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pvqflow/error.hpp"

namespace pvq::ode {
namespace {

void check_derivative(std::span<const double> dydt, double t, std::size_t step) {
  for (double v : dydt) {
    if (!std::isfinite(v)) throw IntegrationError("non-finite derivative", t, step);
  }
}

bool all_finite(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

// Dormand-Prince 5(4) tableau.
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kA71 = 35.0 / 384.0, kA73 = 500.0 / 1113.0, kA74 = 125.0 / 192.0,
                 kA75 = -2187.0 / 6784.0, kA76 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

}  // namespace

void TimeInterval::validate() const {
  if (!std::isfinite(start) || !std::isfinite(end)) throw ConfigError("interval bounds must be finite");
  if (start == end) throw ConfigError("interval start and end must differ");
}

SolverConfig SolverConfig::fixed(std::uint32_t n_steps) {
  SolverConfig c;
  c.method = Method::kRk4Fixed;
  c.n_steps = n_steps;
  return c;
}

SolverConfig SolverConfig::adaptive(double rtol, double atol, std::uint32_t max_steps) {
  SolverConfig c;
  c.method = Method::kDopri5Adaptive;
  c.rtol = rtol;
  c.atol = atol;
  c.max_steps = max_steps;
  return c;
}

void SolverConfig::validate() const {
  if (n_steps < 1) throw ConfigError("n_steps must be at least 1");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("rtol and atol must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
}

State rk4_step(const Field& field, std::span<const double> y, double t, double h,
               std::size_t step_index) {
  if (h == 0.0) throw ConfigError("RK4 step size must be nonzero");
  const std::size_t n = y.size();
  State k1(n), k2(n), k3(n), k4(n), tmp(n);
  field(t, y, k1);
  check_derivative(k1, t, step_index);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  field(t + 0.5 * h, tmp, k2);
  check_derivative(k2, t + 0.5 * h, step_index);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  field(t + 0.5 * h, tmp, k3);
  check_derivative(k3, t + 0.5 * h, step_index);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  field(t + h, tmp, k4);
  check_derivative(k4, t + h, step_index);
  State out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

State integrate_fixed(const Field& field, std::span<const double> y0,
                      const TimeInterval& interval, std::uint32_t n_steps) {
  interval.validate();
  if (n_steps < 1) throw ConfigError("n_steps must be at least 1");
  const double h = interval.length() / n_steps;
  State y(y0.begin(), y0.end());
  for (std::uint32_t k = 0; k < n_steps; ++k) {
    const double t = interval.start + k * h;
    y = rk4_step(field, y, t, h, k);
    if (!all_finite(y)) throw IntegrationError("non-finite state", t + h, k);
  }
  return y;
}

AdaptiveResult integrate_adaptive(const Field& field, std::span<const double> y0,
                                  const TimeInterval& interval, double rtol, double atol,
                                  std::uint32_t max_steps) {
  interval.validate();
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("rtol and atol must be positive");
  const std::size_t n = y0.size();
  const double dir = interval.end > interval.start ? 1.0 : -1.0;
  // PI controller constants (Hairer & Wanner's DOPRI5 defaults).
  constexpr double kSafety = 0.9, kBeta = 0.04, kExpo = 0.2 - 0.75 * kBeta;
  constexpr double kMinFactor = 0.2, kMaxFactor = 10.0;

  AdaptiveResult result;
  State y(y0.begin(), y0.end());
  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n);
  double t = interval.start;
  double h = interval.length();
  double err_old = 1e-4;
  std::size_t attempts = 0;

  field(t, y, k1);
  check_derivative(k1, t, 0);
  while (dir * (interval.end - t) > 0.0) {
    if (attempts >= max_steps) {
      throw IntegrationError("step limit of " + std::to_string(max_steps) + " exceeded", t,
                             attempts);
    }
    ++attempts;
    bool last = false;
    if (dir * (t + h - interval.end) >= 0.0) {
      h = interval.end - t;
      last = true;
    }
    if (std::abs(h) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw IntegrationError("step size underflow", t, attempts);
    }

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * kA21 * k1[i];
    field(t + kC2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
    field(t + kC3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
    }
    field(t + kC4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
    }
    field(t + kC5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] + kA64 * k4[i] +
                           kA65 * k5[i]);
    }
    field(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      y_new[i] = y[i] + h * (kA71 * k1[i] + kA73 * k3[i] + kA74 * k4[i] + kA75 * k5[i] +
                             kA76 * k6[i]);
    }
    field(t + h, y_new, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                            kE6 * k6[i] + kE7 * k7[i]);
      const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    if (!std::isfinite(err) || !all_finite(y_new) || !all_finite(k7)) {
      // Overshot into a region where the field blows up; retry smaller.
      ++result.stats.rejected;
      h *= kMinFactor;
      continue;
    }

    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      ++result.stats.accepted;
      double factor = fac11 / std::pow(err_old, kBeta) / kSafety;
      factor = std::clamp(factor, 1.0 / kMaxFactor, 1.0 / kMinFactor);
      err_old = std::max(err, 1e-4);
      t = last ? interval.end : t + h;
      y = y_new;
      k1 = k7;
      h /= factor;
    } else {
      ++result.stats.rejected;
      h /= std::min(1.0 / kMinFactor, fac11 / kSafety);
    }
  }
  result.state = std::move(y);
  return result;
}

State integrate(const Field& field, std::span<const double> y0, const TimeInterval& interval,
                const SolverConfig& config) {
  config.validate();
  if (config.method == Method::kRk4Fixed) return integrate_fixed(field, y0, interval, config.n_steps);
  return integrate_adaptive(field, y0, interval, config.rtol, config.atol, config.max_steps).state;
}

Rk4Trajectory integrate_fixed_recorded(const DifferentiableField& field, std::span<const double> y0,
                                       const TimeInterval& interval, std::uint32_t n_steps) {
  interval.validate();
  if (n_steps < 1) throw ConfigError("n_steps must be at least 1");
  const std::size_t n = field.state_size();
  if (y0.size() != n) throw ConfigError("initial state has wrong length");
  Rk4Trajectory traj;
  traj.interval = interval;
  traj.n_steps = n_steps;
  traj.state_size = n;
  traj.stages.resize(static_cast<std::size_t>(n_steps) * 4 * n);

  const double h = interval.length() / n_steps;
  State y(y0.begin(), y0.end());
  State k1(n), k2(n), k3(n), k4(n);
  for (std::uint32_t step = 0; step < n_steps; ++step) {
    const double t = interval.start + step * h;
    double* s1 = traj.stages.data() + (static_cast<std::size_t>(step) * 4 + 0) * n;
    double* s2 = s1 + n;
    double* s3 = s2 + n;
    double* s4 = s3 + n;
    std::copy(y.begin(), y.end(), s1);
    field.eval(t, {s1, n}, k1);
    check_derivative(k1, t, step);
    for (std::size_t i = 0; i < n; ++i) s2[i] = y[i] + 0.5 * h * k1[i];
    field.eval(t + 0.5 * h, {s2, n}, k2);
    check_derivative(k2, t + 0.5 * h, step);
    for (std::size_t i = 0; i < n; ++i) s3[i] = y[i] + 0.5 * h * k2[i];
    field.eval(t + 0.5 * h, {s3, n}, k3);
    check_derivative(k3, t + 0.5 * h, step);
    for (std::size_t i = 0; i < n; ++i) s4[i] = y[i] + h * k3[i];
    field.eval(t + h, {s4, n}, k4);
    check_derivative(k4, t + h, step);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!all_finite(y)) throw IntegrationError("non-finite state", t + h, step);
  }
  traj.final_state = std::move(y);
  return traj;
}

State backprop_fixed(const DifferentiableField& field, const Rk4Trajectory& traj,
                     std::span<const double> final_bar, std::span<double> grad_params) {
  const std::size_t n = traj.state_size;
  if (final_bar.size() != n) throw ConfigError("final cotangent has wrong length");
  const double h = traj.interval.length() / traj.n_steps;
  State ybar(final_bar.begin(), final_bar.end());
  State k1bar(n), k2bar(n), k3bar(n), k4bar(n), gy(n);
  for (std::uint32_t step = traj.n_steps; step-- > 0;) {
    const double t = traj.interval.start + step * h;
    const double* s1 = traj.stages.data() + (static_cast<std::size_t>(step) * 4 + 0) * n;
    const double* s2 = s1 + n;
    const double* s3 = s2 + n;
    const double* s4 = s3 + n;
    for (std::size_t i = 0; i < n; ++i) {
      k1bar[i] = h / 6.0 * ybar[i];
      k2bar[i] = h / 3.0 * ybar[i];
      k3bar[i] = h / 3.0 * ybar[i];
      k4bar[i] = h / 6.0 * ybar[i];
    }
    // y_n flows directly into y_{n+1} and into every stage input.
    field.vjp(t + h, {s4, n}, k4bar, gy, grad_params);
    for (std::size_t i = 0; i < n; ++i) {
      ybar[i] += gy[i];
      k3bar[i] += h * gy[i];
    }
    field.vjp(t + 0.5 * h, {s3, n}, k3bar, gy, grad_params);
    for (std::size_t i = 0; i < n; ++i) {
      ybar[i] += gy[i];
      k2bar[i] += 0.5 * h * gy[i];
    }
    field.vjp(t + 0.5 * h, {s2, n}, k2bar, gy, grad_params);
    for (std::size_t i = 0; i < n; ++i) {
      ybar[i] += gy[i];
      k1bar[i] += 0.5 * h * gy[i];
    }
    field.vjp(t, {s1, n}, k1bar, gy, grad_params);
    for (std::size_t i = 0; i < n; ++i) ybar[i] += gy[i];
  }
  return ybar;
}

}  // namespace pvq::ode
