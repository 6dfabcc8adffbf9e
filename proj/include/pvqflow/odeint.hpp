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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pvq::ode {

using State = std::vector<double>;

/// dy/dt = field(t, y), written into dydt (same length as y).
using Field = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Integration runs from start to end; the direction is sign(end - start).
struct TimeInterval {
  double start = 1.0;
  double end = 0.0;

  double length() const noexcept { return end - start; }
  void validate() const;
};

enum class Method { kRk4Fixed, kDopri5Adaptive };

struct SolverConfig {
  Method method = Method::kDopri5Adaptive;
  std::uint32_t n_steps = 32;
  double rtol = 1e-6;
  double atol = 1e-6;
  std::uint32_t max_steps = 100000;

  static SolverConfig fixed(std::uint32_t n_steps);
  static SolverConfig adaptive(double rtol, double atol, std::uint32_t max_steps = 100000);
  void validate() const;
};

struct AdaptiveStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct AdaptiveResult {
  State state;
  AdaptiveStats stats;
};

/// One classical fourth-order Runge-Kutta step. step_index is only used to
/// label errors.
State rk4_step(const Field& field, std::span<const double> y, double t, double h,
               std::size_t step_index = 0);

/// n_steps equal RK4 steps over the interval. Step k starts at
/// start + k * (end - start) / n_steps.
State integrate_fixed(const Field& field, std::span<const double> y0,
                      const TimeInterval& interval, std::uint32_t n_steps);

/// Dormand-Prince 5(4) with a PI step-size controller. A step is accepted when
/// max_i |err_i| / (atol + rtol * max(|y_i|, |y_new_i|)) <= 1. Throws
/// IntegrationError once more than max_steps trial steps were attempted.
AdaptiveResult integrate_adaptive(const Field& field, std::span<const double> y0,
                                  const TimeInterval& interval, double rtol, double atol,
                                  std::uint32_t max_steps);

/// Dispatches on config.method.
State integrate(const Field& field, std::span<const double> y0, const TimeInterval& interval,
                const SolverConfig& config);

/// A right-hand side that also supports reverse-mode differentiation with
/// respect to its state and its (externally owned) parameters.
class DifferentiableField {
 public:
  virtual ~DifferentiableField() = default;
  virtual std::size_t state_size() const = 0;
  virtual void eval(double t, std::span<const double> y, std::span<double> dydt) const = 0;
  /// Given the cotangent of dydt, writes the cotangent of y into grad_y and
  /// accumulates parameter cotangents into grad_params.
  virtual void vjp(double t, std::span<const double> y, std::span<const double> dydt_bar,
                   std::span<double> grad_y, std::span<double> grad_params) const = 0;
};

/// Stage inputs of every RK4 step, kept for the reverse pass.
struct Rk4Trajectory {
  TimeInterval interval;
  std::uint32_t n_steps = 0;
  std::size_t state_size = 0;
  // stages[(step * 4 + s) * state_size ...]: input of stage s at step `step`.
  std::vector<double> stages;
  State final_state;
};

Rk4Trajectory integrate_fixed_recorded(const DifferentiableField& field, std::span<const double> y0,
                                       const TimeInterval& interval, std::uint32_t n_steps);

/// Reverse pass through a recorded trajectory. Returns the cotangent of y0 and
/// accumulates parameter cotangents into grad_params.
State backprop_fixed(const DifferentiableField& field, const Rk4Trajectory& trajectory,
                     std::span<const double> final_bar, std::span<double> grad_params);

}  // namespace pvq::ode
