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
#include <span>
#include <vector>

#include "pvqflow/nn.hpp"
#include "pvqflow/odeint.hpp"

namespace pvq::flow {

using Embedding = std::vector<double>;

/// Data end and base end of the flow: s = z(kDataTime), z(kBaseTime) ~ N(0, I).
inline constexpr double kDataTime = 1.0;
inline constexpr double kBaseTime = 0.0;

enum class TraceMode { kExact, kHutchinson };

struct TraceEstimatorConfig {
  TraceMode mode = TraceMode::kExact;
  std::uint32_t n_probes = 1;  // Rademacher probes, Hutchinson mode only
  std::uint64_t seed = 0;

  void validate() const;
};

/// Probe directions for one trace evaluation, laid out back to back, plus the
/// weight of each probe in the estimate.
struct ProbeSet {
  std::vector<double> directions;
  std::vector<double> weights;
  std::size_t count() const noexcept { return weights.size(); }
};

/// Exact mode: the standard basis with unit weights. Hutchinson mode: n_probes
/// Rademacher vectors keyed by (seed, stream, probe, coordinate), weight 1/n.
ProbeSet make_probes(const TraceEstimatorConfig& cfg, std::size_t dim, std::uint64_t stream = 0);

/// f(z, t, a).
Embedding vector_field(const nn::Mlp& net, std::span<const double> z, double t, double a);

/// tr(df/dz) from dim forward-mode passes.
double divergence_exact(const nn::Mlp& net, std::span<const double> z, double t, double a);

/// (1/n) sum_k e_k^T (df/dz) e_k with Rademacher e_k drawn from (cfg.seed, stream).
double divergence_hutchinson(const nn::Mlp& net, std::span<const double> z, double t, double a,
                             const TraceEstimatorConfig& cfg, std::uint64_t stream = 0);

/// Augmented right-hand side (z, trace integral) for a fixed attribute. With
/// an empty probe set only z is carried.
class FlowField final : public ode::DifferentiableField {
 public:
  FlowField(const nn::Mlp& net, double attribute, const ProbeSet* probes);

  std::size_t state_size() const override;
  void eval(double t, std::span<const double> y, std::span<double> dydt) const override;
  void vjp(double t, std::span<const double> y, std::span<const double> dydt_bar,
           std::span<double> grad_y, std::span<double> grad_params) const override;

  ode::Field as_field() const;

 private:
  const nn::Mlp& net_;
  double attribute_;
  const ProbeSet* probes_;
};

struct BaseTransform {
  Embedding z0;
  double logdet = 0.0;  // integral of tr(df/dz) from data time to base time
};

/// Integrates (z, trace integral) from the data end to the base end.
BaseTransform transform_to_base(const nn::Mlp& net, std::span<const double> s, double a,
                                const ode::SolverConfig& solver,
                                const TraceEstimatorConfig& trace, std::uint64_t stream = 0);

/// Same path as transform_to_base without the trace coordinate.
Embedding encode(const nn::Mlp& net, std::span<const double> s, double a,
                 const ode::SolverConfig& solver);

/// Integrates z from the base end to the data end under a_target.
Embedding transform_from_base(const nn::Mlp& net, std::span<const double> z0, double a_target,
                              const ode::SolverConfig& solver);

/// log N(x; 0, I).
double standard_normal_log_density(std::span<const double> x);

/// log p(s | a) = log N(z(t0); 0, I) + logdet.
double log_likelihood(const nn::Mlp& net, std::span<const double> s, double a,
                      const ode::SolverConfig& solver, const TraceEstimatorConfig& trace,
                      std::uint64_t stream = 0);

/// Encode at a, decode at a + delta. The target is not clamped to [0, 1].
Embedding manipulate(const nn::Mlp& net, std::span<const double> s, double a, double delta,
                     const ode::SolverConfig& solver);

}  // namespace pvq::flow
