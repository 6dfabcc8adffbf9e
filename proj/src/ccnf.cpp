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

#include "pvqflow/ccnf.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pvqflow/error.hpp"
#include "pvqflow/rng.hpp"

namespace pvq::flow {
namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

double probe_trace(const nn::Tape& tape, const ProbeSet& probes, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t k = 0; k < probes.count(); ++k) {
    const std::span<const double> jd = tape.output_tangent(k);
    const double* d = probes.directions.data() + k * dim;
    double q = 0.0;
    for (std::size_t i = 0; i < dim; ++i) q += d[i] * jd[i];
    acc += probes.weights[k] * q;
  }
  return acc;
}

}  // namespace

void TraceEstimatorConfig::validate() const {
  if (mode == TraceMode::kHutchinson && n_probes < 1) {
    throw ConfigError("Hutchinson trace estimation needs at least one probe");
  }
}

ProbeSet make_probes(const TraceEstimatorConfig& cfg, std::size_t dim, std::uint64_t stream) {
  cfg.validate();
  ProbeSet p;
  if (cfg.mode == TraceMode::kExact) {
    p.directions.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) p.directions[i * dim + i] = 1.0;
    p.weights.assign(dim, 1.0);
    return p;
  }
  p.directions.resize(cfg.n_probes * dim);
  for (std::size_t k = 0; k < cfg.n_probes; ++k) {
    for (std::size_t i = 0; i < dim; ++i) p.directions[k * dim + i] = rademacher({cfg.seed, stream, k, i});
  }
  p.weights.assign(cfg.n_probes, 1.0 / cfg.n_probes);
  return p;
}

Embedding vector_field(const nn::Mlp& net, std::span<const double> z, double t, double a) {
  return nn::mlp_forward(net, z, t, a);
}

double divergence_exact(const nn::Mlp& net, std::span<const double> z, double t, double a) {
  const ProbeSet probes = make_probes({TraceMode::kExact, 1, 0}, net.dim());
  const nn::Tape tape = nn::mlp_record(net, z, t, a, probes.directions);
  return probe_trace(tape, probes, net.dim());
}

double divergence_hutchinson(const nn::Mlp& net, std::span<const double> z, double t, double a,
                             const TraceEstimatorConfig& cfg, std::uint64_t stream) {
  if (cfg.mode != TraceMode::kHutchinson) throw ConfigError("trace config is not in Hutchinson mode");
  const ProbeSet probes = make_probes(cfg, net.dim(), stream);
  const nn::Tape tape = nn::mlp_record(net, z, t, a, probes.directions);
  return probe_trace(tape, probes, net.dim());
}

FlowField::FlowField(const nn::Mlp& net, double attribute, const ProbeSet* probes)
    : net_(net), attribute_(attribute), probes_(probes) {}

std::size_t FlowField::state_size() const {
  return net_.dim() + ((probes_ && probes_->count() > 0) ? 1 : 0);
}

void FlowField::eval(double t, std::span<const double> y, std::span<double> dydt) const {
  const std::size_t dim = net_.dim();
  const bool trace = probes_ && probes_->count() > 0;
  const nn::Tape tape = nn::mlp_record(net_, y.first(dim), t, attribute_,
                                       trace ? std::span<const double>(probes_->directions)
                                             : std::span<const double>());
  const std::span<const double> f = tape.output();
  std::copy(f.begin(), f.end(), dydt.begin());
  if (trace) dydt[dim] = probe_trace(tape, *probes_, dim);
}

void FlowField::vjp(double t, std::span<const double> y, std::span<const double> dydt_bar,
                    std::span<double> grad_y, std::span<double> grad_params) const {
  const std::size_t dim = net_.dim();
  const bool trace = probes_ && probes_->count() > 0;
  const nn::Tape tape = nn::mlp_record(net_, y.first(dim), t, attribute_,
                                       trace ? std::span<const double>(probes_->directions)
                                             : std::span<const double>());
  std::vector<double> tangent_bars;
  if (trace) {
    const double lbar = dydt_bar[dim];
    tangent_bars.resize(probes_->directions.size());
    for (std::size_t k = 0; k < probes_->count(); ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        tangent_bars[k * dim + i] = lbar * probes_->weights[k] * probes_->directions[k * dim + i];
      }
    }
  }
  std::vector<double> gin(dim + 2, 0.0);
  nn::mlp_backward(net_, tape, dydt_bar.first(dim), tangent_bars, grad_params, gin);
  std::copy(gin.begin(), gin.begin() + static_cast<std::ptrdiff_t>(dim), grad_y.begin());
  if (trace) grad_y[dim] = 0.0;  // the field does not depend on the accumulator
}

ode::Field FlowField::as_field() const {
  return [this](double t, std::span<const double> y, std::span<double> dydt) { eval(t, y, dydt); };
}

BaseTransform transform_to_base(const nn::Mlp& net, std::span<const double> s, double a,
                                const ode::SolverConfig& solver,
                                const TraceEstimatorConfig& trace, std::uint64_t stream) {
  require_finite(s, "embedding");
  require_finite(a, "attribute");
  if (s.size() != net.dim()) throw ConfigError("embedding length does not match the model");
  const ProbeSet probes = make_probes(trace, net.dim(), stream);
  const FlowField field(net, a, &probes);
  std::vector<double> y0(s.begin(), s.end());
  y0.push_back(0.0);
  const ode::State y = ode::integrate(field.as_field(), y0, {kDataTime, kBaseTime}, solver);
  BaseTransform out;
  out.z0.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(net.dim()));
  out.logdet = y.back();
  return out;
}

Embedding encode(const nn::Mlp& net, std::span<const double> s, double a,
                 const ode::SolverConfig& solver) {
  require_finite(s, "embedding");
  require_finite(a, "attribute");
  if (s.size() != net.dim()) throw ConfigError("embedding length does not match the model");
  const FlowField field(net, a, nullptr);
  return ode::integrate(field.as_field(), s, {kDataTime, kBaseTime}, solver);
}

Embedding transform_from_base(const nn::Mlp& net, std::span<const double> z0, double a_target,
                              const ode::SolverConfig& solver) {
  require_finite(z0, "base vector");
  require_finite(a_target, "target attribute");
  if (z0.size() != net.dim()) throw ConfigError("base vector length does not match the model");
  const FlowField field(net, a_target, nullptr);
  return ode::integrate(field.as_field(), z0, {kBaseTime, kDataTime}, solver);
}

double standard_normal_log_density(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * sq;
}

double log_likelihood(const nn::Mlp& net, std::span<const double> s, double a,
                      const ode::SolverConfig& solver, const TraceEstimatorConfig& trace,
                      std::uint64_t stream) {
  const BaseTransform b = transform_to_base(net, s, a, solver, trace, stream);
  return standard_normal_log_density(b.z0) + b.logdet;
}

Embedding manipulate(const nn::Mlp& net, std::span<const double> s, double a, double delta,
                     const ode::SolverConfig& solver) {
  require_finite(delta, "manipulation delta");
  const Embedding z0 = encode(net, s, a, solver);
  return transform_from_base(net, z0, a + delta, solver);
}

}  // namespace pvq::flow
