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

#include "pvqflow/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pvqflow/error.hpp"
#include "pvqflow/rng.hpp"

namespace pvq::train {
namespace {

std::uint64_t probe_stream(std::size_t sample, std::uint64_t iteration) {
  return hash_counter({sample, iteration});
}

void check_batch(const nn::Mlp& net, const Dataset& data, std::span<const std::size_t> batch) {
  if (batch.empty()) throw DomainError("batch must not be empty");
  if (data.dim != net.dim()) throw ConfigError("dataset dimension does not match the model");
  for (std::size_t i : batch) {
    if (i >= data.size()) throw DomainError("batch index out of range");
  }
}

}  // namespace

void Dataset::validate() const {
  if (dim == 0) throw DomainError("dataset dimension must be positive");
  if (embeddings.size() != attributes.size() * dim) {
    throw DomainError("embedding rows do not match attribute count");
  }
  for (double v : embeddings) {
    if (!std::isfinite(v)) throw DomainError("dataset contains a non-finite embedding entry");
  }
  for (double a : attributes) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("attributes must lie in [0, 1]");
  }
}

void TrainingConfig::validate(std::size_t dataset_size) const {
  if (!(adam.learning_rate > 0.0) || !(adam.epsilon > 0.0)) {
    throw ConfigError("learning rate and epsilon must be positive");
  }
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (batch_size > dataset_size) throw ConfigError("batch size exceeds dataset size");
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
  trace.validate();
}

double nll_loss(const nn::Mlp& net, const Dataset& data, std::span<const std::size_t> batch,
                const LossOptions& opts) {
  check_batch(net, data, batch);
  const auto solver = ode::SolverConfig::fixed(opts.n_steps);
  double acc = 0.0;
  for (std::size_t i : batch) {
    const double ll = flow::log_likelihood(net, data.row(i), data.attributes[i], solver, opts.trace,
                                           probe_stream(i, opts.iteration));
    if (!std::isfinite(ll)) {
      throw NumericalError("non-finite log-likelihood for sample " + std::to_string(i));
    }
    acc += ll;
  }
  return -acc / static_cast<double>(batch.size());
}

LossAndGradient loss_gradient(const nn::Mlp& net, const Dataset& data,
                              std::span<const std::size_t> batch, const LossOptions& opts) {
  check_batch(net, data, batch);
  const std::size_t dim = net.dim();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  LossAndGradient out;
  out.grad.assign(net.num_params(), 0.0);
  std::vector<double> y0(dim + 1, 0.0);
  std::vector<double> final_bar(dim + 1, 0.0);
  double acc = 0.0;
  for (std::size_t i : batch) {
    const flow::ProbeSet probes = flow::make_probes(opts.trace, dim, probe_stream(i, opts.iteration));
    const flow::FlowField field(net, data.attributes[i], &probes);
    const auto row = data.row(i);
    std::copy(row.begin(), row.end(), y0.begin());
    y0[dim] = 0.0;
    ode::Rk4Trajectory traj;
    try {
      traj = ode::integrate_fixed_recorded(field, y0, {flow::kDataTime, flow::kBaseTime},
                                           opts.n_steps);
    } catch (const IntegrationError& e) {
      throw NumericalError("sample " + std::to_string(i) + ": " + e.what());
    }
    const std::span<const double> z0 = std::span<const double>(traj.final_state).first(dim);
    const double ll = flow::standard_normal_log_density(z0) + traj.final_state[dim];
    if (!std::isfinite(ll)) {
      throw NumericalError("non-finite log-likelihood for sample " + std::to_string(i));
    }
    acc += ll;
    // d(-ll)/dz0 = z0, d(-ll)/dlogdet = -1, both scaled by 1/|batch|.
    for (std::size_t d = 0; d < dim; ++d) final_bar[d] = z0[d] * inv_b;
    final_bar[dim] = -inv_b;
    ode::backprop_fixed(field, traj, final_bar, out.grad);
  }
  out.loss = -acc * inv_b;
  return out;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  if (grads.size() != params.size()) throw ConfigError("gradient and parameter sizes differ");
  if (state.m.empty()) state.m.assign(params.size(), 0.0);
  if (state.v.empty()) state.v.assign(params.size(), 0.0);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ConfigError("optimizer state does not match the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
  }
}

std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t batch_size,
                                       std::uint64_t seed, std::uint64_t iteration) {
  if (batch_size == 0 || batch_size > dataset_size) throw ConfigError("invalid batch size");
  const std::uint64_t per_epoch = dataset_size / batch_size;
  const std::uint64_t epoch = iteration / per_epoch;
  const std::uint64_t slot = iteration % per_epoch;
  std::vector<std::size_t> perm(dataset_size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Fisher-Yates driven by the counter hash; std::shuffle's draw pattern is
  // implementation-defined.
  for (std::size_t i = dataset_size; i > 1; --i) {
    const std::size_t j = hash_counter({seed, epoch, i}) % i;
    std::swap(perm[i - 1], perm[j]);
  }
  const auto first = perm.begin() + static_cast<std::ptrdiff_t>(slot * batch_size);
  return {first, first + static_cast<std::ptrdiff_t>(batch_size)};
}

TrainResult train(const Dataset& data, const TrainingConfig& config, nn::Mlp initial,
                  AdamState optimizer, const CheckpointCallback& on_checkpoint) {
  data.validate();
  config.validate(data.size());
  if (data.dim != initial.dim()) throw ConfigError("dataset dimension does not match the model");
  TrainResult result{std::move(initial), {}, std::move(optimizer)};
  result.loss_curve.reserve(config.iterations);
  const std::uint64_t first = result.optimizer.step;
  for (std::uint64_t it = first; it < first + config.iterations; ++it) {
    const auto batch = batch_indices(data.size(), config.batch_size, config.seed, it);
    LossOptions opts{config.n_steps, config.trace, it};
    LossAndGradient lg;
    try {
      lg = loss_gradient(result.params, data, batch, opts);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(it) + ": " + e.what());
    }
    if (!std::isfinite(lg.loss)) throw NumericalError("non-finite loss at iteration " + std::to_string(it));
    result.loss_curve.push_back(lg.loss);
    adam_step(result.params.params(), lg.grad, result.optimizer, config.adam);
    if (config.checkpoint_every > 0 && on_checkpoint &&
        result.optimizer.step % config.checkpoint_every == 0) {
      on_checkpoint(result.optimizer.step, result.params, result.optimizer, result.loss_curve);
    }
  }
  return result;
}

GradCheckReport gradient_self_test(std::uint64_t seed, std::size_t points, double tolerance,
                                   double fd_step) {
  constexpr std::size_t kDim = 2, kHidden = 8, kBatch = 3;
  constexpr std::uint32_t kSteps = 4;
  GradCheckReport report;
  report.tolerance = tolerance;
  const LossOptions opts{kSteps, {flow::TraceMode::kExact, 1, 0}, 0};
  for (std::size_t p = 0; p < points; ++p) {
    std::mt19937_64 gen(hash_counter({seed, p}));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Dataset data;
    data.dim = kDim;
    for (std::size_t n = 0; n < kBatch; ++n) {
      for (std::size_t d = 0; d < kDim; ++d) data.embeddings.push_back(normal(gen));
      data.attributes.push_back(unit(gen));
    }
    nn::Mlp net(kDim, kHidden, 2);
    net.initialize(gen(), 1.0);
    const std::vector<std::size_t> batch{0, 1, 2};
    const LossAndGradient lg = loss_gradient(net, data, batch, opts);
    const auto fd = nn::finite_difference_gradient(
        [&](std::span<const double> theta) {
          nn::Mlp probe = net;
          std::copy(theta.begin(), theta.end(), probe.params().begin());
          return nll_loss(probe, data, batch, opts);
        },
        net.params(), fd_step);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double rel = std::abs(lg.grad[i] - fd[i]) / (std::abs(fd[i]) + 1e-8);
      report.max_relative_error = std::max(report.max_relative_error, rel);
    }
    report.parameters_checked += fd.size();
    ++report.points;
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace pvq::train
