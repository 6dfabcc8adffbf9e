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

#include "pvqflow/ccnf.hpp"
#include "pvqflow/nn.hpp"

namespace pvq::train {

/// N embeddings of length dim (row-major) with one attribute each.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> embeddings;
  std::vector<double> attributes;

  std::size_t size() const noexcept { return attributes.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(embeddings).subspan(i * dim, dim);
  }
  /// Throws DomainError unless row counts match, all values are finite and
  /// attributes lie in [0, 1].
  void validate() const;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;  // completed updates

  bool operator==(const AdamState&) const = default;
};

struct TrainingConfig {
  AdamConfig adam;
  std::size_t batch_size = 64;
  std::uint64_t iterations = 0;
  std::uint32_t n_steps = 32;
  flow::TraceEstimatorConfig trace{flow::TraceMode::kHutchinson, 1, 0};
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_every = 0;  // 0 disables the callback

  void validate(std::size_t dataset_size) const;
};

/// Settings shared by the loss and its gradient. Hutchinson probes for sample
/// n are keyed by (trace.seed, n, iteration) and are constant within an
/// iteration.
struct LossOptions {
  std::uint32_t n_steps = 32;
  flow::TraceEstimatorConfig trace;
  std::uint64_t iteration = 0;
};

/// -(1/|batch|) sum_n log p(s_n | a_n) with fixed-step RK4.
double nll_loss(const nn::Mlp& net, const Dataset& data, std::span<const std::size_t> batch,
                const LossOptions& opts);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Exact gradient of nll_loss as computed, by reverse-mode differentiation
/// through every RK4 stage of the z and trace coordinates.
LossAndGradient loss_gradient(const nn::Mlp& net, const Dataset& data,
                              std::span<const std::size_t> batch, const LossOptions& opts);

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

/// Indices of the minibatch used at `iteration`. Each epoch is a seeded
/// permutation of the dataset cut into floor(N / batch) batches, so any
/// iteration can be reproduced without replaying earlier ones.
std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t batch_size,
                                       std::uint64_t seed, std::uint64_t iteration);

struct TrainResult {
  nn::Mlp params;
  std::vector<double> loss_curve;  // batch loss before each update
  AdamState optimizer;
};

/// Receives the state after `iteration` updates and this run's loss curve so far.
using CheckpointCallback = std::function<void(std::uint64_t iteration, const nn::Mlp&,
                                              const AdamState&, const std::vector<double>&)>;

/// Runs config.iterations Adam updates, continuing from optimizer.step.
/// Throws NumericalError naming the iteration if the loss is not finite.
TrainResult train(const Dataset& data, const TrainingConfig& config, nn::Mlp initial,
                  AdamState optimizer = {}, const CheckpointCallback& on_checkpoint = {});

struct GradCheckReport {
  std::size_t points = 0;
  std::size_t parameters_checked = 0;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares loss_gradient against central differences at `points` random
/// parameter draws (dim 2, hidden 8, 4 RK4 steps, exact trace). Relative
/// error is |g - fd| / (|fd| + 1e-8).
GradCheckReport gradient_self_test(std::uint64_t seed, std::size_t points = 3,
                                   double tolerance = 1e-4, double fd_step = 1e-5);

}  // namespace pvq::train
