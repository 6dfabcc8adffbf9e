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

namespace pvq::nn {

using Vector = std::vector<double>;

/// Dense row-major matrix value. Used for building and inspecting layers; the
/// network itself keeps all parameters in one flat buffer.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
  bool operator==(const LayerShape&) const = default;
};

/// Parameters of the vector-field network f(z, t, a). The input is the
/// concatenation [z; t; a] (length dim + 2), hidden layers use tanh, and the
/// output layer is linear with length dim.
class Mlp {
 public:
  Mlp() = default;
  /// All-zero network. hidden_layers may be 0, giving a single linear layer.
  Mlp(std::size_t dim, std::size_t hidden, std::size_t hidden_layers);

  /// Builds a network from explicit layers. Throws ConfigError on
  /// incompatible shapes or non-finite entries.
  static Mlp from_layers(const std::vector<Matrix>& weights,
                         const std::vector<Vector>& biases);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
  /// layer is multiplied by output_scale.
  void initialize(std::uint64_t seed, double output_scale = 1e-2);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t input_dim() const noexcept { return dim_ + 2; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t num_params() const noexcept { return params_.size(); }
  const LayerShape& layer(std::size_t l) const { return layers_.at(l); }

  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params() noexcept { return params_; }

  Matrix weight(std::size_t l) const;
  Vector bias(std::size_t l) const;

  bool operator==(const Mlp& other) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t hidden_ = 0;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

/// Recorded forward pass: primal activations for every layer plus optional
/// forward-mode tangent streams (J * d_k for input directions d_k over z).
/// Replaying the same inputs reproduces the output bit-exactly.
struct Tape {
  std::size_t num_tangents = 0;
  // activations[l] is the input of layer l; activations.back() is the output.
  std::vector<Vector> activations;
  // tangents[l][k * width + i]: tangent k of activations[l].
  std::vector<Vector> tangents;
  // pre_tangents[l]: tangent of the pre-activation of layer l.
  std::vector<Vector> pre_tangents;

  std::span<const double> output() const { return activations.back(); }
  /// Output tangent J * d_k.
  std::span<const double> output_tangent(std::size_t k) const;
};

/// f(z, t, a). Throws ConfigError if z.size() != dim.
Vector mlp_forward(const Mlp& net, std::span<const double> z, double t, double a);

/// Forward pass that records a tape. directions holds num_tangents vectors of
/// length dim laid out back to back; pass an empty span for none.
Tape mlp_record(const Mlp& net, std::span<const double> z, double t, double a,
                std::span<const double> directions = {});

struct MlpGradients {
  Vector params;
  Vector z;
  double t = 0.0;
  double a = 0.0;
};

/// Reverse-mode gradient of <cotangent, f(z, t, a)>.
MlpGradients mlp_vjp(const Mlp& net, std::span<const double> z, double t, double a,
                     std::span<const double> cotangent);

/// Reverse pass over a tape, including its tangent streams. output_bar is the
/// cotangent of f; tangent_bars holds one cotangent per recorded tangent
/// output (may be empty when the tape has none, which is treated as zero).
/// Parameter gradients are accumulated into grad_params; the gradient with
/// respect to the network input [z; t; a] is written to grad_input.
void mlp_backward(const Mlp& net, const Tape& tape, std::span<const double> output_bar,
                  std::span<const double> tangent_bars, std::span<double> grad_params,
                  std::span<double> grad_input);

/// Central-difference gradient of loss with respect to every entry of params.
/// params is restored before returning. Throws NumericalError if the loss is
/// not finite at any probe point.
Vector finite_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                  std::span<const double> params, double step);

}  // namespace pvq::nn
