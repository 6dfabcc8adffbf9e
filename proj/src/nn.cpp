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

#include "pvqflow/nn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pvqflow/error.hpp"

namespace pvq::nn {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " contains a non-finite entry");
  }
}

void check_dim(const Mlp& net, std::span<const double> z) {
  if (net.num_layers() == 0) throw ConfigError("network has no layers");
  if (z.size() != net.dim()) {
    throw ConfigError("embedding has length " + std::to_string(z.size()) +
                      ", network expects " + std::to_string(net.dim()));
  }
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw ConfigError("matrix data has " + std::to_string(data.size()) + " entries, expected " +
                      std::to_string(rows * cols));
  }
}

Mlp::Mlp(std::size_t dim, std::size_t hidden, std::size_t hidden_layers)
    : dim_(dim), hidden_(hidden_layers == 0 ? 0 : hidden) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (hidden_layers > 0 && hidden == 0) throw ConfigError("hidden width must be positive");
  std::size_t offset = 0;
  std::size_t in = dim + 2;
  for (std::size_t l = 0; l <= hidden_layers; ++l) {
    const std::size_t out = (l == hidden_layers) ? dim : hidden;
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  }
  params_.assign(offset, 0.0);
}

Mlp Mlp::from_layers(const std::vector<Matrix>& weights, const std::vector<Vector>& biases) {
  if (weights.empty() || weights.size() != biases.size()) {
    throw ConfigError("need matching, non-empty weight and bias lists");
  }
  const std::size_t dim = weights.back().rows;
  if (dim == 0 || weights.front().cols != dim + 2) {
    throw ConfigError("first layer must take dim + 2 inputs");
  }
  const std::size_t hidden = weights.size() > 1 ? weights.front().rows : 0;
  Mlp net(dim, hidden, weights.size() - 1);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const LayerShape& shape = net.layers_[l];
    if (weights[l].rows != shape.out || weights[l].cols != shape.in ||
        weights[l].data.size() != shape.in * shape.out || biases[l].size() != shape.out) {
      throw ConfigError("layer " + std::to_string(l) + " has incompatible shape");
    }
    require_finite(weights[l].data, "weight");
    require_finite(biases[l], "bias");
    std::copy(weights[l].data.begin(), weights[l].data.end(),
              net.params_.begin() + static_cast<std::ptrdiff_t>(shape.weight_offset));
    std::copy(biases[l].begin(), biases[l].end(),
              net.params_.begin() + static_cast<std::ptrdiff_t>(shape.bias_offset));
  }
  return net;
}

void Mlp::initialize(std::uint64_t seed, double output_scale) {
  std::mt19937_64 gen(seed);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerShape& shape = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(shape.in));
    const double scale = (l + 1 == layers_.size()) ? output_scale : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < shape.in * shape.out + shape.out; ++i) {
      params_[shape.weight_offset + i] = scale * dist(gen);
    }
  }
}

Matrix Mlp::weight(std::size_t l) const {
  const LayerShape& s = layers_.at(l);
  const auto first = params_.begin() + static_cast<std::ptrdiff_t>(s.weight_offset);
  return Matrix(s.out, s.in, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(s.in * s.out)));
}

Vector Mlp::bias(std::size_t l) const {
  const LayerShape& s = layers_.at(l);
  const auto first = params_.begin() + static_cast<std::ptrdiff_t>(s.bias_offset);
  return Vector(first, first + static_cast<std::ptrdiff_t>(s.out));
}

std::span<const double> Tape::output_tangent(std::size_t k) const {
  const Vector& last = tangents.back();
  const std::size_t width = activations.back().size();
  return std::span<const double>(last).subspan(k * width, width);
}

Tape mlp_record(const Mlp& net, std::span<const double> z, double t, double a,
                std::span<const double> directions) {
  check_dim(net, z);
  const std::size_t dim = net.dim();
  if (directions.size() % dim != 0) throw ConfigError("direction buffer is not a multiple of dim");
  const std::size_t n_tan = directions.size() / dim;
  const std::span<const double> p = net.params();

  Tape tape;
  tape.num_tangents = n_tan;
  const std::size_t n_layers = net.num_layers();
  tape.activations.resize(n_layers + 1);
  tape.tangents.resize(n_layers + 1);
  tape.pre_tangents.resize(n_layers);

  Vector& x = tape.activations[0];
  x.assign(z.begin(), z.end());
  x.push_back(t);
  x.push_back(a);
  Vector& dx = tape.tangents[0];
  dx.assign(n_tan * (dim + 2), 0.0);
  for (std::size_t k = 0; k < n_tan; ++k) {
    for (std::size_t i = 0; i < dim; ++i) dx[k * (dim + 2) + i] = directions[k * dim + i];
  }

  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerShape& s = net.layer(l);
    const double* w = p.data() + s.weight_offset;
    const double* b = p.data() + s.bias_offset;
    const bool hidden = l + 1 < n_layers;
    const Vector& in = tape.activations[l];
    const Vector& din = tape.tangents[l];
    Vector& out = tape.activations[l + 1];
    Vector& dpre = tape.pre_tangents[l];
    Vector& dout = tape.tangents[l + 1];
    out.assign(s.out, 0.0);
    dpre.assign(n_tan * s.out, 0.0);
    for (std::size_t i = 0; i < s.out; ++i) {
      const double* row = w + i * s.in;
      double acc = b[i];
      for (std::size_t j = 0; j < s.in; ++j) acc += row[j] * in[j];
      out[i] = hidden ? std::tanh(acc) : acc;
      for (std::size_t k = 0; k < n_tan; ++k) {
        const double* dk = din.data() + k * s.in;
        double dacc = 0.0;
        for (std::size_t j = 0; j < s.in; ++j) dacc += row[j] * dk[j];
        dpre[k * s.out + i] = dacc;
      }
    }
    dout = dpre;
    if (hidden) {
      for (std::size_t k = 0; k < n_tan; ++k) {
        for (std::size_t i = 0; i < s.out; ++i) dout[k * s.out + i] *= 1.0 - out[i] * out[i];
      }
    }
  }
  return tape;
}

Vector mlp_forward(const Mlp& net, std::span<const double> z, double t, double a) {
  Tape tape = mlp_record(net, z, t, a);
  return std::move(tape.activations.back());
}

void mlp_backward(const Mlp& net, const Tape& tape, std::span<const double> output_bar,
                  std::span<const double> tangent_bars, std::span<double> grad_params,
                  std::span<double> grad_input) {
  const std::size_t n_layers = net.num_layers();
  const std::size_t n_tan = tape.num_tangents;
  const std::size_t dim = net.dim();
  if (output_bar.size() != dim) throw ConfigError("cotangent length must equal dim");
  if (!tangent_bars.empty() && tangent_bars.size() != n_tan * dim) {
    throw ConfigError("tangent cotangents do not match the tape");
  }
  if (grad_params.size() != net.num_params()) throw ConfigError("gradient buffer has wrong size");
  if (grad_input.size() != dim + 2) throw ConfigError("input gradient buffer has wrong size");
  const bool with_tangents = !tangent_bars.empty() && n_tan > 0;
  const std::span<const double> p = net.params();

  Vector abar(output_bar.begin(), output_bar.end());
  Vector dbar;
  if (with_tangents) dbar.assign(tangent_bars.begin(), tangent_bars.end());

  Vector ubar;
  Vector dubar;
  for (std::size_t l = n_layers; l-- > 0;) {
    const LayerShape& s = net.layer(l);
    const double* w = p.data() + s.weight_offset;
    double* gw = grad_params.data() + s.weight_offset;
    double* gb = grad_params.data() + s.bias_offset;
    const Vector& in = tape.activations[l];
    const Vector& out = tape.activations[l + 1];
    const bool hidden = l + 1 < n_layers;

    ubar.assign(s.out, 0.0);
    dubar.assign(with_tangents ? n_tan * s.out : 0, 0.0);
    if (hidden) {
      // out = tanh(u); dout_k = (1 - out^2) * du_k.
      Vector sbar(s.out, 0.0);
      if (with_tangents) {
        const Vector& dpre = tape.pre_tangents[l];
        for (std::size_t k = 0; k < n_tan; ++k) {
          for (std::size_t i = 0; i < s.out; ++i) {
            const double g = 1.0 - out[i] * out[i];
            dubar[k * s.out + i] = g * dbar[k * s.out + i];
            sbar[i] += dbar[k * s.out + i] * dpre[k * s.out + i];
          }
        }
      }
      for (std::size_t i = 0; i < s.out; ++i) {
        const double g = 1.0 - out[i] * out[i];
        const double outbar = abar[i] - 2.0 * out[i] * sbar[i];
        ubar[i] = g * outbar;
      }
    } else {
      ubar = abar;
      if (with_tangents) dubar = dbar;
    }

    Vector next_abar(s.in, 0.0);
    Vector next_dbar(with_tangents && l > 0 ? n_tan * s.in : 0, 0.0);
    const Vector& din = tape.tangents[l];
    for (std::size_t i = 0; i < s.out; ++i) {
      const double* row = w + i * s.in;
      double* grow = gw + i * s.in;
      const double ui = ubar[i];
      gb[i] += ui;
      for (std::size_t j = 0; j < s.in; ++j) {
        grow[j] += ui * in[j];
        next_abar[j] += row[j] * ui;
      }
      if (with_tangents) {
        for (std::size_t k = 0; k < n_tan; ++k) {
          const double dui = dubar[k * s.out + i];
          const double* dk = din.data() + k * s.in;
          for (std::size_t j = 0; j < s.in; ++j) grow[j] += dui * dk[j];
          if (l > 0) {
            double* nk = next_dbar.data() + k * s.in;
            for (std::size_t j = 0; j < s.in; ++j) nk[j] += row[j] * dui;
          }
        }
      }
    }
    abar = std::move(next_abar);
    dbar = std::move(next_dbar);
  }
  std::copy(abar.begin(), abar.end(), grad_input.begin());
}

MlpGradients mlp_vjp(const Mlp& net, std::span<const double> z, double t, double a,
                     std::span<const double> cotangent) {
  const Tape tape = mlp_record(net, z, t, a);
  MlpGradients g;
  g.params.assign(net.num_params(), 0.0);
  Vector gin(net.dim() + 2, 0.0);
  mlp_backward(net, tape, cotangent, {}, g.params, gin);
  g.z.assign(gin.begin(), gin.begin() + static_cast<std::ptrdiff_t>(net.dim()));
  g.t = gin[net.dim()];
  g.a = gin[net.dim() + 1];
  return g;
}

Vector finite_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                  std::span<const double> params, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  Vector work(params.begin(), params.end());
  Vector grad(params.size(), 0.0);
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double orig = work[i];
    work[i] = orig + step;
    const double up = loss(work);
    work[i] = orig - step;
    const double down = loss(work);
    work[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("loss is not finite at parameter " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace pvq::nn
