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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pvqflow/nn.hpp"

namespace pvq::testing {

inline std::vector<double> normal_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / (std::abs(reference) + 1e-8);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// f(z) = diag(scale) z as a linear network (no hidden layers).
inline nn::Mlp diagonal_field(const std::vector<double>& scale) {
  const std::size_t d = scale.size();
  nn::Matrix w(d, d + 2);
  for (std::size_t i = 0; i < d; ++i) w(i, i) = scale[i];
  return nn::Mlp::from_layers({w}, {nn::Vector(d, 0.0)});
}

/// f(z) = -z.
inline nn::Mlp negative_identity_field(std::size_t d) {
  return diagonal_field(std::vector<double>(d, -1.0));
}

/// Random network with full-size output layer.
inline nn::Mlp random_net(std::size_t d, std::size_t hidden, std::uint64_t seed,
                          std::size_t hidden_layers = 2, double output_scale = 1.0) {
  nn::Mlp net(d, hidden, hidden_layers);
  net.initialize(seed, output_scale);
  return net;
}

}  // namespace pvq::testing
