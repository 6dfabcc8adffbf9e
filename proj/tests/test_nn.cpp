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

#include <doctest.h>

#include <cmath>
#include <random>

#include "pvqflow/error.hpp"
#include "pvqflow/nn.hpp"
#include "support.hpp"

using namespace pvq;
using pvq::testing::normal_vector;
using pvq::testing::random_net;
using pvq::testing::relative_error;

namespace {

nn::Mlp hand_net() {
  nn::Matrix w1(2, 3, {0.5, -0.3, 0.2, 0.1, 0.4, -0.6});
  nn::Matrix w2(1, 2, {0.7, -1.2});
  return nn::Mlp::from_layers({w1, w2}, {{0.05, -0.1}, {0.3}});
}

}  // namespace

TEST_CASE("zero network evaluates to zero") {
  const nn::Mlp net(3, 5, 2);
  const std::vector<double> z{0.3, -1.0, 2.0};
  const auto out = nn::mlp_forward(net, z, 0.4, 0.7);
  REQUIRE(out.size() == 3);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("hand-evaluated tanh network") {
  const auto net = hand_net();
  const std::vector<double> z{0.8};
  CHECK(nn::mlp_forward(net, z, 0.25, 0.6)[0] == doctest::Approx(0.9482091879647883).epsilon(1e-14));
}

TEST_CASE("forward pass is bit-identical across calls") {
  const auto net = random_net(4, 16, 9);
  std::mt19937_64 gen(1);
  const auto z = normal_vector(gen, 4);
  const auto a = nn::mlp_forward(net, z, 0.3, 0.2);
  const auto b = nn::mlp_forward(net, z, 0.3, 0.2);
  CHECK(a == b);
  CHECK(nn::mlp_record(net, z, 0.3, 0.2).activations.back() == a);
}

TEST_CASE("dimension mismatch is a configuration error") {
  const nn::Mlp net(3, 4, 1);
  const std::vector<double> z{1.0, 2.0};
  CHECK_THROWS_AS(nn::mlp_forward(net, z, 0.0, 0.0), ConfigError);
  const std::vector<double> c{1.0};
  const std::vector<double> z3{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(nn::mlp_vjp(net, z3, 0.0, 0.0, c), ConfigError);
}

TEST_CASE("layer construction validates shapes") {
  nn::Matrix w1(2, 3), w2(1, 3);
  CHECK_THROWS_AS(nn::Mlp::from_layers({w1, w2}, {{0, 0}, {0}}), ConfigError);
  CHECK_THROWS_AS(nn::Mlp::from_layers({w1}, {{0, 0}}), ConfigError);
  nn::Matrix bad(1, 3, {0.0, NAN, 0.0});
  CHECK_THROWS_AS(nn::Mlp::from_layers({bad}, {{0.0}}), ConfigError);
  const auto net = hand_net();
  CHECK(net.dim() == 1);
  CHECK(net.hidden() == 2);
  CHECK(net.num_params() == 2 * 3 + 2 + 2 + 1);
  CHECK(net.weight(1).data == std::vector<double>{0.7, -1.2});
  CHECK(net.bias(0) == nn::Vector{0.05, -0.1});
}

TEST_CASE("initialization ranges") {
  nn::Mlp net(6, 32, 2);
  net.initialize(4);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& shape = net.layer(l);
    const double bound = (l + 1 == net.num_layers() ? 1e-2 : 1.0) / std::sqrt(double(shape.in));
    double max_abs = 0.0;
    for (double w : net.weight(l).data) max_abs = std::max(max_abs, std::abs(w));
    for (double b : net.bias(l)) max_abs = std::max(max_abs, std::abs(b));
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.5 * bound);
  }
  nn::Mlp again(6, 32, 2);
  again.initialize(4);
  CHECK(again == net);
  again.initialize(5);
  CHECK_FALSE(again == net);
}

TEST_CASE("zero cotangent gives zero gradients") {
  const auto net = random_net(3, 8, 2);
  const std::vector<double> z{0.1, 0.2, 0.3}, c(3, 0.0);
  const auto g = nn::mlp_vjp(net, z, 0.5, 0.5, c);
  for (double v : g.params) CHECK(v == 0.0);
  for (double v : g.z) CHECK(v == 0.0);
  CHECK(g.t == 0.0);
  CHECK(g.a == 0.0);
}

TEST_CASE("hand network gradients match central differences") {
  auto net = hand_net();
  const double z0 = 0.8, t = 0.25, a = 0.6, step = 1e-5;
  const std::vector<double> c{1.3};
  const std::vector<double> zv{z0};
  const auto g = nn::mlp_vjp(net, zv, t, a, c);
  auto out = [&](const nn::Mlp& n, double z, double tt, double aa) {
    const std::vector<double> v{z};
    return c[0] * nn::mlp_forward(n, v, tt, aa)[0];
  };
  const auto fd = nn::finite_difference_gradient(
      [&](std::span<const double> p) {
        nn::Mlp m = net;
        std::copy(p.begin(), p.end(), m.params().begin());
        return out(m, z0, t, a);
      },
      net.params(), step);
  for (std::size_t i = 0; i < fd.size(); ++i) CHECK(relative_error(g.params[i], fd[i]) < 1e-6);
  const double dz = (out(net, z0 + step, t, a) - out(net, z0 - step, t, a)) / (2 * step);
  const double dt = (out(net, z0, t + step, a) - out(net, z0, t - step, a)) / (2 * step);
  const double da = (out(net, z0, t, a + step) - out(net, z0, t, a - step)) / (2 * step);
  CHECK(relative_error(g.z[0], dz) < 1e-6);
  CHECK(relative_error(g.t, dt) < 1e-6);
  CHECK(relative_error(g.a, da) < 1e-6);
}

TEST_CASE("linear network input gradient is the transposed weight product") {
  nn::Matrix w(2, 4, {1.0, -2.0, 0.5, 3.0, 0.25, 4.0, -1.0, 2.0});
  const auto net = nn::Mlp::from_layers({w}, {{0.1, 0.2}});
  CHECK(net.hidden() == 0);
  const std::vector<double> z{0.3, -0.7}, c{2.0, -1.0};
  const auto g = nn::mlp_vjp(net, z, 0.4, 0.9, c);
  CHECK(g.z[0] == doctest::Approx(1.0 * 2.0 + 0.25 * -1.0));
  CHECK(g.z[1] == doctest::Approx(-2.0 * 2.0 + 4.0 * -1.0));
  CHECK(g.t == doctest::Approx(0.5 * 2.0 + -1.0 * -1.0));
  CHECK(g.a == doctest::Approx(3.0 * 2.0 + 2.0 * -1.0));
}

TEST_CASE("vjp agrees with finite differences over random trials") {
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + trial % 8;
    const auto net = random_net(d, 6, 100 + trial, 1 + trial % 2);
    const auto z = normal_vector(gen, d);
    const auto c = normal_vector(gen, d);
    const double t = testing::uniform(gen, 0, 1), a = testing::uniform(gen, 0, 1);
    const auto g = nn::mlp_vjp(net, z, t, a, c);
    const auto fd = nn::finite_difference_gradient(
        [&](std::span<const double> p) {
          nn::Mlp m = net;
          std::copy(p.begin(), p.end(), m.params().begin());
          const auto f = nn::mlp_forward(m, z, t, a);
          double s = 0.0;
          for (std::size_t i = 0; i < d; ++i) s += c[i] * f[i];
          return s;
        },
        net.params(), 1e-4);
    for (std::size_t i = 0; i < fd.size(); ++i) worst = std::max(worst, relative_error(g.params[i], fd[i]));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("vjp is linear in the cotangent") {
  const auto net = random_net(5, 12, 8);
  std::mt19937_64 gen(3);
  const auto z = normal_vector(gen, 5);
  const auto c1 = normal_vector(gen, 5), c2 = normal_vector(gen, 5);
  std::vector<double> c12(5);
  for (int i = 0; i < 5; ++i) c12[i] = c1[i] + c2[i];
  const auto g1 = nn::mlp_vjp(net, z, 0.2, 0.8, c1);
  const auto g2 = nn::mlp_vjp(net, z, 0.2, 0.8, c2);
  const auto g12 = nn::mlp_vjp(net, z, 0.2, 0.8, c12);
  for (std::size_t i = 0; i < g12.params.size(); ++i) {
    CHECK(g12.params[i] == doctest::Approx(g1.params[i] + g2.params[i]).epsilon(1e-12).scale(1.0));
  }
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(g12.z[i] == doctest::Approx(g1.z[i] + g2.z[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("recorded tangents are Jacobian-vector products") {
  const auto net = random_net(3, 10, 17);
  const std::vector<double> z{0.4, -0.2, 1.1}, dir{0.3, -1.0, 0.5};
  const auto tape = nn::mlp_record(net, z, 0.6, 0.1, dir);
  REQUIRE(tape.num_tangents == 1);
  const double h = 1e-6;
  std::vector<double> zp(3), zm(3);
  for (int i = 0; i < 3; ++i) {
    zp[i] = z[i] + h * dir[i];
    zm[i] = z[i] - h * dir[i];
  }
  const auto fp = nn::mlp_forward(net, zp, 0.6, 0.1), fm = nn::mlp_forward(net, zm, 0.6, 0.1);
  const auto jd = tape.output_tangent(0);
  for (int i = 0; i < 3; ++i) CHECK(jd[i] == doctest::Approx((fp[i] - fm[i]) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("finite-difference oracle") {
  const std::vector<double> p{1.5, -2.0, 0.25};
  SUBCASE("quadratic") {
    const auto g = nn::finite_difference_gradient(
        [](std::span<const double> x) {
          double s = 0.0;
          for (double v : x) s += 0.5 * v * v;
          return s;
        },
        p, 1e-3);
    for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(p[i]).epsilon(1e-9));
  }
  SUBCASE("constant") {
    const auto g = nn::finite_difference_gradient([](std::span<const double>) { return 4.0; }, p, 1e-3);
    for (double v : g) CHECK(v == 0.0);
  }
  SUBCASE("single network output matches vjp") {
    const auto net = random_net(2, 4, 6);
    const std::vector<double> z{0.5, -0.5}, c{0.0, 1.0};
    const auto fd = nn::finite_difference_gradient(
        [&](std::span<const double> x) {
          nn::Mlp m = net;
          std::copy(x.begin(), x.end(), m.params().begin());
          return nn::mlp_forward(m, z, 0.1, 0.2)[1];
        },
        net.params(), 1e-5);
    const auto g = nn::mlp_vjp(net, z, 0.1, 0.2, c);
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(relative_error(g.params[i], fd[i]) < 1e-6);
  }
  SUBCASE("non-finite loss") {
    CHECK_THROWS_AS(nn::finite_difference_gradient(
                        [](std::span<const double> x) { return x[0] > 1.5 ? NAN : 0.0; }, p, 1e-3),
                    NumericalError);
  }
  SUBCASE("non-positive step") {
    CHECK_THROWS(nn::finite_difference_gradient([](std::span<const double>) { return 0.0; }, p, 0.0));
  }
}
