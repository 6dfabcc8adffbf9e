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

#include <filesystem>
#include <fstream>

#include "pvqflow/config.hpp"
#include "pvqflow/error.hpp"

using namespace pvq;

TEST_CASE("defaults") {
  const config::RunConfig c;
  CHECK(c.seed == 1);
  CHECK(c.world.dim == 16);
  CHECK(c.model.hidden == 64);
  CHECK(c.model.hidden_layers == 2);
  CHECK(c.model.output_scale == 1e-2);
  CHECK(c.training.adam.learning_rate == 1e-3);
  CHECK(c.training.batch_size == 64);
  CHECK(c.training.n_steps == 32);
  CHECK(c.training.trace.mode == flow::TraceMode::kHutchinson);
  CHECK(c.training.trace.n_probes == 1);
  CHECK(c.solver.method == ode::Method::kDopri5Adaptive);
  CHECK(c.solver.rtol == 1e-6);
  CHECK(c.vad.relative_threshold == 0.05);
  CHECK(c.manipulate.factors.size() == 13);
  CHECK(c.analyze.grid == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("factor lists") {
  const auto sweep = config::parse_factor_list("-1.5:0.25:1.5");
  REQUIRE(sweep.size() == 13);
  for (std::size_t i = 0; i < 13; ++i) CHECK(sweep[i] == doctest::Approx(-1.5 + 0.25 * i).epsilon(1e-15));
  CHECK(sweep[6] == 0.0);
  const auto offset = config::parse_factor_list("0.1:0.2:0.7");
  REQUIRE(offset.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(offset[i] == doctest::Approx(0.1 + 0.2 * i).epsilon(1e-15));
  CHECK(config::parse_factor_list("1, -1,0") == std::vector<double>{1.0, -1.0, 0.0});
  CHECK(config::parse_factor_list("0.5") == std::vector<double>{0.5});
  CHECK(config::parse_factor_list("").empty());
  CHECK_THROWS_AS(config::parse_factor_list("1:0:2"), ConfigError);
  CHECK_THROWS_AS(config::parse_factor_list("2:0.5:1"), ConfigError);
  CHECK_THROWS_AS(config::parse_factor_list("a,b"), ConfigError);
}

TEST_CASE("INI parsing") {
  const auto c = config::parse_config(R"(
# experiment
[run]
seed = 99

[world]
dim = 8
noise_scale = 0.1

[training]
learning_rate = 0.005
iterations = 12
grad_check = true

[trace]
mode = exact

[solver]
method = rk4
n_steps = 16

[vad]
reference = peak

[manipulate]
factors = -1:0.5:1

[paths]
out_dir = results
)");
  CHECK(c.seed == 99);
  CHECK(c.world.dim == 8);
  CHECK(c.world.noise_scale == 0.1);
  CHECK(c.training.adam.learning_rate == 0.005);
  CHECK(c.training.iterations == 12);
  CHECK(c.grad_check);
  CHECK(c.training.trace.mode == flow::TraceMode::kExact);
  CHECK(c.solver.method == ode::Method::kRk4Fixed);
  CHECK(c.solver.n_steps == 16);
  CHECK(c.vad.reference == attributes::EnergyReference::kPeak);
  CHECK(c.manipulate.factors == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(c.paths.resolve("", "model.cnfp") == "results/model.cnfp");
  CHECK(c.paths.resolve("elsewhere/m.cnfp", "model.cnfp") == "elsewhere/m.cnfp");

  CHECK_THROWS_AS(config::parse_config("[world]\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("[nowhere]\ndim = 3\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("[world]\ndim = three\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("[world]\ndim = -3\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("[solver]\nmethod = euler\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("[world\ndim = 3\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("seed = 3\n"), ConfigError);
}

TEST_CASE("key access") {
  config::RunConfig c;
  for (const auto& key : config::known_keys()) {
    const auto value = config::get_value(c, key);
    CHECK_NOTHROW(config::set_value(c, key, value));
    CHECK(config::get_value(c, key) == value);
  }
  config::set_value(c, "training.grad_check", "yes");
  CHECK(c.grad_check);
  config::set_value(c, "training.grad_check", "0");
  CHECK_FALSE(c.grad_check);
  CHECK_THROWS_AS(config::set_value(c, "training.grad_check", "maybe"), ConfigError);
  CHECK_THROWS_AS(config::set_value(c, "bogus.key", "1"), ConfigError);
  CHECK_THROWS_AS(config::get_value(c, "bogus.key"), ConfigError);
  config::set_value(c, "analyze.grid", "0.5,1");
  CHECK(c.analyze.grid == std::vector<double>{0.5, 1.0});
}

TEST_CASE("validation and files") {
  config::RunConfig c;
  c.manipulate.input = "test";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config::RunConfig{};
  c.world.dim = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config::RunConfig{};
  c.vad.relative_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_THROWS_AS(config::load_config("/nonexistent/run.ini"), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "pvqflow_config_test.ini";
  std::ofstream(path) << "[run]\nseed = 5\n";
  CHECK(config::load_config(path.string()).seed == 5);
  std::filesystem::remove(path);
}
