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

#include "pvqflow/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "pvqflow/error.hpp"
#include "pvqflow/io.hpp"

namespace pvq::config {
namespace {

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    return io::parse_u64(v);
  } catch (const IoError&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    const double d = io::parse_double(v);
    if (!std::isfinite(d)) throw IoError("");
    return d;
  } catch (const IoError&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += io::format_double(values[i]);
  }
  return out;
}

struct Accessor {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define PVQ_UINT(field)                                                                  \
  Accessor {                                                                             \
    [](RunConfig& c, const std::string& k, const std::string& v) {                       \
      c.field = static_cast<decltype(c.field)>(to_u64(k, v));                            \
    },                                                                                   \
        [](const RunConfig& c) { return std::to_string(c.field); }                       \
  }
#define PVQ_REAL(field)                                                                                   \
  Accessor {                                                                                              \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); },          \
        [](const RunConfig& c) { return io::format_double(c.field); }                                     \
  }
#define PVQ_TEXT(field)                                                                   \
  Accessor {                                                                              \
    [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; },          \
        [](const RunConfig& c) { return c.field; }                                        \
  }
#define PVQ_FLAG(field)                                                                                  \
  Accessor {                                                                                             \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); },           \
        [](const RunConfig& c) { return from_bool(c.field); }                                            \
  }

const std::vector<std::pair<std::string, Accessor>>& accessors() {
  static const std::vector<std::pair<std::string, Accessor>> table = {
      {"run.seed", PVQ_UINT(seed)},
      {"world.dim", PVQ_UINT(world.dim)},
      {"world.n", PVQ_UINT(world.n)},
      {"world.n_heldout", PVQ_UINT(world.n_heldout)},
      {"world.noise_scale", PVQ_REAL(world.noise_scale)},
      {"model.hidden", PVQ_UINT(model.hidden)},
      {"model.hidden_layers", PVQ_UINT(model.hidden_layers)},
      {"model.output_scale", PVQ_REAL(model.output_scale)},
      {"training.learning_rate", PVQ_REAL(training.adam.learning_rate)},
      {"training.beta1", PVQ_REAL(training.adam.beta1)},
      {"training.beta2", PVQ_REAL(training.adam.beta2)},
      {"training.epsilon", PVQ_REAL(training.adam.epsilon)},
      {"training.batch_size", PVQ_UINT(training.batch_size)},
      {"training.iterations", PVQ_UINT(training.iterations)},
      {"training.n_steps", PVQ_UINT(training.n_steps)},
      {"training.checkpoint_every", PVQ_UINT(training.checkpoint_every)},
      {"training.grad_check", PVQ_FLAG(grad_check)},
      {"trace.mode",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "exact") {
            c.training.trace.mode = flow::TraceMode::kExact;
          } else if (v == "hutchinson") {
            c.training.trace.mode = flow::TraceMode::kHutchinson;
          } else {
            throw ConfigError(k + ": expected exact or hutchinson, got '" + v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.training.trace.mode == flow::TraceMode::kExact ? "exact" : "hutchinson");
        }}},
      {"trace.n_probes", PVQ_UINT(training.trace.n_probes)},
      {"solver.method",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "rk4") {
            c.solver.method = ode::Method::kRk4Fixed;
          } else if (v == "dopri5") {
            c.solver.method = ode::Method::kDopri5Adaptive;
          } else {
            throw ConfigError(k + ": expected rk4 or dopri5, got '" + v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.solver.method == ode::Method::kRk4Fixed ? "rk4" : "dopri5");
        }}},
      {"solver.n_steps", PVQ_UINT(solver.n_steps)},
      {"solver.rtol", PVQ_REAL(solver.rtol)},
      {"solver.atol", PVQ_REAL(solver.atol)},
      {"solver.max_steps", PVQ_UINT(solver.max_steps)},
      {"vad.relative_threshold", PVQ_REAL(vad.relative_threshold)},
      {"vad.reference",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "peak") {
            c.vad.reference = attributes::EnergyReference::kPeak;
          } else if (v == "percentile_95") {
            c.vad.reference = attributes::EnergyReference::kPercentile95;
          } else {
            throw ConfigError(k + ": expected peak or percentile_95, got '" + v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.vad.reference == attributes::EnergyReference::kPeak ? "peak"
                                                                                   : "percentile_95");
        }}},
      {"manipulate.factors",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.manipulate.factors = parse_factor_list(v);
        },
        [](const RunConfig& c) { return join(c.manipulate.factors); }}},
      {"manipulate.input", PVQ_TEXT(manipulate.input)},
      {"analyze.utterances", PVQ_UINT(analyze.utterances)},
      {"analyze.frames", PVQ_UINT(analyze.frames)},
      {"analyze.set_label", PVQ_TEXT(analyze.set_label)},
      {"analyze.grid",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.analyze.grid = parse_factor_list(v); },
        [](const RunConfig& c) { return join(c.analyze.grid); }}},
      {"analyze.combine_signs", PVQ_FLAG(analyze.combine_signs)},
      {"analyze.write_sequences", PVQ_FLAG(analyze.write_sequences)},
      {"analyze.original_sequence", PVQ_TEXT(analyze.original_sequence)},
      {"analyze.manipulated_sequences", PVQ_TEXT(analyze.manipulated_sequences)},
      {"analyze.segments", PVQ_TEXT(analyze.segments)},
      {"paths.out_dir", PVQ_TEXT(paths.out_dir)},
      {"paths.train_embeddings", PVQ_TEXT(paths.train_embeddings)},
      {"paths.train_attributes", PVQ_TEXT(paths.train_attributes)},
      {"paths.heldout_embeddings", PVQ_TEXT(paths.heldout_embeddings)},
      {"paths.heldout_attributes", PVQ_TEXT(paths.heldout_attributes)},
      {"paths.checkpoint", PVQ_TEXT(paths.checkpoint)},
      {"paths.optimizer_state", PVQ_TEXT(paths.optimizer_state)},
      {"paths.loss_curve", PVQ_TEXT(paths.loss_curve)},
      {"paths.manifest", PVQ_TEXT(paths.manifest)},
  };
  return table;
}

#undef PVQ_UINT
#undef PVQ_REAL
#undef PVQ_TEXT
#undef PVQ_FLAG

const Accessor& find(const std::string& key) {
  for (const auto& [name, acc] : accessors()) {
    if (name == key) return acc;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

std::string PathSettings::resolve(const std::string& value, const std::string& default_name) const {
  if (!value.empty()) return value;
  return out_dir.empty() ? default_name : out_dir + "/" + default_name;
}

RunConfig::RunConfig() {
  training.iterations = 1000;
  training.trace = {flow::TraceMode::kHutchinson, 1, 0};
  solver = ode::SolverConfig::adaptive(1e-6, 1e-6);
  manipulate.factors = parse_factor_list("-1.5:0.25:1.5");
}

void RunConfig::validate() const {
  if (world.dim == 0) throw ConfigError("world.dim must be positive");
  if (!(world.noise_scale > 0.0)) throw ConfigError("world.noise_scale must be positive");
  if (model.hidden_layers > 0 && model.hidden == 0) throw ConfigError("model.hidden must be positive");
  if (!(training.adam.learning_rate > 0.0)) throw ConfigError("training.learning_rate must be positive");
  if (training.batch_size == 0) throw ConfigError("training.batch_size must be positive");
  if (training.n_steps == 0) throw ConfigError("training.n_steps must be positive");
  training.trace.validate();
  solver.validate();
  vad.validate();
  if (manipulate.input != "heldout" && manipulate.input != "train") {
    throw ConfigError("manipulate.input must be heldout or train");
  }
  if (analyze.frames == 0) throw ConfigError("analyze.frames must be positive");
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  find(key).set(cfg, key, value);
}

std::string get_value(const RunConfig& cfg, const std::string& key) { return find(key).get(cfg); }

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& entry : accessors()) keys.push_back(entry.first);
  return keys;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' must be inside a section");
    for (const auto& [key, value] : body) set_value(cfg, section + "." + key, value.data());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::vector<double> parse_factor_list(const std::string& text) {
  std::vector<double> out;
  std::string trimmed;
  for (char c : text) {
    if (c != ' ' && c != '\t') trimmed += c;
  }
  if (trimmed.empty()) return out;
  const auto first_colon = trimmed.find(':');
  if (first_colon != std::string::npos) {
    const auto second_colon = trimmed.find(':', first_colon + 1);
    if (second_colon == std::string::npos) throw ConfigError("sweep must be start:step:stop");
    const double start = to_double("sweep", trimmed.substr(0, first_colon));
    const double step = to_double("sweep", trimmed.substr(first_colon + 1, second_colon - first_colon - 1));
    const double stop = to_double("sweep", trimmed.substr(second_colon + 1));
    if (!(step > 0.0) || stop < start) throw ConfigError("sweep needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("sweep has too many values");
    for (std::size_t k = 0; k < count; ++k) {
      const double v = start + static_cast<double>(k) * step;
      out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
  }
  std::istringstream in(trimmed);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ConfigError("empty entry in list '" + text + "'");
    out.push_back(to_double("list", item));
  }
  return out;
}

}  // namespace pvq::config
