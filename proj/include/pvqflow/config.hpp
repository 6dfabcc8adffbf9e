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
#include <string>
#include <vector>

#include "pvqflow/attributes.hpp"
#include "pvqflow/ccnf.hpp"
#include "pvqflow/odeint.hpp"
#include "pvqflow/training.hpp"

namespace pvq::config {

struct WorldSettings {
  std::size_t dim = 16;
  std::size_t n = 4096;
  std::size_t n_heldout = 100;
  double noise_scale = 0.05;
};

struct ModelSettings {
  std::size_t hidden = 64;
  std::size_t hidden_layers = 2;
  double output_scale = 1e-2;
};

struct ManipulateSettings {
  std::vector<double> factors;  // default: -1.5 to 1.5 in steps of 0.25
  std::string input = "heldout";  // "heldout" or "train"
};

struct AnalyzeSettings {
  std::size_t utterances = 20;
  std::size_t frames = 200;
  std::string set_label = "unseen";
  std::vector<double> grid{0.25, 0.5, 0.75, 1.0};
  bool combine_signs = true;
  bool write_sequences = false;
  // Explicit-sequence mode: used instead of the surrogate pipeline when
  // original_sequence is set.
  std::string original_sequence;
  std::string manipulated_sequences;  // "factor=path,factor=path"
  std::string segments;
};

/// Output locations. Empty entries resolve to fixed names under out_dir.
struct PathSettings {
  std::string out_dir = "out";
  std::string train_embeddings;
  std::string train_attributes;
  std::string heldout_embeddings;
  std::string heldout_attributes;
  std::string checkpoint;
  std::string optimizer_state;
  std::string loss_curve;
  std::string manifest;

  std::string resolve(const std::string& value, const std::string& default_name) const;
};

/// Everything a pipeline stage needs. All randomness derives from seed via
/// pvq::derive_seed(seed, "<stage>").
struct RunConfig {
  std::uint64_t seed = 1;
  WorldSettings world;
  ModelSettings model;
  train::TrainingConfig training;
  bool grad_check = false;
  ode::SolverConfig solver;
  attributes::VadConfig vad;
  ManipulateSettings manipulate;
  AnalyzeSettings analyze;
  PathSettings paths;

  RunConfig();
  /// Structural checks that do not depend on files.
  void validate() const;
};

/// INI-style file: [section] headers and key = value lines. Unknown sections
/// or keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// Applies "section.key" = value. Throws ConfigError for unknown keys or
/// unparsable values.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_value(const RunConfig& cfg, const std::string& key);
/// Every recognised key, in file order.
std::vector<std::string> known_keys();

/// "a:step:b" (inclusive sweep) or a comma-separated list.
std::vector<double> parse_factor_list(const std::string& text);

}  // namespace pvq::config
