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
#include <optional>
#include <string>
#include <vector>

#include "pvqflow/analysis.hpp"
#include "pvqflow/config.hpp"
#include "pvqflow/training.hpp"

namespace pvq::pipeline {

struct GenReport {
  std::size_t n = 0;
  std::size_t n_heldout = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
};

/// Writes the training and held-out sets (CNFE + attribute sidecar).
GenReport run_gen(const config::RunConfig& cfg);

struct TrainReport {
  std::uint64_t first_iteration = 0;
  std::uint64_t iterations = 0;
  std::optional<double> initial_loss;
  std::optional<double> final_loss;
  std::optional<train::GradCheckReport> grad_check;
};

/// Trains from a fresh initialization, or continues from the checkpoint and
/// optimizer state when resume is set. Writes the checkpoint, optimizer state
/// and loss curve (the full curve, including iterations from earlier runs).
TrainReport run_train(const config::RunConfig& cfg, bool resume);

struct ManipulateReport {
  std::size_t embeddings = 0;
  std::vector<double> factors;
  std::vector<std::string> outputs;
};

/// One CNFE (+ sidecar with target attributes) per factor plus a manifest
/// `index,factor,embeddings,attributes`.
ManipulateReport run_manipulate(const config::RunConfig& cfg);

struct AnalyzeReport {
  std::size_t records = 0;
  std::vector<analysis::SummaryTable> tables;
  analysis::CorrelationReport correlations;
};

/// Surrogate temporal analysis and correlations over the manipulated sets,
/// or, when analyze.original_sequence is set, delta analysis of explicit
/// sequence files.
AnalyzeReport run_analyze(const config::RunConfig& cfg);

train::GradCheckReport run_grad_check(const config::RunConfig& cfg);

/// Stage seeds used by the pipeline.
std::uint64_t world_seed(const config::RunConfig& cfg);
std::uint64_t surrogate_seed(const config::RunConfig& cfg, std::size_t utterance);
std::uint64_t segment_seed(const config::RunConfig& cfg, std::size_t utterance);

}  // namespace pvq::pipeline
